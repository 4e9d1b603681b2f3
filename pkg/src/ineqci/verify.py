"""Self-contained verification suites for the coverage machinery.

Each check pits the interval engine against an independently derived
oracle: the closed-form acceptance region, the straightening rotation,
the quadrature identities, the reduction chain, the high-precision
threshold identity, or the adaptivity limits of the likelihood-ratio
interval.  The suites are callable from the command line (``ineqci
verify``) and from the test suite; sizes are arguments so tests can run
them small and the acceptance run can use the full defaults.

Checks that compare the engine to an oracle accept the engine as an
injectable callable.  That keeps the oracles honest: substituting a
deliberately broken engine must make the check fail, and the test suite
includes exactly that mutation.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, getcontext
from typing import Callable, Sequence

import numpy as np

from .canonical import (
    CanonicalProblem,
    ReductionState,
    _slice_probability,
    band_probability,
    center_at_truth,
    collapse_to_plane,
    coverage_indicator,
    orient_direction,
    rotation_indicator,
    shifted_coverage_curve,
    standardize_scale,
)
from .core import EstimateSummary, Level, LinearConstraint
from .intervals import IntervalKernel, eici, transition_threshold, uci
from .lr import lrci

__all__ = [
    "CheckResult",
    "check_band_probability",
    "check_coverage_floor",
    "check_lr_adaptivity",
    "check_reduction_chain",
    "check_region_equivalence",
    "check_threshold_identity",
    "run_all",
]


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one verification suite."""

    name: str
    passed: bool
    worst: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail}"


def _random_problem(rng: np.random.Generator, force_b_zero: bool) -> CanonicalProblem:
    a1 = float(rng.uniform(0.05, 0.95))
    a2 = float(np.sqrt(1.0 - a1 * a1))
    b = 0.0 if force_b_zero else -float(rng.uniform(0.0, 2.0))
    return CanonicalProblem(a1=a1, a2=a2, b=b)


def _engine_indicator(problem: CanonicalProblem, level: Level, theta: np.ndarray):
    """Coverage of zero according to the interval engine itself."""
    kernel = IntervalKernel.from_problem(np.eye(2), 1, problem.constraint(), level)
    g = problem.constraint().value(theta)
    lower, upper = kernel.iici_endpoints(theta[..., 0], g)
    return (lower <= 0.0) & (0.0 <= upper)


def check_region_equivalence(
    instances: int = 20,
    grid_points: int = 201,
    seed: int = 0,
    alpha: float = 0.05,
    engine: Callable | None = None,
) -> CheckResult:
    """Engine, acceptance region, and rotation agree pointwise on a grid.

    For random canonical problems (half of them offset-free) the
    inequality-imposed interval is evaluated on a square grid of draws
    and the indicator "the interval covers zero" is compared with the
    closed-form region membership, and additionally with the rotated
    band membership when the offset is zero.  Any single disagreement
    fails the check.
    """
    engine = engine or _engine_indicator
    level = Level(alpha)
    rng = np.random.default_rng(seed)
    axis = np.linspace(-6.0, 6.0, grid_points)
    t1, t2 = np.meshgrid(axis, axis, indexing="ij")
    theta = np.stack([t1, t2], axis=-1)
    disagreements = 0
    scanned = 0
    for index in range(instances):
        problem = _random_problem(rng, force_b_zero=(index % 2 == 0))
        by_engine = np.asarray(engine(problem, level, theta))
        by_region = coverage_indicator(problem, level, theta)
        disagreements += int(np.count_nonzero(by_engine != by_region))
        scanned += by_engine.size
        if problem.b == 0.0:
            by_rotation = rotation_indicator(problem, level, theta)
            disagreements += int(np.count_nonzero(by_engine != by_rotation))
            scanned += by_engine.size
    return CheckResult(
        name="region-equivalence",
        passed=disagreements == 0,
        worst=float(disagreements),
        detail=(
            f"{disagreements} disagreement(s) across {scanned} grid evaluations "
            f"({instances} instances, {grid_points}x{grid_points} grid)"
        ),
    )


def _random_full_problem(rng: np.random.Generator, k: int):
    """Random k-coordinate problem with benign geometry.

    The covariance mixes random rotation with coordinate scales between
    0.3 and 3; direction and truth are resampled until the constraint
    direction is well separated from the target axis and carries a
    target covariance bounded away from zero, since the reduction is
    undefined at exactly zero and ulp-level boundary effects would make
    exact indicator comparison flaky in the immediate vicinity.
    """
    basis = rng.standard_normal((k, k))
    scales = rng.uniform(0.3, 3.0, size=k)
    v = basis @ basis.T + 0.5 * np.eye(k)
    v = v * np.outer(scales, scales)
    while True:
        a = rng.standard_normal(k)
        cva = float(v[0] @ a)
        ava = float(a @ v @ a)
        if abs(cva) >= 0.05 * np.sqrt(v[0, 0] * ava) and np.linalg.norm(a[1:]) > 0.1:
            break
    theta_true = rng.standard_normal(k)
    slack = float(a @ theta_true)
    b = -slack - float(rng.uniform(0.0, 2.0))  # strict slack at the truth
    n = int(rng.choice([1, 25, 400]))
    return v, a, b, theta_true, n


def _state_covers_zero(state: ReductionState, level: Level, target_index: int):
    """IICI coverage of a zero true target, evaluated on a draw batch."""
    kernel = IntervalKernel.from_problem(
        state.v, max(int(state.n), 1),
        LinearConstraint(a=state.a, b=state.b), level, target_index,
    )
    g = state.theta @ state.a + state.b
    lower, upper = kernel.iici_endpoints(state.theta[..., target_index], g)
    return (lower <= 0.0) & (0.0 <= upper)


def check_reduction_chain(
    instances: int = 100,
    draws: int = 10_000,
    seed: int = 0,
    alpha: float = 0.05,
) -> CheckResult:
    """Each reduction step preserves the coverage indicator draw by draw.

    Random problems in 2 to 4 coordinates, random admissible truths,
    normal draw blocks.  After centering at the truth the true target
    is zero, and each subsequent map must leave the indicator of every
    single draw unchanged.  The check also covers the original problem
    against the centered one (coverage of the true target versus
    coverage of zero).
    """
    level = Level(alpha)
    rng = np.random.default_rng(seed)
    disagreements = 0
    compared = 0
    for index in range(instances):
        k = int(rng.integers(2, 5))
        v, a, b, theta_true, n = _random_full_problem(rng, k)
        block = theta_true + rng.standard_normal((draws, k)) @ np.linalg.cholesky(v / n).T

        constraint = LinearConstraint(a=a, b=b)
        kernel0 = IntervalKernel.from_problem(v, n, constraint, level, 0)
        g0 = block @ a + b
        lo0, up0 = kernel0.iici_endpoints(block[:, 0], g0)
        target_true = theta_true[0]
        current = (lo0 <= target_true) & (target_true <= up0)

        state = ReductionState(theta=block, v=v, n=float(n), a=a, b=b)
        stages = []
        state = center_at_truth(state, theta_true)
        stages.append(state)
        state = collapse_to_plane(state, 0)
        stages.append(state)
        state = standardize_scale(state)
        stages.append(state)
        state = orient_direction(state)
        stages.append(state)

        for stage in stages:
            after = _state_covers_zero(stage, level, 0)
            disagreements += int(np.count_nonzero(after != current))
            compared += draws
            current = after
    return CheckResult(
        name="reduction-chain",
        passed=disagreements == 0,
        worst=float(disagreements),
        detail=(
            f"{disagreements} indicator change(s) across {compared} "
            f"draw-by-step comparisons ({instances} instances)"
        ),
    )


def check_band_probability(samples: int = 100, seed: int = 0) -> CheckResult:
    """The folded-band probability equals one minus alpha by quadrature."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        angle = rng.uniform(0.05, np.pi / 2.0 - 0.05)
        x, y = float(np.sin(angle)), float(np.cos(angle))
        alpha = float(rng.uniform(0.005, 0.995))
        value = band_probability(x, y, alpha)
        worst = max(worst, abs(value - (1.0 - alpha)))
    return CheckResult(
        name="band-probability",
        passed=worst <= 1e-6,
        worst=worst,
        detail=f"max |probability - (1 - alpha)| = {worst:.2e} over {samples} triples",
    )


def check_coverage_floor(
    problems: int = 10, grid: int = 50, seed: int = 0, alpha: float = 0.05
) -> CheckResult:
    """Shifted coverage equals 1 - alpha at zero and never drops below it.

    Four facts are checked per random canonical problem.  The shifted
    coverage curve ``E f(W + mu)`` equals ``1 - alpha`` at ``mu = 0``,
    stays at or above it across a shift grid, and returns to
    ``1 - alpha`` far inside the constraint (at ``mu = 10`` the usual
    interval is used up to normal-tail mass).  Separately, the slice
    probability ``f`` itself has the single-crossing shape the floor
    rests on: constant at ``1 - alpha`` above the transition slack,
    at or above ``1 - alpha`` between the two transition slacks, and
    nondecreasing below the lower one.  The curve is *not* monotone in
    the shift: it peaks at an interior shift and decays back to the
    nominal level from above, so only the floor is asserted.
    """
    level = Level(alpha)
    z = level.z
    rng = np.random.default_rng(seed)
    worst = 0.0
    for index in range(problems):
        problem = _random_problem(rng, force_b_zero=(index % 2 == 0))
        mu = np.linspace(0.0, 5.0, grid)
        values = shifted_coverage_curve(problem, level, mu)
        worst = max(worst, abs(values[0] - (1.0 - alpha)))
        worst = max(worst, float(np.max(np.maximum((1.0 - alpha) - values, 0.0))))
        far = float(shifted_coverage_curve(problem, level, 10.0))
        worst = max(worst, abs(far - (1.0 - alpha)))

        kink = z * (1.0 - problem.a2) / problem.a1
        flat = _slice_probability(problem, z, np.linspace(kink, kink + 8.0, 200))
        worst = max(worst, float(np.max(np.abs(flat - (1.0 - alpha)))))
        bump = _slice_probability(problem, z, np.linspace(-kink, kink, 200))
        worst = max(worst, float(np.max(np.maximum((1.0 - alpha) - bump, 0.0))))
        rise = _slice_probability(problem, z, np.linspace(-kink - 12.0, -kink, 400))
        worst = max(worst, float(np.max(np.maximum(-np.diff(rise), 0.0), initial=0.0)))
    return CheckResult(
        name="coverage-floor",
        passed=worst <= 1e-7,
        worst=worst,
        detail=(
            f"max violation of start/floor/far-limit/slice-shape = {worst:.2e} "
            f"over {problems} problems x {grid} shifts"
        ),
    )


def check_threshold_identity(
    instances: int = 200, seed: int = 0, alpha: float = 0.05
) -> CheckResult:
    """The stable threshold matches the textbook form at high precision.

    The shipped threshold ``z cva / (n (se + se_eq))`` is compared with
    ``(cva)^{-1} (a'Va) (se - se_eq) z`` evaluated in 60-digit decimal
    arithmetic, which sidesteps the catastrophic cancellation of the
    latter in double precision for small covariances.
    """
    getcontext().prec = 60
    level = Level(alpha)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        k = int(rng.integers(2, 5))
        v, a, b, _, n = _random_full_problem(rng, k)
        estimate = EstimateSummary(theta_hat=np.zeros(k), v_hat=v, n=n)
        constraint = LinearConstraint(a=a, b=b)
        stable = transition_threshold(estimate, constraint, level)

        v_tt = Decimal(v[0, 0])
        cva = Decimal(float(v[0] @ a))
        ava = Decimal(float(a @ v @ a))
        dn = Decimal(n)
        se = (v_tt / dn).sqrt()
        se_eq = ((v_tt - cva * cva / ava) / dn).sqrt()
        reference = (ava / cva) * (se - se_eq) * Decimal(level.z)
        rel = abs(Decimal(stable) - reference) / abs(reference)
        worst = max(worst, float(rel))
    return CheckResult(
        name="threshold-identity",
        passed=worst <= 1e-10,
        worst=worst,
        detail=f"max relative difference = {worst:.2e} over {instances} instances",
    )


def check_lr_adaptivity(
    instances: int = 100, seed: int = 0, alpha: float = 0.05
) -> CheckResult:
    """LRCI reduces to the UCI under deep slack and the EICI under deep violation.

    For each random geometry two estimates are built: one whose slack
    is far below the switch-over scale and one far above it (the latter
    scaled up by the correlation between target and constraint
    direction, which governs how far the violation must be before the
    hyperplane piece of the statistic stops mattering).  Endpoints must
    agree with the corresponding closed-form interval to 1e-6.
    """
    level = Level(alpha)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        k = int(rng.integers(2, 5))
        v, a, b, _, n = _random_full_problem(rng, k)
        constraint = LinearConstraint(a=a, b=b)
        ava = float(a @ v @ a)
        v_tt = float(v[0, 0])
        cva = float(v[0] @ a)
        slack_se = float(np.sqrt(ava / n))
        rho2 = cva * cva / (v_tt * ava)

        theta = rng.standard_normal(k)
        current = float(a @ theta) + b

        deep_slack = theta - a * ((current + 6.0 * slack_se) / float(a @ a))
        est = EstimateSummary(theta_hat=deep_slack, v_hat=v, n=n)
        scale = max(1.0, float(np.sqrt(v_tt / n)))
        lr_iv = lrci(est, constraint, level)
        uci_iv = uci(est, level)
        worst = max(
            worst,
            abs(lr_iv.lower - uci_iv.lower) / scale,
            abs(lr_iv.upper - uci_iv.upper) / scale,
        )

        margin = level.z * np.sqrt(rho2 / max(1.0 - rho2, 1e-12)) + 6.0
        deep_violation = theta + a * ((margin * slack_se - current) / float(a @ a))
        est = EstimateSummary(theta_hat=deep_violation, v_hat=v, n=n)
        lr_iv = lrci(est, constraint, level)
        eici_iv = eici(est, constraint, level)
        worst = max(
            worst,
            abs(lr_iv.lower - eici_iv.lower) / scale,
            abs(lr_iv.upper - eici_iv.upper) / scale,
        )
    return CheckResult(
        name="lr-adaptivity",
        passed=worst <= 1e-6,
        worst=worst,
        detail=f"max endpoint difference = {worst:.2e} over {instances} geometries",
    )


def run_all(
    seed: int = 0,
    checks: Sequence[str] | None = None,
    instances: int | None = None,
    grid_points: int | None = None,
    draws: int | None = None,
) -> list[CheckResult]:
    """Run the named verification suites (all of them by default)."""
    available: dict[str, Callable[[], CheckResult]] = {
        "region-equivalence": lambda: check_region_equivalence(
            instances=instances or 20, grid_points=grid_points or 201, seed=seed
        ),
        "reduction-chain": lambda: check_reduction_chain(
            instances=instances or 100, draws=draws or 10_000, seed=seed
        ),
        "band-probability": lambda: check_band_probability(
            samples=instances or 100, seed=seed
        ),
        "coverage-floor": lambda: check_coverage_floor(
            problems=instances or 10, seed=seed
        ),
        "threshold-identity": lambda: check_threshold_identity(
            instances=instances or 200, seed=seed
        ),
        "lr-adaptivity": lambda: check_lr_adaptivity(
            instances=instances or 100, seed=seed
        ),
    }
    names = list(available) if checks is None else list(checks)
    unknown = [name for name in names if name not in available]
    if unknown:
        raise ValueError(f"unknown check(s) {unknown}; available: {list(available)}")
    return [available[name]() for name in names]
