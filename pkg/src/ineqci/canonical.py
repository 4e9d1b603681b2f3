"""Canonical two-dimensional form and acceptance-region oracles.

Coverage of the inequality-imposed interval is a statement about every
admissible truth, every covariance matrix, and every dimension, which
is uncheckable by brute force.  This module implements the reduction
that makes verification tractable: a chain of four maps, each of which
transforms the estimate, the constraint, and the truth together while
leaving the event "the interval covers the true target" unchanged.
After the chain the problem has two coordinates, identity covariance,
a single observation, and a unit-norm constraint direction with both
components positive.  A canonical problem is therefore described by
``(a1, a2, b)`` alone with ``a1, a2 > 0``, ``a1^2 + a2^2 = 1`` and
``b <= 0``.

For canonical problems the event "the interval covers zero" admits
closed-form bounds in the estimate plane: the acceptance region is

    { theta_hat : LB(theta_hat_2) <= theta_hat_1 <= UB(theta_hat_2) }

with

    LB(t) = max( (a1/a2) (t + b/a2) - z/a2, -z )
    UB(t) = max( (a1/a2) (t + b/a2) + z/a2,  z )

These bounds, an explicit rotation that straightens the region when
``b = 0``, and two quadrature identities for its probability give
independent routes to the same coverage event.  The test suite leans on
their agreement: a bug in the interval engine or a bug in an oracle
would break the three-way equivalence on a grid, the Monte Carlo
coverage floor, or the quadrature identity, while identical bugs across
such different formulas are implausible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .core import (
    EstimateSummary,
    EstimateValidationError,
    Level,
    LinearConstraint,
    normal_cdf,
    normal_quantile,
    validate,
)

__all__ = [
    "AcceptanceRegion",
    "CanonicalProblem",
    "NotReducibleError",
    "ReductionState",
    "Rotation",
    "acceptance_bounds",
    "acceptance_probability",
    "band_probability",
    "canonicalize",
    "center_at_truth",
    "collapse_to_plane",
    "coverage_indicator",
    "orient_direction",
    "reduce_state",
    "rotation_indicator",
    "shifted_coverage_curve",
    "standardize_scale",
]

_UNIT_TOL = 1e-12


class NotReducibleError(ValueError):
    """The target coordinate is uncorrelated with the constraint direction.

    The reduction needs a nonzero covariance between the target
    coordinate and the constraint direction.  When it is zero the
    transition threshold vanishes, the inequality-imposed interval has
    exact nominal coverage, and no canonical form is needed; callers
    should handle that case directly.
    """


@dataclass(frozen=True)
class CanonicalProblem:
    """Canonical reduced problem: V = I2, n = 1, unit constraint."""

    a1: float
    a2: float
    b: float

    def __post_init__(self) -> None:
        if not (self.a1 > 0.0 and self.a2 > 0.0):
            raise EstimateValidationError(
                f"canonical direction must have positive components, got "
                f"({self.a1!r}, {self.a2!r})"
            )
        if abs(self.a1 * self.a1 + self.a2 * self.a2 - 1.0) > _UNIT_TOL:
            raise EstimateValidationError(
                f"canonical direction must have unit norm, got "
                f"a1^2 + a2^2 = {self.a1**2 + self.a2**2!r}"
            )
        if self.b > 0.0:
            raise EstimateValidationError(
                f"canonical offset must satisfy b <= 0, got {self.b!r}"
            )

    def constraint(self) -> LinearConstraint:
        return LinearConstraint(a=np.array([self.a1, self.a2]), b=self.b)

    def estimate(self, theta_hat_2d) -> EstimateSummary:
        """Wrap a canonical draw as an estimate summary (V = I2, n = 1)."""
        return EstimateSummary(
            theta_hat=np.asarray(theta_hat_2d, dtype=float),
            v_hat=np.eye(2),
            n=1,
        )


@dataclass(frozen=True)
class ReductionState:
    """One stage of the reduction: draws plus problem description.

    ``theta`` may carry leading batch axes, shape ``(..., k)``; the
    reduction maps are affine in the draw, so whole draw blocks move
    through the chain at once.
    """

    theta: np.ndarray
    v: np.ndarray
    n: float
    a: np.ndarray
    b: float

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float)
        v = np.asarray(self.v, dtype=float)
        a = np.asarray(self.a, dtype=float)
        k = a.size
        if theta.shape[-1] != k or v.shape != (k, k):
            raise EstimateValidationError(
                f"inconsistent reduction state: theta {theta.shape}, "
                f"v {v.shape}, a {a.shape}"
            )
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "n", float(self.n))


def center_at_truth(state: ReductionState, theta_true) -> ReductionState:
    """Shift coordinates so the true parameter sits at the origin.

    The draw becomes ``theta - theta_true`` and the constraint offset
    absorbs the shift, ``b -> a' theta_true + b``, so the slack of every
    point is unchanged.  An admissible truth yields a nonpositive new
    offset.
    """
    theta_true = np.asarray(theta_true, dtype=float)
    return replace(
        state,
        theta=state.theta - theta_true,
        b=float(state.a @ theta_true) + state.b,
    )


def collapse_to_plane(state: ReductionState, target_index: int = 0) -> ReductionState:
    """Project to the two coordinates the interval actually uses.

    New coordinates are the target coordinate and ``d' theta`` with
    ``d = a - e_t (v_tt)^{-1} cva``, chosen uncorrelated with the
    target.  The new covariance is diagonal, the new direction is
    ``(cva / v_tt, 1)``, and the slack ``a' theta + b`` of every draw is
    reproduced exactly, so all interval ingredients (target coordinate,
    slack, and the variances behind ``se``, ``se_eq`` and the
    threshold) are preserved.

    Requires a nonzero covariance ``cva`` between target and constraint
    direction; otherwise the canonical form does not exist.
    """
    t = target_index
    v = state.v
    a = state.a
    v_tt = float(v[t, t])
    cva = float(v[t] @ a)
    if cva == 0.0:
        raise NotReducibleError(
            "target coordinate is uncorrelated with the constraint direction"
        )
    ava = float(a @ v @ a)
    d = a.copy()
    d[t] -= cva / v_tt
    theta2 = np.stack([state.theta[..., t], state.theta @ d], axis=-1)
    vdd = ava - cva * cva / v_tt
    return ReductionState(
        theta=theta2,
        v=np.diag([v_tt, vdd]),
        n=state.n,
        a=np.array([cva / v_tt, 1.0]),
        b=state.b,
    )


def standardize_scale(state: ReductionState) -> ReductionState:
    """Rescale a diagonal two-coordinate problem to V = I2, n = 1.

    Each coordinate is multiplied by ``sqrt(n / v_ii)`` and the
    direction by the reciprocal factor, which keeps every slack value
    and turns both variances of ``sqrt(n) (theta_hat - theta)`` into
    one.  Positive rescaling of the target coordinate maps intervals to
    intervals, so the coverage event is untouched.
    """
    v = state.v
    if v.shape != (2, 2) or abs(v[0, 1]) > 0.0 or abs(v[1, 0]) > 0.0:
        raise EstimateValidationError(
            "standardize_scale expects a diagonal 2x2 covariance"
        )
    scale = np.sqrt(state.n / np.diag(v))
    return ReductionState(
        theta=state.theta * scale,
        v=np.eye(2),
        n=1.0,
        a=state.a / scale,
        b=state.b,
    )


def orient_direction(state: ReductionState) -> ReductionState:
    """Flip and normalize so the direction is unit length with a1 > 0.

    Negating the target coordinate mirrors every interval through zero,
    which does not change whether zero is covered, and scaling ``(a,
    b)`` by a positive constant leaves the constraint set as is.
    """
    a = state.a
    if a.size != 2:
        raise EstimateValidationError("orient_direction expects a 2-coordinate problem")
    if a[0] == 0.0:
        raise NotReducibleError(
            "target coordinate is uncorrelated with the constraint direction"
        )
    sign = 1.0 if a[0] > 0.0 else -1.0
    flip = np.array([sign, 1.0])
    norm = float(np.hypot(a[0], a[1]))
    return ReductionState(
        theta=state.theta * flip,
        v=state.v,
        n=state.n,
        a=(a * flip) / norm,
        b=state.b / norm,
    )


def reduce_state(
    state: ReductionState, theta_true, target_index: int = 0
) -> tuple[CanonicalProblem, ReductionState]:
    """Run the full reduction chain on a state with admissible truth."""
    s = center_at_truth(state, theta_true)
    if s.b > 0.0:
        tol = 1e-9 * max(1.0, abs(float(state.a @ np.asarray(theta_true, float))), abs(state.b))
        if s.b > tol:
            raise EstimateValidationError(
                f"true parameter violates the constraint: slack {s.b:.3e} > 0"
            )
        s = replace(s, b=0.0)
    s = collapse_to_plane(s, target_index)
    s = standardize_scale(s)
    s = orient_direction(s)
    problem = CanonicalProblem(a1=float(s.a[0]), a2=float(s.a[1]), b=s.b)
    return problem, s


def canonicalize(
    estimate: EstimateSummary,
    constraint: LinearConstraint,
    theta_true,
) -> tuple[CanonicalProblem, np.ndarray]:
    """Reduce an estimate/constraint/truth triple to canonical form.

    Returns the canonical problem description and the transformed draw,
    a two-coordinate vector whose first entry is the (rescaled, maybe
    sign-flipped) target coordinate.  The true target value maps to
    zero, and zero is covered by the canonical inequality-imposed
    interval exactly when the original interval covers the original
    true target.

    Raises
    ------
    NotReducibleError
        If the target coordinate is uncorrelated with the constraint
        direction under ``v_hat``.  In that case the transition
        threshold is zero and the inequality-imposed interval already
        has exact nominal coverage; no canonical form is needed.
    EstimateValidationError
        If ``theta_true`` violates the constraint.
    """
    estimate, constraint = validate(estimate, constraint)
    state = ReductionState(
        theta=estimate.theta_hat,
        v=estimate.v_hat,
        n=float(estimate.n),
        a=constraint.a,
        b=constraint.b,
    )
    problem, reduced = reduce_state(state, theta_true, estimate.target_index)
    return problem, reduced.theta


@dataclass(frozen=True)
class AcceptanceRegion:
    """Closed-form region of draws whose canonical interval covers zero.

    For a canonical problem the inequality-imposed interval covers zero
    exactly when the draw lies between two explicit boundary curves in
    the ``(theta_1, theta_2)`` plane.  Each curve is the maximum of a
    flat line (inherited from the usual interval) and a slanted line
    (inherited from the equality-imposed interval); the curves cross
    the switching lines of the interval exactly where the endpoint
    formulas hand over.
    """

    problem: CanonicalProblem
    level: Level

    def lower(self, theta2):
        """Lower boundary LB evaluated at theta2 (vectorized)."""
        p, z = self.problem, self.level.z
        slant = (p.a1 / p.a2) * (np.asarray(theta2, dtype=float) + p.b / p.a2)
        return np.maximum(slant - z / p.a2, -z)

    def upper(self, theta2):
        """Upper boundary UB evaluated at theta2 (vectorized)."""
        p, z = self.problem, self.level.z
        slant = (p.a1 / p.a2) * (np.asarray(theta2, dtype=float) + p.b / p.a2)
        return np.maximum(slant + z / p.a2, z)

    def contains(self, theta_hat):
        """Membership test; theta_hat has shape (..., 2)."""
        theta_hat = np.asarray(theta_hat, dtype=float)
        t1 = theta_hat[..., 0]
        t2 = theta_hat[..., 1]
        return (self.lower(t2) <= t1) & (t1 <= self.upper(t2))


def acceptance_bounds(problem: CanonicalProblem, level: Level, theta2):
    """Boundary curves (LB, UB) of the acceptance region at theta2."""
    region = AcceptanceRegion(problem, level)
    return region.lower(theta2), region.upper(theta2)


def coverage_indicator(problem: CanonicalProblem, level: Level, theta_hat):
    """Whether the canonical interval built from theta_hat covers zero.

    Evaluated through the closed-form acceptance region, independently
    of the interval engine.  ``theta_hat`` may carry batch axes.
    """
    return AcceptanceRegion(problem, level).contains(theta_hat)


@dataclass(frozen=True)
class Rotation:
    """Orthogonal symmetric rotation that straightens the b = 0 region.

    With ``x = sqrt((1 - a2) / 2)`` and ``y = sqrt((1 + a2) / 2)`` the
    matrix ``[[x, y], [y, -x]]`` is its own inverse, and in rotated
    coordinates ``Z`` the acceptance region of an offset-free canonical
    problem becomes the band ``-z <= x |Z_1| - y Z_2 <= z``.  The fold
    along ``|Z_1|`` is what makes the region probability free of the
    direction components; see :func:`band_probability`.
    """

    x: float
    y: float

    @classmethod
    def for_slope(cls, a2: float) -> "Rotation":
        if not 0.0 < a2 < 1.0:
            raise EstimateValidationError(f"a2 must lie in (0, 1), got {a2!r}")
        return cls(x=math.sqrt((1.0 - a2) / 2.0), y=math.sqrt((1.0 + a2) / 2.0))

    @property
    def omega(self) -> np.ndarray:
        return np.array([[self.x, self.y], [self.y, -self.x]])


def rotation_indicator(problem: CanonicalProblem, level: Level, theta_hat):
    """Coverage indicator evaluated in rotated coordinates (b = 0 only).

    Independent route to :func:`coverage_indicator`: rotate the draw by
    the straightening rotation and test membership in the folded band.
    Raises for problems with a nonzero offset, where no straightening
    rotation of this form exists.
    """
    if problem.b != 0.0:
        raise EstimateValidationError(
            "rotation_indicator supports only canonical problems with b = 0"
        )
    rot = Rotation.for_slope(problem.a2)
    theta_hat = np.asarray(theta_hat, dtype=float)
    zc = theta_hat @ rot.omega.T
    stat = rot.x * np.abs(zc[..., 0]) - rot.y * zc[..., 1]
    z = level.z
    return (-z <= stat) & (stat <= z)


_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _phi(t: float) -> float:
    return math.exp(-0.5 * t * t) / _SQRT_2PI


def band_probability(x: float, y: float, alpha: float) -> float:
    """Probability of the folded band under a standard normal pair.

    Computes ``P(-z <= x |Z_1| - y Z_2 <= z)`` for independent standard
    normal ``Z_1, Z_2`` and ``z`` the two-sided critical value of
    ``alpha``, by integrating the ``Z_2`` band probability over the
    ``Z_1`` density.  For every ``x, y`` on the positive quarter of the
    unit circle the value is ``1 - alpha``: folding ``Z_1`` makes the
    band cover the same probability regardless of its tilt.  This
    identity is the distribution-level reason the canonical interval is
    exact at a binding, offset-free truth, and the quadrature here is
    the independent check the test suite compares against.

    Accepts ``alpha`` in ``(0, 1]``; at ``alpha = 1`` the band is empty
    and the probability is zero.
    """
    if not (0.0 < x < 1.0 and 0.0 < y < 1.0):
        raise EstimateValidationError(f"x and y must lie in (0, 1), got ({x!r}, {y!r})")
    if abs(x * x + y * y - 1.0) > 1e-9:
        raise EstimateValidationError(
            f"(x, y) must lie on the unit circle, got x^2 + y^2 = {x*x + y*y!r}"
        )
    if not 0.0 < alpha <= 1.0:
        raise EstimateValidationError(f"alpha must lie in (0, 1], got {alpha!r}")
    z = normal_quantile(1.0 - alpha / 2.0)

    def integrand(t: float) -> float:
        return _phi(t) * (normal_cdf((x * t + z) / y) - normal_cdf((x * t - z) / y))

    # Fold: the integrand is even in t.  Mass beyond |t| = 9 is below 1e-18.
    value, _ = quad(integrand, 0.0, 9.0, epsabs=1e-12, limit=200)
    return 2.0 * value


def _slice_probability(problem: CanonicalProblem, z: float, w):
    """Target-coordinate coverage probability of the slice at slack w.

    For a canonical draw with second coordinate t2, let
    ``w = -(t2 + b / a2)``.  Conditional on t2 the first coordinate is
    standard normal, so the slice probability is the normal measure of
    ``[LB, UB]`` expressed through ``w``:

        f(w) = Phi(max(-(a1/a2) w + z/a2,  z))
             - Phi(max(-(a1/a2) w - z/a2, -z))
    """
    p = problem
    w = np.asarray(w, dtype=float)
    slant = -(p.a1 / p.a2) * w
    hi = np.maximum(slant + z / p.a2, z)
    lo = np.maximum(slant - z / p.a2, -z)
    return normal_cdf(hi) - normal_cdf(lo)


def shifted_coverage_curve(problem: CanonicalProblem, level: Level, mu):
    """Expected slice probability when the slack statistic is shifted.

    Returns ``E f(W + mu)`` for ``W`` standard normal, with ``f`` the
    slice probability of :func:`_slice_probability`.  At ``mu = 0``
    the value is exactly ``1 - alpha``.  For ``mu > 0`` it stays at or
    above ``1 - alpha`` (the slice probability crosses the level
    ``1 - alpha`` exactly once, from below, which makes every rightward
    shift of the weight raise the mean), rises to an interior peak, and
    falls back to ``1 - alpha`` as ``mu`` grows, because far inside the
    constraint the interval reverts to the usual one almost surely.  A
    truth with second coordinate ``t2`` corresponds to
    ``mu = -(a2 t2 + b) / a2``, which is nonnegative for admissible
    truths, so the curve dominates the nominal level over the whole
    admissible range: this is the analytic form of the coverage
    guarantee for canonical problems.

    ``mu`` may be a scalar or an array; the shape is preserved.
    """
    z = level.z
    p = problem
    # Kinks of the slice probability sit at the transition slack values.
    c = z * (1.0 - p.a2) / p.a1

    def one(mu_i: float) -> float:
        lo = min(-c, mu_i - 12.0) - 1.0
        hi = max(c, mu_i + 12.0) + 1.0
        value, _ = quad(
            lambda w: float(_slice_probability(p, z, w)) * _phi(w - mu_i),
            lo,
            hi,
            points=[-c, c],
            epsabs=1e-11,
            limit=400,
        )
        return value

    arr = np.asarray(mu, dtype=float)
    if arr.ndim == 0:
        return one(float(arr))
    return np.array([one(float(m)) for m in arr.ravel()]).reshape(arr.shape)


def acceptance_probability(problem: CanonicalProblem, level: Level, theta2_true: float) -> float:
    """Exact coverage of the canonical interval at a given true theta2.

    Quadrature evaluation of ``P(theta_hat in acceptance region)`` when
    ``theta_hat ~ N((0, theta2_true), I2)``.  Admissible truths have
    ``a2 theta2_true + b <= 0`` and coverage at least ``1 - alpha``;
    the function itself accepts any ``theta2_true``, which is useful
    for mapping how fast coverage decays outside the admissible range.
    """
    mu = -(problem.a2 * float(theta2_true) + problem.b) / problem.a2
    return float(shifted_coverage_curve(problem, level, mu))
