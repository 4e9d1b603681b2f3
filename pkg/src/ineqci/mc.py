"""Monte Carlo coverage and length experiments on a fixed grid of truths.

The default configuration reproduces the running two-parameter design:
covariance with unit variances and correlation 0.7, constraint
``theta_2 <= 0``, truths ``(0, theta_2)`` for ``theta_2`` from -5 to 0
in steps of 0.1, nominal level 95 percent, and 100_000 draws per grid
point.  Coverage probability (CP) is the fraction of draws whose
interval contains the true target value 0, and average length (AL) is
the mean interval length.

Reproducibility contract: each grid point draws its block from
``numpy.random.default_rng([seed, grid_index])`` in a single vectorized
``standard_normal`` call, multiplied by the Cholesky factor of the
covariance.  Results therefore depend only on the configuration, not
on scheduling, and any parallel split across grid points reproduces
the serial run.  All methods are evaluated on the same draw block
(common random numbers), so draw-by-draw comparisons between methods
are meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import chi2

from .core import EstimateSummary, Level, LinearConstraint
from .intervals import IntervalKernel, _geometry
from .lr import _lr_excess, lr_interval_bounds, sclr_critical_value

__all__ = [
    "CoverageRecord",
    "McConfig",
    "METHODS",
    "panel_a_curves",
    "simulate_grid",
    "write_cp_al_csv",
    "write_panel_csv",
]

METHODS = ("UCI", "EICI", "IICI", "IITCI", "LRCI", "SCLRCI")


def _default_v() -> np.ndarray:
    return np.array([[1.0, 0.7], [0.7, 1.0]])


def _default_constraint() -> LinearConstraint:
    return LinearConstraint(a=np.array([0.0, 1.0]), b=0.0)


def _default_grid() -> np.ndarray:
    return np.round(np.arange(-50, 1) * 0.1, 10)


@dataclass(frozen=True)
class McConfig:
    """Configuration of a coverage/length experiment.

    ``theta2_grid`` lists the true values of the second coordinate; the
    true target is always zero.  ``methods`` selects which intervals to
    evaluate, any subset of ``METHODS``.  ``sclr_reps`` controls the
    simulated critical value, which is computed once per configuration:
    at a binding truth the law of the LR statistic does not depend on
    the location along the boundary, so one simulation serves every
    draw and every grid point.
    """

    v_hat: np.ndarray = field(default_factory=_default_v)
    constraint: LinearConstraint = field(default_factory=_default_constraint)
    theta2_grid: np.ndarray = field(default_factory=_default_grid)
    reps: int = 100_000
    alpha: float = 0.05
    seed: int = 0
    methods: tuple[str, ...] = ("UCI", "EICI", "IICI")
    n: int = 1
    sclr_reps: int = 100_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "v_hat", np.asarray(self.v_hat, dtype=float))
        object.__setattr__(
            self, "theta2_grid", np.asarray(self.theta2_grid, dtype=float)
        )
        object.__setattr__(self, "methods", tuple(self.methods))
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {METHODS}")
        if self.reps < 1:
            raise ValueError(f"reps must be positive, got {self.reps!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")

    @property
    def level(self) -> Level:
        return Level(self.alpha)


@dataclass(frozen=True)
class CoverageRecord:
    """Coverage and length summary for one grid point and one method."""

    theta2: float
    method: str
    cp: float
    al: float
    failures: int = 0


class _MethodEvaluator:
    """Vectorized endpoint evaluation for every supported method."""

    def __init__(self, config: McConfig):
        level = config.level
        self.kernel = IntervalKernel.from_problem(
            config.v_hat, config.n, config.constraint, level
        )
        probe = EstimateSummary(
            theta_hat=np.zeros(config.constraint.a.size),
            v_hat=config.v_hat,
            n=config.n,
        )
        _, _, v_tt, cva, ava = _geometry(probe, config.constraint)
        self.v_tt, self.cva, self.ava = v_tt, cva, ava
        self.n = float(config.n)
        self.crit_lr = float(chi2.ppf(1.0 - config.alpha, df=1))
        self.crit_sclr: float | None = None
        if "SCLRCI" in config.methods:
            self.crit_sclr = sclr_critical_value(
                probe, config.constraint, level,
                reps=config.sclr_reps, seed=config.seed,
            )

    def endpoints(self, method: str, theta_t, g):
        if method in ("UCI", "EICI", "IICI", "IITCI"):
            return self.kernel.endpoints(method, theta_t, g)
        crit = self.crit_lr if method == "LRCI" else self.crit_sclr
        return lr_interval_bounds(
            theta_t, g, crit, self.v_tt, self.cva, self.ava, self.n
        )


def simulate_grid(config: McConfig) -> list[CoverageRecord]:
    """Coverage and average length of each method over the truth grid.

    Returns one record per (grid point, method), grid-major.  Draws
    with non-finite endpoints are excluded from both averages and
    counted in ``failures``; for the supported configurations the
    count is zero.
    """
    evaluator = _MethodEvaluator(config)
    chol = np.linalg.cholesky(config.v_hat)
    records: list[CoverageRecord] = []
    for grid_index, theta2 in enumerate(np.asarray(config.theta2_grid, dtype=float)):
        rng = np.random.default_rng([config.seed, grid_index])
        draws = rng.standard_normal((config.reps, 2)) @ chol.T
        draws[:, 1] += theta2
        theta_t = draws[:, 0]
        g = config.constraint.value(draws)
        for method in config.methods:
            lower, upper = evaluator.endpoints(method, theta_t, g)
            ok = np.isfinite(lower) & np.isfinite(upper)
            failures = int(config.reps - np.count_nonzero(ok))
            if failures:
                lower, upper = lower[ok], upper[ok]
            covered = (lower <= 0.0) & (0.0 <= upper)
            records.append(
                CoverageRecord(
                    theta2=float(theta2),
                    method=method,
                    cp=float(np.mean(covered)),
                    al=float(np.mean(upper - lower)),
                    failures=failures,
                )
            )
    return records


def panel_a_curves(
    config: McConfig, theta2_values, theta1_hat: float = 0.0
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Interval endpoints as functions of the estimated second coordinate.

    Sweeps ``theta_hat = (theta1_hat, t2)`` over ``theta2_values`` and
    returns, per method, the lower and upper endpoint curves.  These
    curves show the geometry of each interval: where it matches the
    usual interval, where it tracks the equality-imposed one, and where
    the endpoints switch.
    """
    evaluator = _MethodEvaluator(config)
    t2 = np.asarray(theta2_values, dtype=float)
    theta = np.column_stack([np.full(t2.shape, float(theta1_hat)), t2])
    g = config.constraint.value(theta)
    theta_t = theta[:, 0]
    curves: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for method in config.methods:
        lower, upper = evaluator.endpoints(method, theta_t, g)
        curves[method] = (np.asarray(lower, float), np.asarray(upper, float))
    return curves


def _write_rows(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(header + "\n")
        for row in rows:
            handle.write(",".join(f"{value:.6f}" for value in row) + "\n")


def write_cp_al_csv(records: list[CoverageRecord], out_dir) -> list[Path]:
    """Write one ``<METHOD>_CP_AL.csv`` per method, 6-decimal fixed point.

    Columns ``theta2,CP,AL`` in the grid order of the records.  Output
    is byte-identical across runs of the same configuration.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    methods = []
    for record in records:
        if record.method not in methods:
            methods.append(record.method)
    for method in methods:
        path = out / f"{method}_CP_AL.csv"
        rows = [
            (record.theta2, record.cp, record.al)
            for record in records
            if record.method == method
        ]
        _write_rows(path, "theta2,CP,AL", rows)
        paths.append(path)
    return paths


def write_panel_csv(
    curves: dict[str, tuple[np.ndarray, np.ndarray]], theta2_values, out_dir
) -> list[Path]:
    """Write one ``<METHOD>.csv`` per method with endpoint curves.

    Columns ``theta2,lower,upper``, 6-decimal fixed point.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t2 = np.asarray(theta2_values, dtype=float)
    paths = []
    for method, (lower, upper) in curves.items():
        path = out / f"{method}.csv"
        _write_rows(path, "theta2,lower,upper", zip(t2, lower, upper))
        paths.append(path)
    return paths
