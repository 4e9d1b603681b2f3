"""Likelihood-ratio style intervals under one linear inequality.

The statistic compares two constrained minimum distances in the
``v_hat``-inverse metric:

    LR(r) = n * [ Q(r, ineq) - Q(ineq) ]

where ``Q(ineq)`` minimizes ``(theta_hat - theta)' v_hat^{-1}
(theta_hat - theta)`` over the inequality set ``{a'theta + b <= 0}``
and ``Q(r, ineq)`` adds the restriction that the target coordinate
equals ``r``.  Both minima have closed forms because the sets are a
halfspace and a halfspace sliced by a hyperplane, so the statistic
depends on the draw only through the target coordinate and the
estimated slack.  ``LR`` is convex in ``r`` (partial minimization of a
convex quadratic over a convex set, jointly convex in ``(theta, r)``),
hence every level set is an interval.

Two intervals invert the statistic:

LRCI
    Inverts at the chi-squared(1) critical value.  Matches the usual
    interval under deep slack and the equality-imposed interval under
    deep violation, i.e. it adapts like the inequality-imposed interval
    but through the statistic rather than through explicit switching.
    At a binding truth its coverage can fall slightly below nominal.
SCLRCI
    Same statistic, critical value replaced by a simulated quantile of
    the statistic at the estimated boundary point, never below the
    chi-squared value.  Restores coverage at the price of a slightly
    longer interval.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import chi2

from .core import EstimateSummary, Level, LinearConstraint, NonPositiveDefiniteError
from .intervals import CiResult, _components, _geometry

__all__ = [
    "NonIntervalError",
    "lr_stat",
    "lrci",
    "sclr_critical_value",
    "sclrci",
]


class NonIntervalError(RuntimeError):
    """The inverted acceptance set failed the contiguity check.

    Convexity of the statistic makes this impossible for exact
    arithmetic; seeing it indicates a bug, not a property of the data.
    """


def _full_pd_check(estimate: EstimateSummary) -> None:
    try:
        np.linalg.cholesky(estimate.v_hat)
    except np.linalg.LinAlgError:
        raise NonPositiveDefiniteError(
            "likelihood-ratio methods require a positive definite v_hat"
        ) from None


def _lr_excess(theta_t, g, r, v_tt: float, cva: float, ava: float, n: float):
    """Vectorized LR statistic from the target coordinate and the slack.

    ``Q(ineq)`` moves theta_hat to the boundary only when the slack is
    positive, costing ``g^2 / ava``.  ``Q(r, ineq)`` first projects onto
    the hyperplane ``{theta_t = r}``; if the projected slack

        g_proj = g - (cva / v_tt) (theta_t - r)

    is nonpositive the hyperplane minimum already satisfies the
    inequality, otherwise both restrictions bind and the minimum is the
    quadratic form of ``(theta_t - r, g)`` in the inverse of their
    joint covariance.
    """
    theta_t = np.asarray(theta_t, dtype=float)
    g = np.asarray(g, dtype=float)
    r = np.asarray(r, dtype=float)
    resid = theta_t - r
    q_free = np.square(np.maximum(g, 0.0)) / ava
    g_proj = g - (cva / v_tt) * resid
    det = v_tt * ava - cva * cva
    q_line = np.square(resid) / v_tt
    q_both = (ava * np.square(resid) - 2.0 * cva * resid * g + v_tt * np.square(g)) / det
    value = n * (np.where(g_proj <= 0.0, q_line, q_both) - q_free)
    # Exact arithmetic gives a nonnegative statistic; wipe rounding dust.
    return np.maximum(value, 0.0)


def _lr_setup(estimate: EstimateSummary, constraint: LinearConstraint):
    _full_pd_check(estimate)
    estimate, constraint, v_tt, cva, ava = _geometry(estimate, constraint)
    t = estimate.target_index
    theta_t = float(estimate.theta_hat[t])
    g0 = float(constraint.value(estimate.theta_hat))
    return estimate, constraint, v_tt, cva, ava, theta_t, g0


def lr_stat(estimate: EstimateSummary, constraint: LinearConstraint, r):
    """LR statistic for the hypothesis that the target equals r.

    ``r`` may be a scalar or an array; the statistic is evaluated in
    closed form.  Zero at the minimizing r (the target coordinate of
    the inequality-imposed estimator) and convex in r.
    """
    estimate, constraint, v_tt, cva, ava, theta_t, g0 = _lr_setup(estimate, constraint)
    out = _lr_excess(theta_t, g0, r, v_tt, cva, ava, float(estimate.n))
    return float(out) if np.ndim(r) == 0 else out


def _expand_below(fn, x: float, step: float, crit: float) -> float:
    """Walk left from x until the statistic exceeds the critical value."""
    for _ in range(200):
        x -= step
        if fn(x) > crit:
            return x
        step *= 2.0
    raise NonIntervalError("acceptance set failed to close on the left")


def _expand_above(fn, x: float, step: float, crit: float) -> float:
    for _ in range(200):
        x += step
        if fn(x) > crit:
            return x
        step *= 2.0
    raise NonIntervalError("acceptance set failed to close on the right")


def _bisect_edge(fn, inside: float, outside: float, crit: float) -> float:
    """Refine the acceptance boundary between an inside and outside point."""
    for _ in range(200):
        mid = 0.5 * (inside + outside)
        if mid == inside or mid == outside:
            break
        if fn(mid) <= crit:
            inside = mid
        else:
            outside = mid
        if abs(outside - inside) <= 1e-10 * max(1.0, abs(inside), abs(outside)):
            break
    return 0.5 * (inside + outside)


def _invert(
    estimate: EstimateSummary,
    constraint: LinearConstraint,
    level: Level,
    crit: float,
    kind: str,
) -> CiResult:
    estimate, constraint, v_tt, cva, ava, theta_t, g0 = _lr_setup(estimate, constraint)
    n = float(estimate.n)
    se = float(np.sqrt(v_tt / n))

    def stat(r):
        return _lr_excess(theta_t, g0, r, v_tt, cva, ava, n)

    # Minimizer of the statistic: theta_hat target under slack, the
    # equality-imposed target under violation.  Always accepted.
    r0 = theta_t if g0 <= 0.0 else theta_t - (cva / ava) * g0
    grid = np.sort(np.append(np.linspace(theta_t - 10.0 * se, theta_t + 10.0 * se, 2001), r0))
    accepted = np.flatnonzero(stat(grid) <= crit)
    if accepted.size == 0:
        raise NonIntervalError("scan found no accepted point despite the minimizer")
    if accepted[-1] - accepted[0] + 1 != accepted.size:
        raise NonIntervalError("acceptance set is not contiguous on the scan grid")

    first, last = accepted[0], accepted[-1]
    if first == 0:
        left_out = _expand_below(stat, float(grid[0]), se, crit)
    else:
        left_out = float(grid[first - 1])
    if last == grid.size - 1:
        right_out = _expand_above(stat, float(grid[-1]), se, crit)
    else:
        right_out = float(grid[last + 1])

    lower = _bisect_edge(stat, float(grid[first]), left_out, crit)
    upper = _bisect_edge(stat, float(grid[last]), right_out, crit)
    _, comps, _ = _components(estimate, constraint, level)
    return CiResult(lower=float(lower), upper=float(upper), kind=kind, components=comps)


def lrci(
    estimate: EstimateSummary, constraint: LinearConstraint, level: Level
) -> CiResult:
    """Invert the LR statistic at the chi-squared(1) critical value.

    The acceptance set is located by a 2001-point scan over a bracket
    of ten standard errors around the target estimate (with the known
    minimizer inserted and the bracket expanded if the set touches its
    edge) and each boundary is refined by bisection well past the 1e-8
    scale.  A non-contiguous scan result raises, since convexity of the
    statistic rules it out.
    """
    crit = float(chi2.ppf(1.0 - level.alpha, df=1))
    return _invert(estimate, constraint, level, crit, "LRCI")


def sclr_critical_value(
    estimate: EstimateSummary,
    constraint: LinearConstraint,
    level: Level,
    reps: int = 100_000,
    seed: int = 0,
) -> float:
    """Simulated critical value for the LR statistic at a binding truth.

    Draws ``reps`` samples of the statistic under the least favorable
    point estimate, the equality-imposed estimator, testing its own
    target value.  The statistic depends on a draw only through the
    pair (target coordinate, slack), whose law under a boundary truth
    is bivariate normal with covariance known from ``v_hat``; only that
    pair is simulated.  Because the pair's law at a boundary point does
    not depend on where on the boundary the truth sits, the returned
    value is a function of ``(v_hat, n, alpha, seed, reps)`` only.

    Returns the empirical ``1 - alpha`` quantile, floored at the
    chi-squared(1) critical value.  The floor never binds in
    population, where the quantile at a binding truth weakly exceeds
    chi-squared, and keeps the finite-simulation value from dipping
    below it by sampling noise, so the size-corrected interval always
    contains the plain LR interval.  Deterministic given ``seed``: the
    draws come from a single counter-based (Philox) block keyed by the
    seed, so the value does not depend on execution order or worker
    count.
    """
    if reps < 1:
        raise ValueError(f"reps must be positive, got {reps!r}")
    estimate, constraint, v_tt, cva, ava, _, _ = _lr_setup(estimate, constraint)
    n = float(estimate.n)
    cov = np.array([[v_tt, cva], [cva, ava]]) / n
    chol = np.linalg.cholesky(cov)
    rng = np.random.Generator(np.random.Philox(key=seed))
    pair = rng.standard_normal((int(reps), 2)) @ chol.T
    # Boundary truth: target residual centered at zero, slack centered at zero.
    stats = _lr_excess(pair[:, 0], pair[:, 1], 0.0, v_tt, cva, ava, n)
    quantile = float(np.quantile(stats, 1.0 - level.alpha))
    return max(quantile, float(chi2.ppf(1.0 - level.alpha, df=1)))


def sclrci(
    estimate: EstimateSummary,
    constraint: LinearConstraint,
    level: Level,
    reps: int = 100_000,
    seed: int = 0,
) -> CiResult:
    """Invert the LR statistic at the simulated critical value.

    Size-corrected version of :func:`lrci`; same statistic and same
    inversion, larger critical value.  The result always contains the
    plain LR interval.
    """
    crit = sclr_critical_value(estimate, constraint, level, reps=reps, seed=seed)
    return _invert(estimate, constraint, level, crit, "SCLRCI")


def lr_interval_bounds(
    theta_t, g, crit, v_tt: float, cva: float, ava: float, n: float
):
    """Closed-form endpoints of ``{r: LR(r) <= crit}``, vectorized.

    Used for bulk evaluation over draw arrays, where scanning per draw
    would be wasteful.  The statistic is piecewise quadratic in r with
    a single breakpoint where the projected slack changes sign, so each
    piece inverts to an interval intersected with the piece's domain
    and convexity glues the pieces.  Agrees with the scan-and-bisect
    inversion to the bisection tolerance; the test suite checks that.
    """
    theta_t = np.asarray(theta_t, dtype=float)
    g = np.asarray(g, dtype=float)
    theta_t, g = np.broadcast_arrays(theta_t, g)
    n_q0 = n * np.square(np.maximum(g, 0.0)) / ava
    var_eq = (v_tt * ava - cva * cva) / ava
    eie_t = theta_t - (cva / ava) * g

    # Piece through the unconstrained hyperplane projection.
    h_line = np.sqrt((crit + n_q0) * v_tt / n)
    lo_line = theta_t - h_line
    hi_line = theta_t + h_line
    # Piece where both restrictions bind.
    rhs = crit - n * np.square(np.minimum(g, 0.0)) / ava
    with np.errstate(invalid="ignore"):
        h_both = np.sqrt(np.maximum(rhs, 0.0) * var_eq / n)
    lo_both = eie_t - h_both
    hi_both = eie_t + h_both
    both_empty = rhs < 0.0

    if cva == 0.0:
        # The breakpoint disappears; either piece alone covers the line
        # and both reduce to the same centered interval.
        return lo_line, hi_line

    breakpoint_r = theta_t - g * v_tt / cva
    if cva > 0.0:
        # Projected slack increases in r: hyperplane piece to the left.
        lo_line_c = lo_line
        hi_line_c = np.minimum(hi_line, breakpoint_r)
        lo_both_c = np.maximum(lo_both, breakpoint_r)
        hi_both_c = hi_both
    else:
        lo_line_c = np.maximum(lo_line, breakpoint_r)
        hi_line_c = hi_line
        lo_both_c = lo_both
        hi_both_c = np.minimum(hi_both, breakpoint_r)

    line_empty = lo_line_c > hi_line_c
    both_empty = both_empty | (lo_both_c > hi_both_c)
    if np.any(line_empty & both_empty):
        raise NonIntervalError("both inversion pieces empty for some draw")
    gap = np.where(
        ~line_empty & ~both_empty,
        np.maximum(lo_line_c, lo_both_c) - np.minimum(hi_line_c, hi_both_c),
        0.0,
    )
    if np.any(gap > 1e-9 * max(1.0, float(np.sqrt(v_tt / n)))):
        raise NonIntervalError("inversion pieces do not meet; acceptance set not an interval")

    lower = np.where(
        line_empty, lo_both_c, np.where(both_empty, lo_line_c, np.minimum(lo_line_c, lo_both_c))
    )
    upper = np.where(
        line_empty, hi_both_c, np.where(both_empty, hi_line_c, np.maximum(hi_line_c, hi_both_c))
    )
    return lower, upper
