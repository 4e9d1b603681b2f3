"""Confidence intervals that exploit one inequality on nuisance parameters.

Setting: ``theta_hat`` is asymptotically normal for theta, ``v_hat``
estimates the covariance of ``sqrt(n) * (theta_hat - theta)``, and the
truth is known to satisfy ``a'theta + b <= 0`` where the restriction
involves at least one coordinate besides the target.  Write

* ``se``   for the usual standard error of the target coordinate,
  ``sqrt(v_tt / n)`` with ``v_tt`` the target diagonal entry of v_hat;
* ``g``    for the estimated slack ``a'theta_hat + b``;
* ``se_eq`` for the standard error of the target coordinate after the
  restriction is imposed with equality.

The module constructs five intervals around the target coordinate:

UCI
    Usual confidence interval ``theta_hat_t -+ se * z``.  Valid but
    ignores the restriction entirely.
EICI
    Equality-imposed confidence interval.  The equality-imposed
    estimator (EIE) projects theta_hat onto the boundary hyperplane
    ``a'theta + b = 0`` in the metric of ``v_hat`` inverse, which
    shortens the standard error to ``se_eq``.  Valid only when the
    restriction truly binds.
IICI
    Inequality-imposed confidence interval.  Each endpoint switches
    from the usual to the equality-imposed value once the estimated
    slack ``g`` crosses a transition threshold calibrated so that the
    switch can only be triggered by evidence strong enough to protect
    coverage: the interval is never longer than the UCI, shrinks to the
    EICI when the data indicate a binding restriction, and keeps
    asymptotic coverage at least the nominal level for every admissible
    truth.
IITCI
    Inequality-imposed translated confidence interval: the UCI
    translated to sit around the inequality-imposed estimator (IIE),
    which equals theta_hat while the restriction holds at theta_hat and
    the EIE otherwise.  Same length as the UCI and always contains the
    IICI.
LRCI / SCLRCI
    Likelihood-ratio style intervals, built in :mod:`ineqci.lr`.

All switching uses weak inequalities: the lower endpoint takes its
usual value when ``g <= threshold`` and the upper endpoint when
``g <= -threshold``.  The threshold is computed in the algebraically
equivalent form ``z * cva / (n * (se + se_eq))`` (``cva`` being the
covariance between the target coordinate and the constraint direction),
which stays finite and continuous as ``cva`` approaches zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ConstraintOnTargetError,
    DegenerateConstraintError,
    EstimateSummary,
    EstimateValidationError,
    Level,
    LinearConstraint,
    NonPositiveDefiniteError,
    SmoothConstraint,
    validate,
)

__all__ = [
    "CiComponents",
    "CiResult",
    "IntervalKernel",
    "eici",
    "eie",
    "iici",
    "iie",
    "iitci",
    "linearize",
    "transition_threshold",
    "uci",
]

# The constraint direction must carry non-negligible variance relative
# to the overall scale of v_hat, otherwise the projection is undefined.
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class CiComponents:
    """Ingredients of the inequality-aware intervals at a given level.

    Attributes
    ----------
    se : float
        Usual standard error of the target coordinate.
    se_eq : float
        Standard error of the target coordinate of the equality-imposed
        estimator.  Never exceeds ``se``.
    threshold : float
        Transition threshold for the estimated slack.  Shares the sign
        of the covariance between target coordinate and constraint
        direction, and is zero when that covariance is zero.
    g_value : float
        Estimated slack ``a'theta_hat + b``.
    eie : ndarray
        Equality-imposed estimator, the projection of ``theta_hat``
        onto the boundary hyperplane in the v_hat-inverse metric.
    """

    se: float
    se_eq: float
    threshold: float
    g_value: float
    eie: np.ndarray


@dataclass(frozen=True)
class CiResult:
    """A confidence interval with its construction diagnostics.

    ``branch`` records which endpoint rule fired for the IICI (and, by
    the sign of the slack, for the IITCI):

    * ``"slack"``: both endpoints usual, the interval equals the UCI;
    * ``"mixed_upper"``: the upper endpoint switched to its
      equality-imposed value;
    * ``"mixed_lower"``: the lower endpoint switched;
    * ``"violated"``: both endpoints equality-imposed, the interval
      equals the EICI.

    ``disjoint_from_uci`` flags the (diagnostically interesting) event
    that the interval shares no point with the UCI, which can happen
    when the estimated slack is far on the violated side.
    """

    lower: float
    upper: float
    kind: str
    components: CiComponents | None = None
    branch: str | None = None
    disjoint_from_uci: bool = False

    @property
    def length(self) -> float:
        return self.upper - self.lower


def _geometry(estimate: EstimateSummary, constraint: LinearConstraint):
    """Validate and extract the scalars the interval formulas need."""
    estimate, constraint = validate(estimate, constraint)
    v = estimate.v_hat
    a = constraint.a
    t = estimate.target_index
    v_tt = float(v[t, t])
    cva = float(v[t] @ a)
    ava = float(a @ v @ a)
    if ava <= DEGENERATE_RTOL * float(np.trace(v)):
        raise DegenerateConstraintError(
            f"constraint direction variance a'Va = {ava:.3e} is negligible "
            f"relative to trace(v_hat) = {float(np.trace(v)):.3e}"
        )
    return estimate, constraint, v_tt, cva, ava


@dataclass(frozen=True)
class IntervalKernel:
    """Endpoint formulas for a fixed problem, vectorized over draws.

    The kernel freezes everything that depends only on ``(v_hat, n,
    constraint, level)``.  Endpoints then depend on a draw only through
    the target coordinate and the estimated slack, so one kernel serves
    both the scalar public functions and bulk evaluation over draw or
    grid arrays.
    """

    se: float
    se_eq: float
    threshold: float
    shift: float  # displacement of the EIE target per unit of slack, cva / ava
    z: float

    @classmethod
    def from_problem(
        cls,
        v_hat: np.ndarray,
        n: int,
        constraint: LinearConstraint,
        level: Level,
        target_index: int = 0,
    ) -> "IntervalKernel":
        probe = EstimateSummary(
            theta_hat=np.zeros(constraint.a.size), v_hat=v_hat, n=n,
            target_index=target_index,
        )
        _, _, v_tt, cva, ava = _geometry(probe, constraint)
        var_eq = (v_tt * ava - cva * cva) / ava
        if not var_eq > 0.0:
            raise NonPositiveDefiniteError(
                "v_hat is singular on the target/constraint plane"
            )
        se = float(np.sqrt(v_tt / n))
        se_eq = float(np.sqrt(var_eq / n))
        return cls(
            se=se,
            se_eq=se_eq,
            threshold=level.z * cva / (n * (se + se_eq)),
            shift=cva / ava,
            z=level.z,
        )

    def eie_target(self, theta_t, g):
        return theta_t - self.shift * g

    def uci_endpoints(self, theta_t):
        half = self.se * self.z
        return theta_t - half, theta_t + half

    def eici_endpoints(self, theta_t, g):
        center = self.eie_target(theta_t, g)
        half = self.se_eq * self.z
        return center - half, center + half

    def iici_endpoints(self, theta_t, g):
        lo_u, up_u = self.uci_endpoints(theta_t)
        lo_e, up_e = self.eici_endpoints(theta_t, g)
        lower = np.where(g <= self.threshold, lo_u, lo_e)
        upper = np.where(g <= -self.threshold, up_u, up_e)
        return lower, upper

    def iie_target(self, theta_t, g):
        return np.where(g <= 0.0, theta_t, self.eie_target(theta_t, g))

    def iitci_endpoints(self, theta_t, g):
        center = self.iie_target(theta_t, g)
        half = self.se * self.z
        return center - half, center + half

    def endpoints(self, kind: str, theta_t, g):
        """Endpoints for one of UCI, EICI, IICI, IITCI."""
        try:
            fn = {
                "UCI": lambda: self.uci_endpoints(theta_t),
                "EICI": lambda: self.eici_endpoints(theta_t, g),
                "IICI": lambda: self.iici_endpoints(theta_t, g),
                "IITCI": lambda: self.iitci_endpoints(theta_t, g),
            }[kind]
        except KeyError:
            raise ValueError(f"unknown interval kind {kind!r}") from None
        return fn()


def _components(
    estimate: EstimateSummary, constraint: LinearConstraint, level: Level
) -> tuple[EstimateSummary, CiComponents, IntervalKernel]:
    estimate, constraint, v_tt, cva, ava = _geometry(estimate, constraint)
    kernel = IntervalKernel.from_problem(
        estimate.v_hat, estimate.n, constraint, level, estimate.target_index
    )
    g0 = float(constraint.value(estimate.theta_hat))
    eie_vec = estimate.theta_hat - (estimate.v_hat @ constraint.a) * (g0 / ava)
    comps = CiComponents(
        se=kernel.se,
        se_eq=kernel.se_eq,
        threshold=kernel.threshold,
        g_value=g0,
        eie=eie_vec,
    )
    return estimate, comps, kernel


def _finish(lower, upper, kind, comps, branch=None, uci_bounds=None) -> CiResult:
    lower = float(lower)
    upper = float(upper)
    if not lower < upper:
        raise RuntimeError(
            f"internal error: degenerate {kind} endpoints [{lower}, {upper}]"
        )
    disjoint = False
    if uci_bounds is not None:
        disjoint = upper < uci_bounds[0] or lower > uci_bounds[1]
    return CiResult(
        lower=lower, upper=upper, kind=kind, components=comps,
        branch=branch, disjoint_from_uci=disjoint,
    )


def uci(estimate: EstimateSummary, level: Level) -> CiResult:
    """Usual confidence interval for the target coordinate.

    Two-sided interval ``theta_hat_t -+ z * sqrt(v_tt / n)``.  Uses no
    constraint information.
    """
    t = estimate.target_index
    v_tt = float(estimate.v_hat[t, t])
    if not v_tt > 0.0:
        raise NonPositiveDefiniteError(
            f"target variance v_hat[{t}, {t}] = {v_tt!r} must be positive"
        )
    half = level.z * float(np.sqrt(v_tt / estimate.n))
    center = float(estimate.theta_hat[t])
    return _finish(center - half, center + half, "UCI", None)


def eie(estimate: EstimateSummary, constraint: LinearConstraint) -> np.ndarray:
    """Equality-imposed estimator.

    Projects ``theta_hat`` onto the hyperplane ``a'theta + b = 0`` in
    the v_hat-inverse metric:

        eie = theta_hat - v_hat a (a' v_hat a)^{-1} (a' theta_hat + b)

    The projection satisfies the constraint with equality and, among
    all points on the hyperplane, minimizes the quadratic distance
    weighted by the inverse covariance.
    """
    estimate, constraint, _, _, ava = _geometry(estimate, constraint)
    g0 = float(constraint.value(estimate.theta_hat))
    return estimate.theta_hat - (estimate.v_hat @ constraint.a) * (g0 / ava)


def iie(estimate: EstimateSummary, constraint: LinearConstraint) -> np.ndarray:
    """Inequality-imposed estimator.

    Equals ``theta_hat`` when the estimate already satisfies the
    inequality and the equality-imposed estimator otherwise, that is,
    the projection of ``theta_hat`` onto ``{a'theta + b <= 0}`` in the
    v_hat-inverse metric.
    """
    estimate, constraint, _, _, ava = _geometry(estimate, constraint)
    g0 = float(constraint.value(estimate.theta_hat))
    if g0 <= 0.0:
        return np.array(estimate.theta_hat, copy=True)
    return estimate.theta_hat - (estimate.v_hat @ constraint.a) * (g0 / ava)


def transition_threshold(
    estimate: EstimateSummary, constraint: LinearConstraint, level: Level
) -> float:
    """Slack level at which the IICI endpoints switch formulas.

    Computed as ``z * cva / (n * (se + se_eq))`` where ``cva`` is the
    covariance between the target coordinate and the constraint
    direction.  This form is algebraically identical to
    ``(cva)^{-1} (a' v_hat a)(se - se_eq) z`` whenever ``cva`` is
    nonzero but remains exact and continuous at ``cva = 0``, where the
    threshold vanishes.
    """
    _, comps, _ = _components(estimate, constraint, level)
    return comps.threshold


def eici(
    estimate: EstimateSummary, constraint: LinearConstraint, level: Level
) -> CiResult:
    """Equality-imposed confidence interval.

    Centered at the target coordinate of the equality-imposed estimator
    with half-length ``z * se_eq``.  Has asymptotic coverage ``1 -
    alpha`` only when the restriction binds at the truth; under strict
    slack its coverage can fall arbitrarily low.
    """
    estimate, comps, kernel = _components(estimate, constraint, level)
    t = estimate.target_index
    lo, up = kernel.eici_endpoints(estimate.theta_hat[t], comps.g_value)
    return _finish(lo, up, "EICI", comps)


def iici(
    estimate: EstimateSummary, constraint: LinearConstraint, level: Level
) -> CiResult:
    """Inequality-imposed confidence interval.

    Each endpoint switches from its usual to its equality-imposed value
    based on the estimated slack ``g`` and the transition threshold
    ``c``: the lower endpoint is usual when ``g <= c`` and the upper
    endpoint is usual when ``g <= -c``.  The result is never longer
    than the UCI, equals it when the slack evidence is strong, equals
    the EICI when the violation evidence is strong, and has asymptotic
    coverage at least ``1 - alpha`` under every truth satisfying the
    inequality.
    """
    estimate, comps, kernel = _components(estimate, constraint, level)
    t = estimate.target_index
    g0 = comps.g_value
    c = comps.threshold
    lo, up = kernel.iici_endpoints(estimate.theta_hat[t], g0)
    lower_usual = g0 <= c
    upper_usual = g0 <= -c
    if lower_usual and upper_usual:
        branch = "slack"
    elif lower_usual:
        branch = "mixed_upper"
    elif upper_usual:
        branch = "mixed_lower"
    else:
        branch = "violated"
    return _finish(
        lo, up, "IICI", comps, branch,
        uci_bounds=kernel.uci_endpoints(float(estimate.theta_hat[t])),
    )


def iitci(
    estimate: EstimateSummary, constraint: LinearConstraint, level: Level
) -> CiResult:
    """Inequality-imposed translated confidence interval.

    The usual interval translated to center on the inequality-imposed
    estimator.  Keeps the UCI length, contains the IICI, and retains
    asymptotic coverage at least ``1 - alpha`` under the inequality.
    """
    estimate, comps, kernel = _components(estimate, constraint, level)
    t = estimate.target_index
    lo, up = kernel.iitci_endpoints(estimate.theta_hat[t], comps.g_value)
    branch = "slack" if comps.g_value <= 0.0 else "violated"
    return _finish(lo, up, "IITCI", comps, branch)


def linearize(estimate: EstimateSummary, smooth: SmoothConstraint) -> LinearConstraint:
    """Linearize a smooth inequality ``g(theta) <= 0`` at theta_hat.

    Returns the linear constraint with direction equal to the gradient
    of ``g`` at ``theta_hat`` and offset chosen so the linear slack
    matches ``g(theta_hat)`` exactly:

        a = grad g(theta_hat),   b = g(theta_hat) - a' theta_hat.

    When no gradient callable is supplied the gradient is approximated
    by central differences with per-coordinate step
    ``fd_step * max(1, |theta_i|)``.
    """
    theta = np.asarray(estimate.theta_hat, dtype=float)
    g0 = smooth.value(theta)
    if smooth.grad is not None:
        grad = np.asarray(smooth.grad(theta), dtype=float)
        if grad.shape != theta.shape:
            raise EstimateValidationError(
                f"gradient has shape {grad.shape}, expected {theta.shape}"
            )
    else:
        h = smooth.fd_step if smooth.fd_step is not None else float(np.cbrt(np.finfo(float).eps))
        grad = np.empty_like(theta)
        for i in range(theta.size):
            step = h * max(1.0, abs(theta[i]))
            hi = theta.copy()
            lo = theta.copy()
            hi[i] += step
            lo[i] -= step
            grad[i] = (smooth.value(hi) - smooth.value(lo)) / (2.0 * step)
    gnorm = float(np.linalg.norm(grad))
    if gnorm <= 1e-12 * max(1.0, abs(g0)):
        raise DegenerateConstraintError(
            f"gradient norm {gnorm:.3e} at theta_hat is too small to define "
            "a constraint direction"
        )
    t = estimate.target_index
    off_target = np.delete(grad, t)
    if float(np.linalg.norm(off_target)) <= 1e-12 * gnorm:
        raise ConstraintOnTargetError(
            "gradient at theta_hat is parallel to the target axis"
        )
    b = g0 - float(grad @ theta)
    return LinearConstraint(a=grad, b=b)
