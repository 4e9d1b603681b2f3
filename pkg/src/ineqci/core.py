"""Shared types and validation for inequality-aware confidence intervals.

Every routine in this package consumes an estimate summary: a point
estimate ``theta_hat`` for a parameter vector theta, a matrix ``v_hat``
estimating the asymptotic covariance of ``sqrt(n) * (theta_hat - theta)``,
and the sample size ``n``.  Standard errors therefore scale like
``sqrt(v_hat[i, i] / n)``.  A single linear inequality ``a'theta + b <= 0``
restricts the parameter space, and the component of interest is
``theta_hat[target_index]``.

The inequality must involve at least one coordinate other than the
target.  A restriction on the target alone calls for truncating the
interval rather than recentering it, a different problem, and is
rejected during validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "AsymmetricCovarianceError",
    "ConstraintOnTargetError",
    "DegenerateConstraintError",
    "EstimateSummary",
    "EstimateValidationError",
    "Level",
    "LinearConstraint",
    "NonPositiveDefiniteError",
    "SmoothConstraint",
    "estimate_from_json",
    "estimate_to_json",
    "normal_cdf",
    "normal_quantile",
    "validate",
]

# Relative tolerance for accepting v_hat as symmetric.  Asymmetry within
# the tolerance is averaged away; anything larger is treated as a sign
# that the caller assembled the matrix incorrectly.
SYMMETRY_RTOL = 1e-8

# A constraint direction whose off-target mass is below this relative
# tolerance is considered parallel to the target axis.
PARALLEL_RTOL = 1e-12


class EstimateValidationError(ValueError):
    """Base class for rejected estimate or constraint inputs."""


class AsymmetricCovarianceError(EstimateValidationError):
    """v_hat differs from its transpose beyond the accepted tolerance."""


class NonPositiveDefiniteError(EstimateValidationError):
    """v_hat is not positive definite on the directions the method uses."""


class ConstraintOnTargetError(EstimateValidationError):
    """The inequality restricts only the target parameter."""


class DegenerateConstraintError(EstimateValidationError):
    """The constraint direction is zero or has negligible variance."""


def normal_quantile(p):
    """Quantile function of the standard normal distribution.

    Parameters
    ----------
    p : float or array_like
        Probability, strictly between 0 and 1.

    Returns
    -------
    float or ndarray
        The value x with ``normal_cdf(x) == p``.

    Raises
    ------
    ValueError
        If any entry of ``p`` lies outside the open interval (0, 1).
    """
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ValueError(f"normal_quantile requires 0 < p < 1, got {p!r}")
    out = ndtri(arr)
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


def normal_cdf(x):
    """Standard normal distribution function, vectorized."""
    arr = np.asarray(x, dtype=float)
    out = ndtr(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


@dataclass(frozen=True)
class Level:
    """Two-sided confidence level expressed through its miscoverage alpha.

    ``z`` is the usual two-sided critical value, the ``1 - alpha/2``
    standard normal quantile.
    """

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")

    @property
    def z(self) -> float:
        return normal_quantile(1.0 - self.alpha / 2.0)


def _readonly(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class EstimateSummary:
    """Point estimate, scaled covariance estimate, and sample size.

    Parameters
    ----------
    theta_hat : ndarray, shape (k,)
        Estimated parameter vector, k >= 2.
    v_hat : ndarray, shape (k, k)
        Estimate of the asymptotic covariance of
        ``sqrt(n) * (theta_hat - theta)``.
    n : int
        Number of observations behind the estimate.
    target_index : int, optional
        Position of the parameter of interest within ``theta_hat``.
        Defaults to the first coordinate.
    names : tuple of str, optional
        Parameter names, used for display and for referring to
        coordinates in constraint specifications.
    """

    theta_hat: np.ndarray
    v_hat: np.ndarray
    n: int
    target_index: int = 0
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        theta = np.atleast_1d(np.asarray(self.theta_hat, dtype=float))
        v = np.asarray(self.v_hat, dtype=float)
        if theta.ndim != 1 or theta.size < 2:
            raise EstimateValidationError(
                f"theta_hat must be a vector of length >= 2, got shape {theta.shape}"
            )
        k = theta.size
        if v.shape != (k, k):
            raise EstimateValidationError(
                f"v_hat must have shape ({k}, {k}), got {v.shape}"
            )
        if not np.all(np.isfinite(theta)) or not np.all(np.isfinite(v)):
            raise EstimateValidationError("theta_hat and v_hat must be finite")
        if int(self.n) < 1:
            raise EstimateValidationError(f"n must be a positive integer, got {self.n!r}")
        if not 0 <= int(self.target_index) < k:
            raise EstimateValidationError(
                f"target_index must lie in [0, {k - 1}], got {self.target_index!r}"
            )
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != k:
                raise EstimateValidationError(
                    f"names must have length {k}, got {len(names)}"
                )
            object.__setattr__(self, "names", names)
        object.__setattr__(self, "theta_hat", _readonly(theta))
        object.__setattr__(self, "v_hat", _readonly(v))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "target_index", int(self.target_index))

    @property
    def k(self) -> int:
        return self.theta_hat.size

    def index_of(self, name: str) -> int:
        """Position of a named parameter; raises if names are absent."""
        if self.names is None:
            raise EstimateValidationError(
                "estimate carries no parameter names; refer to coordinates by index"
            )
        try:
            return self.names.index(name)
        except ValueError:
            raise EstimateValidationError(
                f"unknown parameter name {name!r}; available: {', '.join(self.names)}"
            ) from None


@dataclass(frozen=True)
class LinearConstraint:
    """One linear inequality ``a'theta + b <= 0`` on the parameter vector."""

    a: np.ndarray
    b: float = 0.0

    def __post_init__(self) -> None:
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        if a.ndim != 1:
            raise EstimateValidationError(f"a must be a vector, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or not np.isfinite(self.b):
            raise EstimateValidationError("constraint coefficients must be finite")
        object.__setattr__(self, "a", _readonly(a))
        object.__setattr__(self, "b", float(self.b))

    def value(self, theta: np.ndarray):
        """Evaluate ``a'theta + b``; theta may carry leading batch axes."""
        return np.asarray(theta, dtype=float) @ self.a + self.b


@dataclass(frozen=True)
class SmoothConstraint:
    """One smooth inequality ``g(theta) <= 0`` to be linearized at theta_hat.

    Parameters
    ----------
    g : callable
        Maps a parameter vector to a real number.
    grad : callable, optional
        Gradient of ``g``.  When absent the gradient is approximated by
        central differences with per-coordinate step
        ``fd_step * max(1, |theta_i|)``.
    fd_step : float, optional
        Base finite-difference step.  Defaults to the cube root of
        machine epsilon, which balances truncation and rounding error
        for central differences.
    """

    g: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    fd_step: float | None = None

    def __post_init__(self) -> None:
        if self.fd_step is not None and not self.fd_step > 0.0:
            raise EstimateValidationError(
                f"fd_step must be positive, got {self.fd_step!r}"
            )

    def value(self, theta: np.ndarray) -> float:
        return float(self.g(np.asarray(theta, dtype=float)))


def validate(
    estimate: EstimateSummary, constraint: LinearConstraint
) -> tuple[EstimateSummary, LinearConstraint]:
    """Check an estimate/constraint pair and return the validated pair.

    The returned estimate has an exactly symmetric ``v_hat`` (asymmetry
    within ``SYMMETRY_RTOL`` of the matrix scale is averaged away).  The
    check is idempotent: validating the returned pair again is a no-op.

    Raises
    ------
    AsymmetricCovarianceError
        If ``v_hat`` differs from its transpose beyond tolerance.
    DegenerateConstraintError
        If ``a`` is the zero vector.
    ConstraintOnTargetError
        If ``a`` is parallel to the target axis, so the inequality
        restricts only the parameter of interest.
    NonPositiveDefiniteError
        If ``v_hat`` fails to be positive definite on the plane spanned
        by the target axis and the constraint direction.
    EstimateValidationError
        If the constraint dimension does not match the estimate.
    """
    v = estimate.v_hat
    a = constraint.a
    if a.size != estimate.k:
        raise EstimateValidationError(
            f"constraint has dimension {a.size}, estimate has {estimate.k}"
        )

    scale = np.max(np.abs(v))
    asym = np.max(np.abs(v - v.T))
    if asym > SYMMETRY_RTOL * max(scale, 1e-300):
        raise AsymmetricCovarianceError(
            f"v_hat asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL:.1e} * scale {scale:.3e}"
        )
    if asym > 0.0:
        estimate = replace(estimate, v_hat=(v + v.T) / 2.0)
        v = estimate.v_hat

    norm_a = float(np.linalg.norm(a))
    if norm_a == 0.0:
        raise DegenerateConstraintError("constraint direction a is the zero vector")
    t = estimate.target_index
    off_target = np.delete(a, t)
    if float(np.linalg.norm(off_target)) <= PARALLEL_RTOL * norm_a:
        raise ConstraintOnTargetError(
            "constraint direction is parallel to the target axis; the inequality "
            "must involve at least one other coordinate"
        )

    e_t = np.zeros(estimate.k)
    e_t[t] = 1.0
    basis = np.column_stack([e_t, a])
    m = basis.T @ v @ basis
    # Leading-minor test on the 2x2 Gram matrix of the two directions.
    if not (m[0, 0] > 0.0 and m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] > 0.0):
        raise NonPositiveDefiniteError(
            "v_hat is not positive definite on the plane spanned by the target "
            f"axis and the constraint direction (Gram matrix {m.tolist()})"
        )
    return estimate, constraint


def estimate_to_json(
    estimate: EstimateSummary, meta: Mapping[str, object] | None = None
) -> str:
    """Serialize an estimate summary to a JSON document."""
    doc: dict[str, object] = {
        "names": list(estimate.names) if estimate.names is not None else None,
        "theta_hat": estimate.theta_hat.tolist(),
        "v_hat": estimate.v_hat.tolist(),
        "n": estimate.n,
        "target_index": estimate.target_index,
    }
    if meta:
        doc["meta"] = dict(meta)
    return json.dumps(doc, indent=2)


def estimate_from_json(text: str) -> EstimateSummary:
    """Parse an estimate summary from the JSON layout of estimate_to_json."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise EstimateValidationError(f"estimate document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise EstimateValidationError("estimate document must be a JSON object")
    for key in ("theta_hat", "v_hat", "n"):
        if key not in doc:
            raise EstimateValidationError(f"estimate document missing field {key!r}")
    names = doc.get("names")
    return EstimateSummary(
        theta_hat=np.asarray(doc["theta_hat"], dtype=float),
        v_hat=np.asarray(doc["v_hat"], dtype=float),
        n=doc["n"],
        target_index=doc.get("target_index", 0),
        names=tuple(names) if names else None,
    )
