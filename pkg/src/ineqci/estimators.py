"""Regression front ends producing estimate summaries from data tables.

Both estimators return an :class:`~ineqci.core.EstimateSummary` whose
``v_hat`` estimates the covariance of ``sqrt(n) (theta_hat - theta)``,
matching the scale convention of the interval routines.  Data arrive as
a pandas DataFrame with named columns; all column references are by
name.

The GMM estimator targets the use case where the inequality concerns
endogeneity: alongside the coefficient moments it stacks, for chosen
regressors, the moment ``E[x_i eps_i] - gamma = 0``.  The extra
coordinates ``gamma`` estimate the regressor/error covariances, so a
sign restriction on an endogeneity parameter becomes a linear
inequality on the stacked parameter vector and the interval machinery
applies unchanged.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .core import (
    ConstraintOnTargetError,
    DegenerateConstraintError,
    EstimateSummary,
    EstimateValidationError,
    LinearConstraint,
)

__all__ = [
    "GmmSpec",
    "WeakInstrumentsWarning",
    "constraint_from_spec",
    "iv_gmm_with_endogeneity",
    "ols",
]

# Columns of the design matrix are considered collinear when the
# smallest singular value falls below this fraction of the largest.
_RANK_RTOL = 1e-10


class WeakInstrumentsWarning(UserWarning):
    """First-stage relationship close to rank deficient (diagnostic only)."""


def _design(data: pd.DataFrame, columns: list[str], label: str) -> np.ndarray:
    missing = [c for c in columns if c not in data.columns]
    if missing:
        raise EstimateValidationError(
            f"{label} column(s) {missing} not in data; available: {list(data.columns)}"
        )
    block = data[columns].to_numpy(dtype=float)
    if not np.all(np.isfinite(block)):
        raise EstimateValidationError(f"{label} columns contain non-finite values")
    return block


def _cluster_ids(data: pd.DataFrame, cluster: str) -> np.ndarray:
    if cluster not in data.columns:
        raise EstimateValidationError(f"cluster column {cluster!r} not in data")
    codes, uniques = pd.factorize(data[cluster], sort=True)
    if len(uniques) < 2:
        raise DegenerateConstraintError(
            f"cluster column {cluster!r} has a single distinct value"
        )
    return codes


def _moment_outer(scores: np.ndarray, cluster_codes: np.ndarray | None) -> np.ndarray:
    """Sum of outer products of per-observation (or per-cluster) scores."""
    if cluster_codes is None:
        return scores.T @ scores
    groups = np.zeros((int(cluster_codes.max()) + 1, scores.shape[1]))
    np.add.at(groups, cluster_codes, scores)
    return groups.T @ groups


def ols(
    data: pd.DataFrame,
    dependent: str,
    regressors: list[str],
    add_intercept: bool = True,
    robust: bool = True,
    cluster: str | None = None,
    small_sample: bool = False,
) -> EstimateSummary:
    """Least squares with a sandwich covariance on the interval scale.

    Parameters
    ----------
    data : DataFrame
        Observations; referenced columns must be numeric and finite.
    dependent : str
        Name of the outcome column.
    regressors : list of str
        Names of the regressor columns.
    add_intercept : bool, optional
        Prepend a constant column named ``intercept``.
    robust : bool, optional
        Heteroskedasticity-robust covariance (default).  With ``False``
        the classical homoskedastic form is used.
    cluster : str, optional
        Column defining clusters; scores are summed within clusters
        before the outer product.  With every observation its own
        cluster this reproduces the robust covariance exactly.
    small_sample : bool, optional
        Apply the ``n / (n - k)`` correction (``G / (G - 1)`` with
        clustering).  Off by default; the choice is recorded by the
        caller, not inside the summary.

    Returns
    -------
    EstimateSummary
        ``theta_hat`` are the coefficients in column order (intercept
        first when requested), ``v_hat`` estimates the covariance of
        ``sqrt(n) (theta_hat - theta)``.
    """
    names = (["intercept"] if add_intercept else []) + list(regressors)
    if len(set(names)) != len(names):
        raise EstimateValidationError(f"duplicate regressor names in {names}")
    y = _design(data, [dependent], "dependent")[:, 0]
    x = _design(data, list(regressors), "regressor")
    if add_intercept:
        x = np.column_stack([np.ones(len(x)), x])
    n, k = x.shape
    if n <= k:
        raise EstimateValidationError(f"need more observations than regressors, n={n}, k={k}")

    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if s[-1] <= _RANK_RTOL * s[0]:
        raise EstimateValidationError(
            "design matrix is rank deficient (collinear regressors)"
        )
    beta = vt.T @ ((u.T @ y) / s)
    resid = y - x @ beta
    bread = vt.T @ (vt / (s * s)[:, None])  # (X'X)^{-1} without forming X'X

    codes = _cluster_ids(data, cluster) if cluster is not None else None
    if robust or codes is not None:
        meat = _moment_outer(x * resid[:, None], codes)
        v_hat = n * (bread @ meat @ bread)
        if small_sample:
            if codes is not None:
                groups = int(codes.max()) + 1
                v_hat = v_hat * (groups / (groups - 1))
            else:
                v_hat = v_hat * (n / (n - k))
    else:
        dof = (n - k) if small_sample else n
        sigma2 = float(resid @ resid) / dof
        v_hat = n * sigma2 * bread
    v_hat = (v_hat + v_hat.T) / 2.0
    return EstimateSummary(
        theta_hat=beta, v_hat=v_hat, n=n, target_index=0, names=tuple(names)
    )


@dataclass(frozen=True)
class GmmSpec:
    """Specification of the IV-GMM problem with endogeneity moments.

    ``endogeneity_targets`` selects the endogenous regressors whose
    error covariance ``gamma = E[x eps]`` is stacked into the parameter
    vector (named ``gamma_<column>``); ``None`` means all of them and
    an empty list produces plain IV-GMM.
    """

    dependent: str
    endogenous: list[str]
    instruments: list[str]
    exogenous: list[str] = field(default_factory=list)
    endogeneity_targets: list[str] | None = None
    add_intercept: bool = True
    cluster: str | None = None

    def __post_init__(self) -> None:
        if not self.endogenous:
            raise EstimateValidationError("at least one endogenous regressor is required")
        if not self.instruments:
            raise EstimateValidationError("at least one instrument is required")
        targets = self.endogeneity_targets
        if targets is not None:
            bad = [t for t in targets if t not in self.endogenous]
            if bad:
                raise EstimateValidationError(
                    f"endogeneity targets {bad} are not endogenous regressors"
                )


def iv_gmm_with_endogeneity(data: pd.DataFrame, spec: GmmSpec) -> EstimateSummary:
    """IV-GMM for the coefficients, stacked with endogeneity moments.

    Moment conditions, with ``eps = y - X beta - W delta``:

        E[z eps] = 0        (instruments, including exogenous regressors)
        E[x_T eps] - gamma = 0   (selected endogenous regressors T)

    ``(beta, delta)`` solve the instrument moments alone: exactly with
    as many instruments as coefficients, by two-step efficient GMM
    (first step two-stage least squares) otherwise.  ``gamma`` is then
    the sample mean of ``x_T eps`` at the residuals, so the stacking is
    exactly recursive: adding or removing endogeneity moments does not
    move the coefficient block or its covariance.

    The joint covariance comes from the influence function of the
    stacked estimator: with ``J`` the Jacobian of the instrument
    moments in the coefficients and ``K = -(J'WJ)^{-1} J'W``,

        sqrt(n) (est - true) ~ A sqrt(n) m_bar,
        A = [[K, 0], [J_gamma K, I]],   v_hat = A S A'

    where ``S`` is the outer-product estimate of the moment covariance
    (summed within clusters when requested) and ``J_gamma`` is the
    Jacobian of the endogeneity moments in the coefficients.

    Emits :class:`WeakInstrumentsWarning` when the first-stage
    coefficient matrix is numerically close to rank deficient.
    """
    y = _design(data, [spec.dependent], "dependent")[:, 0]
    x_endo = _design(data, list(spec.endogenous), "endogenous")
    z_excl = _design(data, list(spec.instruments), "instrument")
    w_exog = (
        _design(data, list(spec.exogenous), "exogenous")
        if spec.exogenous
        else np.empty((len(y), 0))
    )
    if spec.add_intercept:
        w_exog = np.column_stack([np.ones(len(y)), w_exog])
    exog_names = (["intercept"] if spec.add_intercept else []) + list(spec.exogenous)

    regressors = np.column_stack([x_endo, w_exog])
    instruments = np.column_stack([z_excl, w_exog])
    n, k_coef = regressors.shape
    n_inst = instruments.shape[1]
    if n_inst < k_coef:
        raise EstimateValidationError(
            f"under-identified: {n_inst} instrument columns for {k_coef} coefficients"
        )
    if n <= max(k_coef, n_inst):
        raise EstimateValidationError("not enough observations for the moment system")

    sv = np.linalg.svd(instruments, compute_uv=False)
    if sv[-1] <= _RANK_RTOL * sv[0]:
        raise EstimateValidationError("instrument matrix is rank deficient")

    first_stage = np.linalg.lstsq(instruments, x_endo, rcond=None)[0]
    pi_sv = np.linalg.svd(first_stage, compute_uv=False)
    if pi_sv[-1] <= 1e-6 * max(1.0, pi_sv[0]):
        warnings.warn(
            "first-stage coefficients are close to rank deficient; instruments "
            "may be weak",
            WeakInstrumentsWarning,
            stacklevel=2,
        )

    codes = _cluster_ids(data, spec.cluster) if spec.cluster is not None else None
    zr = instruments.T @ regressors  # n * J with opposite sign
    zy = instruments.T @ y

    if n_inst == k_coef:
        coef = np.linalg.solve(zr, zy)
        # K = -J^{-1}: weighting is irrelevant in the just-identified case.
        k_matrix = np.linalg.solve(zr / n, np.eye(n_inst))
    else:
        # First step: two-stage least squares.
        proj = instruments @ np.linalg.lstsq(instruments, regressors, rcond=None)[0]
        coef1 = np.linalg.lstsq(proj, y, rcond=None)[0]
        resid1 = y - regressors @ coef1
        s1 = _moment_outer(instruments * resid1[:, None], codes) / n
        s1_inv_zr = np.linalg.solve(s1, zr)
        gram = zr.T @ s1_inv_zr
        coef = np.linalg.solve(gram, s1_inv_zr.T @ zy)
        k_matrix = n * np.linalg.solve(gram, s1_inv_zr.T)

    resid = y - regressors @ coef

    targets = (
        list(spec.endogenous)
        if spec.endogeneity_targets is None
        else list(spec.endogeneity_targets)
    )
    x_t = x_endo[:, [spec.endogenous.index(t) for t in targets]]
    gamma = (x_t * resid[:, None]).mean(axis=0)

    moments = np.column_stack([instruments * resid[:, None], x_t * resid[:, None] - gamma])
    s_full = _moment_outer(moments, codes) / n

    j_gamma = -(x_t.T @ regressors) / n
    n_t = len(targets)
    a_top = np.hstack([k_matrix, np.zeros((k_coef, n_t))])
    a_bot = np.hstack([j_gamma @ k_matrix, np.eye(n_t)])
    a_full = np.vstack([a_top, a_bot])
    v_hat = a_full @ s_full @ a_full.T
    v_hat = (v_hat + v_hat.T) / 2.0

    theta = np.concatenate([coef, gamma])
    names = tuple(
        list(spec.endogenous) + exog_names + [f"gamma_{t}" for t in targets]
    )
    return EstimateSummary(
        theta_hat=theta, v_hat=v_hat, n=n, target_index=0, names=names
    )


_CONSTRAINT_RE = re.compile(
    r"^\s*([A-Za-z_][\w.]*)\s*(<=|>=)\s*([+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*$"
)


def constraint_from_spec(text: str, estimate: EstimateSummary) -> LinearConstraint:
    """Parse a one-sided bound like ``"gamma_x <= 0"`` into a constraint.

    The left side names a parameter of the estimate, the right side is
    a real constant (typically zero).  ``name <= c`` becomes the
    constraint with direction the name's basis vector and offset ``-c``;
    ``name >= c`` flips the sign.  Bounds on the target parameter are
    rejected: the interval machinery requires the inequality to involve
    a different coordinate.
    """
    match = _CONSTRAINT_RE.match(text)
    if match is None:
        raise EstimateValidationError(
            f"cannot parse constraint {text!r}; expected '<name> <= <number>' "
            "or '<name> >= <number>'"
        )
    name, op, bound = match.group(1), match.group(2), float(match.group(3))
    index = estimate.index_of(name)
    if index == estimate.target_index:
        raise ConstraintOnTargetError(
            f"constraint is on the target parameter {name!r}; bound a different "
            "coordinate or change the target"
        )
    a = np.zeros(estimate.k)
    if op == "<=":
        a[index] = 1.0
        b = -bound
    else:
        a[index] = -1.0
        b = bound
    return LinearConstraint(a=a, b=b)
