"""Shared types, normal helpers, validation, and serialization."""

import dataclasses
import math

import numpy as np
import pytest

import ineqci as iq


def quantile_by_bisection(p: float) -> float:
    """Independent normal quantile: bisection on the erf-based CDF."""
    lo, hi = -10.0, 10.0
    for _ in range(80):
        mid = (lo + hi) / 2.0
        if 0.5 * (1.0 + math.erf(mid / math.sqrt(2.0))) < p:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


class TestNormalHelpers:
    def test_quantile_matches_bisection_oracle(self):
        for p in np.linspace(0.001, 0.999, 97):
            assert abs(iq.normal_quantile(p) - quantile_by_bisection(p)) <= 1e-9

    def test_reference_values(self):
        assert iq.normal_quantile(0.5) == pytest.approx(0.0, abs=1e-15)
        assert iq.normal_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-12)
        assert iq.normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
        assert iq.normal_cdf(1.959963984540054) == pytest.approx(0.975, abs=1e-12)

    def test_roundtrip(self):
        p = np.linspace(0.01, 0.99, 23)
        assert np.max(np.abs(iq.normal_cdf(iq.normal_quantile(p)) - p)) <= 1e-12

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.7, np.nan])
    def test_quantile_domain(self, bad):
        with pytest.raises(ValueError):
            iq.normal_quantile(bad)

    def test_scalar_in_scalar_out(self):
        assert isinstance(iq.normal_quantile(0.3), float)
        assert isinstance(iq.normal_cdf(0.3), float)
        assert iq.normal_quantile(np.array([0.3, 0.7])).shape == (2,)


class TestLevel:
    def test_z_value(self):
        assert iq.Level(0.05).z == pytest.approx(1.959963984540054, abs=1e-12)
        assert iq.Level(0.10).z == pytest.approx(1.6448536269514722, abs=1e-12)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.05, 2.0])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            iq.Level(bad)

    def test_monotone_in_alpha(self):
        assert iq.Level(0.5).z < iq.Level(0.05).z


class TestEstimateSummary:
    def test_fields_are_readonly(self, example_estimate):
        with pytest.raises(ValueError):
            example_estimate.theta_hat[0] = 5.0
        with pytest.raises(ValueError):
            example_estimate.v_hat[0, 0] = 5.0

    def test_k_and_index_of(self, example_estimate):
        assert example_estimate.k == 2
        assert example_estimate.index_of("theta2") == 1
        with pytest.raises(iq.EstimateValidationError):
            example_estimate.index_of("nope")

    def test_index_of_requires_names(self):
        est = iq.EstimateSummary(np.zeros(2), np.eye(2), 1)
        with pytest.raises(iq.EstimateValidationError):
            est.index_of("theta1")

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(theta_hat=np.zeros(1), v_hat=np.eye(1), n=1),
            dict(theta_hat=np.zeros(2), v_hat=np.eye(3), n=1),
            dict(theta_hat=np.zeros(2), v_hat=np.eye(2), n=0),
            dict(theta_hat=np.zeros(2), v_hat=np.eye(2), n=1, target_index=2),
            dict(theta_hat=np.array([np.nan, 0.0]), v_hat=np.eye(2), n=1),
            dict(theta_hat=np.zeros(2), v_hat=np.eye(2), n=1, names=("a",)),
        ],
    )
    def test_rejects_malformed(self, kwargs):
        with pytest.raises(iq.EstimateValidationError):
            iq.EstimateSummary(**kwargs)


class TestLinearConstraint:
    def test_value_batches(self, nuisance_constraint):
        theta = np.array([[0.0, 2.0], [1.0, -3.0]])
        assert np.allclose(nuisance_constraint.value(theta), [2.0, -3.0])

    def test_rejects_nonfinite(self):
        with pytest.raises(iq.EstimateValidationError):
            iq.LinearConstraint(a=np.array([np.inf, 1.0]))
        with pytest.raises(iq.EstimateValidationError):
            iq.LinearConstraint(a=np.array([0.0, 1.0]), b=np.nan)


class TestValidate:
    def test_symmetrizes_within_tolerance(self, example_estimate, nuisance_constraint):
        v = example_estimate.v_hat.copy()
        v[0, 1] += 1e-12
        est = dataclasses.replace(example_estimate, v_hat=v)
        out, _ = iq.validate(est, nuisance_constraint)
        assert np.array_equal(out.v_hat, out.v_hat.T)
        again, _ = iq.validate(out, nuisance_constraint)
        assert np.array_equal(again.v_hat, out.v_hat)

    def test_rejects_gross_asymmetry(self, example_estimate, nuisance_constraint):
        v = example_estimate.v_hat.copy()
        v[0, 1] = 0.9
        est = dataclasses.replace(example_estimate, v_hat=v)
        with pytest.raises(iq.AsymmetricCovarianceError):
            iq.validate(est, nuisance_constraint)

    def test_rejects_indefinite(self, nuisance_constraint):
        est = iq.EstimateSummary(
            np.zeros(2), np.array([[1.0, 1.2], [1.2, 1.0]]), 1
        )
        with pytest.raises(iq.NonPositiveDefiniteError):
            iq.validate(est, nuisance_constraint)

    def test_rejects_constraint_on_target(self, example_estimate):
        con = iq.LinearConstraint(a=np.array([1.0, 0.0]))
        with pytest.raises(iq.ConstraintOnTargetError):
            iq.validate(example_estimate, con)

    def test_rejects_zero_direction(self, example_estimate):
        con = iq.LinearConstraint(a=np.zeros(2))
        with pytest.raises(iq.DegenerateConstraintError):
            iq.validate(example_estimate, con)

    def test_rejects_dimension_mismatch(self, example_estimate):
        con = iq.LinearConstraint(a=np.array([0.0, 1.0, 0.0]))
        with pytest.raises(iq.EstimateValidationError):
            iq.validate(example_estimate, con)

    def test_error_taxonomy_is_valueerror(self):
        assert issubclass(iq.EstimateValidationError, ValueError)
        for err in (
            iq.AsymmetricCovarianceError,
            iq.NonPositiveDefiniteError,
            iq.ConstraintOnTargetError,
            iq.DegenerateConstraintError,
        ):
            assert issubclass(err, iq.EstimateValidationError)


class TestJson:
    def test_roundtrip(self, example_estimate):
        text = iq.estimate_to_json(example_estimate, meta={"estimator": "test"})
        back = iq.estimate_from_json(text)
        assert np.array_equal(back.theta_hat, example_estimate.theta_hat)
        assert np.array_equal(back.v_hat, example_estimate.v_hat)
        assert back.n == example_estimate.n
        assert back.target_index == example_estimate.target_index
        assert back.names == example_estimate.names

    def test_roundtrip_without_names(self):
        est = iq.EstimateSummary(np.array([1.0, 2.0]), np.eye(2), 7, target_index=1)
        back = iq.estimate_from_json(iq.estimate_to_json(est))
        assert back.names is None
        assert back.target_index == 1

    def test_malformed_document(self):
        with pytest.raises(iq.EstimateValidationError, match="not valid JSON"):
            iq.estimate_from_json("{nope")
        with pytest.raises(iq.EstimateValidationError, match="v_hat"):
            iq.estimate_from_json('{"theta_hat": [0, 0], "n": 1}')
        with pytest.raises(iq.EstimateValidationError, match="JSON object"):
            iq.estimate_from_json("[1, 2]")
