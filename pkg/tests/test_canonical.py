"""Canonical reduction, acceptance region, rotation, and quadrature."""

import numpy as np
import pytest

import ineqci as iq
from ineqci.canonical import ReductionState, _slice_probability
from ineqci.intervals import IntervalKernel

Z95 = 1.959963984540054
LVL = iq.Level(0.05)


def kernel_covers_zero(state: ReductionState, level=LVL):
    """Coverage of zero by the interval engine at a reduction stage."""
    est_v = np.asarray(state.v, dtype=float)
    con = iq.LinearConstraint(a=state.a, b=state.b)
    kernel = IntervalKernel.from_problem(est_v, state.n, con, level)
    g = con.value(state.theta)
    lo, up = kernel.iici_endpoints(state.theta[..., 0], g)
    return (lo <= 0.0) & (0.0 <= up)


def random_state(rng, k=3, draws=200):
    root = rng.normal(size=(k, k))
    v = root @ root.T + 0.05 * np.eye(k)
    a = rng.normal(size=k)
    while abs(v[0] @ a) < 0.05 * np.sqrt(v[0, 0] * (a @ v @ a)):
        a = rng.normal(size=k)
    truth = rng.normal(size=k)
    b = -float(a @ truth) - float(rng.uniform(0.0, 1.0))
    n = float(rng.choice([1, 25, 400]))
    chol = np.linalg.cholesky(v)
    theta = truth + rng.standard_normal((draws, k)) @ chol.T / np.sqrt(n)
    return ReductionState(theta=theta, v=v, n=n, a=a, b=b), truth


class TestCanonicalProblem:
    def test_rejects_bad_parameters(self):
        with pytest.raises(iq.EstimateValidationError):
            iq.CanonicalProblem(a1=-0.6, a2=0.8, b=0.0)
        with pytest.raises(iq.EstimateValidationError):
            iq.CanonicalProblem(a1=0.5, a2=0.5, b=0.0)
        with pytest.raises(iq.EstimateValidationError):
            iq.CanonicalProblem(a1=0.6, a2=0.8, b=0.1)

    def test_constraint_roundtrip(self):
        p = iq.CanonicalProblem(a1=0.6, a2=0.8, b=-0.5)
        con = p.constraint()
        assert np.allclose(con.a, [0.6, 0.8])
        assert con.b == -0.5


class TestCanonicalize:
    def test_running_example(self, example_estimate, nuisance_constraint):
        problem, theta = iq.canonicalize(
            example_estimate, nuisance_constraint, theta_true=np.zeros(2)
        )
        assert problem.a1 == pytest.approx(0.7, abs=1e-14)
        assert problem.a2 == pytest.approx(np.sqrt(0.51), abs=1e-14)
        assert problem.b == 0.0
        assert theta[0] == pytest.approx(0.0, abs=1e-14)
        assert theta[1] == pytest.approx(2.0 / np.sqrt(0.51), abs=1e-12)

    def test_canonical_problem_is_fixed_point(self):
        p = iq.CanonicalProblem(a1=0.6, a2=0.8, b=-0.4)
        draw = np.array([0.3, -1.1])
        est = p.estimate(draw)
        truth = np.array([0.0, 0.0])  # slack: b = -0.4 <= 0
        again, theta = iq.canonicalize(est, p.constraint(), truth)
        assert again.a1 == pytest.approx(p.a1, abs=1e-12)
        assert again.a2 == pytest.approx(p.a2, abs=1e-12)
        assert again.b == pytest.approx(p.b, abs=1e-12)
        assert np.allclose(theta, draw, atol=1e-12)

    def test_uncorrelated_target_not_reducible(self):
        est = iq.EstimateSummary(np.zeros(2), np.eye(2), 1)
        con = iq.LinearConstraint(a=np.array([0.0, 1.0]), b=0.0)
        with pytest.raises(iq.NotReducibleError):
            iq.canonicalize(est, con, np.zeros(2))

    def test_violating_truth_rejected(self, example_estimate, nuisance_constraint):
        with pytest.raises(iq.EstimateValidationError, match="violates"):
            iq.canonicalize(example_estimate, nuisance_constraint, np.array([0.0, 0.5]))

    def test_roundoff_violation_clipped(self, example_estimate, nuisance_constraint):
        problem, _ = iq.canonicalize(
            example_estimate, nuisance_constraint, np.array([0.0, 1e-13])
        )
        assert problem.b == 0.0


class TestReductionSteps:
    def test_center_preserves_slack_and_coverage(self):
        rng = np.random.default_rng(0)
        state, truth = random_state(rng)
        centered = iq.center_at_truth(state, truth)
        assert np.allclose(
            state.theta @ state.a + state.b,
            centered.theta @ centered.a + centered.b,
            atol=1e-10,
        )
        assert centered.b <= 1e-10
        # coverage of the truth's target becomes coverage of zero
        est_con = iq.LinearConstraint(a=state.a, b=state.b)
        kernel = IntervalKernel.from_problem(state.v, state.n, est_con, LVL)
        lo, up = kernel.iici_endpoints(state.theta[..., 0], est_con.value(state.theta))
        before = (lo <= truth[0]) & (truth[0] <= up)
        after = kernel_covers_zero(centered)
        assert np.array_equal(before, after)

    def test_collapse_preserves_kernel_and_slack(self):
        rng = np.random.default_rng(1)
        state, truth = random_state(rng)
        centered = iq.center_at_truth(state, truth)
        collapsed = iq.collapse_to_plane(centered)
        # target coordinate and slack of every draw carried over exactly
        assert np.array_equal(collapsed.theta[..., 0], centered.theta[..., 0])
        assert np.allclose(
            centered.theta @ centered.a + centered.b,
            collapsed.theta @ collapsed.a + collapsed.b,
            atol=1e-10,
        )
        k_before = IntervalKernel.from_problem(
            centered.v, centered.n, iq.LinearConstraint(a=centered.a, b=centered.b), LVL
        )
        k_after = IntervalKernel.from_problem(
            collapsed.v, collapsed.n, iq.LinearConstraint(a=collapsed.a, b=collapsed.b), LVL
        )
        assert k_after.se == pytest.approx(k_before.se, rel=1e-12)
        assert k_after.se_eq == pytest.approx(k_before.se_eq, rel=1e-12)
        assert k_after.threshold == pytest.approx(k_before.threshold, rel=1e-12)
        assert np.array_equal(kernel_covers_zero(centered), kernel_covers_zero(collapsed))

    def test_collapse_requires_correlation(self):
        state = ReductionState(
            theta=np.zeros((4, 2)), v=np.eye(2), n=1.0, a=np.array([0.0, 1.0]), b=0.0
        )
        with pytest.raises(iq.NotReducibleError):
            iq.collapse_to_plane(state)

    def test_standardize_and_orient(self):
        rng = np.random.default_rng(2)
        state, truth = random_state(rng)
        collapsed = iq.collapse_to_plane(iq.center_at_truth(state, truth))
        scaled = iq.standardize_scale(collapsed)
        assert np.allclose(scaled.v, np.eye(2), atol=1e-12)
        assert scaled.n == 1.0
        assert np.allclose(
            collapsed.theta @ collapsed.a + collapsed.b,
            scaled.theta @ scaled.a + scaled.b,
            atol=1e-10,
        )
        assert np.array_equal(kernel_covers_zero(collapsed), kernel_covers_zero(scaled))

        oriented = iq.orient_direction(scaled)
        assert oriented.a[0] > 0.0
        assert np.hypot(*oriented.a) == pytest.approx(1.0, abs=1e-12)
        assert np.array_equal(kernel_covers_zero(scaled), kernel_covers_zero(oriented))

    def test_reduce_state_end_to_end(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            state, truth = random_state(rng, draws=500)
            problem, reduced = iq.reduce_state(state, truth)
            est_con = iq.LinearConstraint(a=state.a, b=state.b)
            kernel = IntervalKernel.from_problem(state.v, state.n, est_con, LVL)
            lo, up = kernel.iici_endpoints(
                state.theta[..., 0], est_con.value(state.theta)
            )
            before = (lo <= truth[0]) & (truth[0] <= up)
            after = iq.coverage_indicator(problem, LVL, reduced.theta)
            assert np.array_equal(before, after)


class TestAcceptanceRegion:
    def test_bounds_at_diagonal_direction(self):
        p = iq.CanonicalProblem(a1=2**-0.5, a2=2**-0.5, b=0.0)
        lb, ub = iq.acceptance_bounds(p, LVL, 0.0)
        assert ub == pytest.approx(2.771807648699356, abs=1e-12)
        assert lb == pytest.approx(-Z95, abs=1e-12)

    def test_flat_segments_far_out(self):
        p = iq.CanonicalProblem(a1=0.6, a2=0.8, b=-0.3)
        lb, ub = iq.acceptance_bounds(p, LVL, -50.0)
        assert lb == pytest.approx(-Z95, abs=1e-12)
        assert ub == pytest.approx(Z95, abs=1e-12)

    def test_slanted_segments_far_in(self):
        p = iq.CanonicalProblem(a1=0.6, a2=0.8, b=0.0)
        theta2 = 40.0
        slant = (0.6 / 0.8) * theta2
        lb, ub = iq.acceptance_bounds(p, LVL, theta2)
        assert lb == pytest.approx(slant - Z95 / 0.8, abs=1e-12)
        assert ub == pytest.approx(slant + Z95 / 0.8, abs=1e-12)

    def test_matches_engine_on_grid(self, example_estimate, nuisance_constraint):
        problem, _ = iq.canonicalize(example_estimate, nuisance_constraint, np.zeros(2))
        grid = np.linspace(-6.0, 6.0, 101)
        t1, t2 = np.meshgrid(grid, grid)
        draws = np.stack([t1, t2], axis=-1)
        by_region = iq.coverage_indicator(problem, LVL, draws)
        state = ReductionState(
            theta=draws, v=np.eye(2), n=1.0,
            a=np.array([problem.a1, problem.a2]), b=problem.b,
        )
        assert np.array_equal(by_region, kernel_covers_zero(state))


class TestRotation:
    def test_omega_is_symmetric_involution(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            a2 = float(rng.uniform(0.01, 0.99))
            a1 = float(np.sqrt(1.0 - a2 * a2))
            rot = iq.Rotation.for_slope(a2)
            omega = rot.omega
            assert np.allclose(omega, omega.T, atol=1e-15)
            assert np.allclose(omega @ omega, np.eye(2), atol=1e-12)
            # the defining algebra of the straightening direction
            assert abs(a1 * rot.y - a2 * rot.x - rot.x) <= 1e-12
            assert abs(a1 * rot.x + a2 * rot.y - rot.y) <= 1e-12

    def test_indicator_matches_region_when_offset_free(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a2 = float(rng.uniform(0.05, 0.95))
            p = iq.CanonicalProblem(a1=float(np.sqrt(1 - a2 * a2)), a2=a2, b=0.0)
            draws = rng.normal(size=(2000, 2)) * 2.5
            assert np.array_equal(
                iq.rotation_indicator(p, LVL, draws),
                iq.coverage_indicator(p, LVL, draws),
            )

    def test_requires_zero_offset(self):
        p = iq.CanonicalProblem(a1=0.6, a2=0.8, b=-0.1)
        with pytest.raises(iq.EstimateValidationError):
            iq.rotation_indicator(p, LVL, np.zeros(2))

    def test_far_nuisance_exits_band(self):
        p = iq.CanonicalProblem(a1=0.6, a2=0.8, b=0.0)
        assert not iq.rotation_indicator(p, LVL, np.array([0.0, 50.0]))


class TestBandProbability:
    def test_diagonal_pair(self):
        assert iq.band_probability(2**-0.5, 2**-0.5, 0.05) == pytest.approx(
            0.95, abs=1e-10
        )

    def test_tilted_pair(self):
        assert iq.band_probability(0.1, np.sqrt(0.99), 0.10) == pytest.approx(
            0.90, abs=1e-10
        )

    def test_degenerate_alpha(self):
        assert iq.band_probability(0.6, 0.8, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_identity_over_random_triples(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            x = float(rng.uniform(0.02, 0.98))
            y = float(np.sqrt(1.0 - x * x))
            alpha = float(rng.uniform(0.01, 0.5))
            assert iq.band_probability(x, y, alpha) == pytest.approx(
                1.0 - alpha, abs=1e-9
            )

    def test_domain_errors(self):
        with pytest.raises(iq.EstimateValidationError):
            iq.band_probability(0.0, 1.0, 0.05)
        with pytest.raises(iq.EstimateValidationError):
            iq.band_probability(0.5, 0.5, 0.05)
        with pytest.raises(iq.EstimateValidationError):
            iq.band_probability(0.6, 0.8, 0.0)


class TestShiftedCoverage:
    def test_equality_at_zero_shift(self):
        for a2 in (0.2, 2**-0.5, 0.95):
            p = iq.CanonicalProblem(a1=float(np.sqrt(1 - a2 * a2)), a2=a2, b=0.0)
            assert iq.shifted_coverage_curve(p, LVL, 0.0) == pytest.approx(
                0.95, abs=1e-9
            )

    def test_floor_bump_and_far_limit(self):
        p = iq.CanonicalProblem(a1=0.7, a2=float(np.sqrt(0.51)), b=0.0)
        mu = np.linspace(0.0, 6.0, 40)
        curve = iq.shifted_coverage_curve(p, LVL, mu)
        assert np.all(curve >= 0.95 - 1e-9)
        assert np.max(curve) > 0.951  # strict over-coverage at interior shifts
        far = iq.shifted_coverage_curve(p, LVL, 12.0)
        assert far == pytest.approx(0.95, abs=1e-9)

    def test_truth_mapping(self):
        p = iq.CanonicalProblem(a1=0.6, a2=0.8, b=-0.4)
        t2 = -1.3
        mu = -(p.a2 * t2 + p.b) / p.a2
        direct = iq.acceptance_probability(p, LVL, t2)
        assert direct == pytest.approx(
            float(iq.shifted_coverage_curve(p, LVL, mu)), abs=1e-12
        )

    def test_slice_probability_shape(self):
        p = iq.CanonicalProblem(a1=0.7, a2=float(np.sqrt(0.51)), b=0.0)
        z = LVL.z
        kink = z * (1.0 - p.a2) / p.a1
        flat = _slice_probability(p, z, np.linspace(kink, kink + 6, 50))
        assert np.allclose(flat, 0.95, atol=1e-12)
        left = _slice_probability(p, z, np.linspace(-12.0, -kink, 200))
        assert np.all(np.diff(left) >= -1e-12)
        assert _slice_probability(p, z, -kink) == pytest.approx(
            float(np.max(_slice_probability(p, z, np.linspace(-3, 3, 601)))), abs=1e-6
        )

    def test_monte_carlo_agrees_at_boundary(self):
        p = iq.CanonicalProblem(a1=0.7, a2=float(np.sqrt(0.51)), b=0.0)
        rng = np.random.default_rng(7)
        draws = rng.standard_normal((200_000, 2))
        cp = float(np.mean(iq.coverage_indicator(p, LVL, draws)))
        se = np.sqrt(0.95 * 0.05 / draws.shape[0])
        assert abs(cp - 0.95) <= 3.0 * se
