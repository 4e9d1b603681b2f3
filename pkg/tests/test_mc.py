"""Monte Carlo grid experiments: determinism, coverage, and file output."""

import re

import numpy as np
import pytest
from scipy.stats import norm

import ineqci as iq
from ineqci.mc import METHODS, CoverageRecord, McConfig, panel_a_curves, simulate_grid, write_cp_al_csv, write_panel_csv

Z95 = norm.ppf(0.975)
SE_EQ = np.sqrt(0.51)
THRESHOLD = Z95 * 0.7 / (1.0 + SE_EQ)


def small_config(**overrides):
    base = dict(
        theta2_grid=np.array([-5.0, -1.0, 0.0]),
        reps=20_000,
        seed=0,
        methods=("UCI", "EICI", "IICI"),
    )
    base.update(overrides)
    return McConfig(**base)


class TestMcConfig:
    def test_defaults(self):
        config = McConfig()
        assert config.theta2_grid.shape == (51,)
        assert config.theta2_grid[0] == -5.0
        assert config.theta2_grid[-1] == 0.0
        assert config.reps == 100_000
        assert config.methods == ("UCI", "EICI", "IICI")
        assert config.level.alpha == 0.05

    def test_rejects_unknown_method(self):
        with pytest.raises(ValueError, match="unknown methods"):
            McConfig(methods=("UCI", "WALD"))

    def test_rejects_bad_reps_and_alpha(self):
        with pytest.raises(ValueError, match="reps"):
            McConfig(reps=0)
        with pytest.raises(ValueError, match="alpha"):
            McConfig(alpha=1.2)


class TestSimulateGrid:
    def test_deterministic(self):
        config = small_config()
        first = simulate_grid(config)
        second = simulate_grid(config)
        assert first == second

    def test_replicates_documented_draw_convention(self):
        """Recompute one record from the documented rng recipe."""
        config = small_config(methods=("UCI",), reps=5_000)
        records = simulate_grid(config)
        chol = np.linalg.cholesky(config.v_hat)
        for grid_index, theta2 in enumerate(config.theta2_grid):
            rng = np.random.default_rng([config.seed, grid_index])
            draws = rng.standard_normal((config.reps, 2)) @ chol.T
            draws[:, 1] += theta2
            lower = draws[:, 0] - Z95
            upper = draws[:, 0] + Z95
            cp = float(np.mean((lower <= 0.0) & (0.0 <= upper)))
            al = float(np.mean(upper - lower))
            record = records[grid_index]
            assert record.method == "UCI" and record.theta2 == theta2
            assert record.cp == cp
            assert record.al == pytest.approx(al, abs=1e-12)

    def test_uci_covers_at_nominal_everywhere(self):
        records = simulate_grid(small_config())
        for record in records:
            if record.method == "UCI":
                se = np.sqrt(0.95 * 0.05 / 20_000)
                assert abs(record.cp - 0.95) < 4 * se
                assert record.al == pytest.approx(2 * Z95, abs=1e-12)

    def test_eici_coverage_matches_quadrature_oracle(self):
        """At truth theta2=-1 the equality-imposed coverage has a closed form."""
        records = simulate_grid(small_config(reps=100_000))
        record = next(
            r for r in records if r.method == "EICI" and r.theta2 == -1.0
        )
        mu = 0.7  # mean of the equality-imposed target estimate
        exact = float(norm.cdf(Z95 - mu / SE_EQ) - norm.cdf(-Z95 - mu / SE_EQ))
        assert exact == pytest.approx(0.8347594422352717, abs=1e-15)
        se = np.sqrt(exact * (1 - exact) / 100_000)
        assert abs(record.cp - exact) < 4 * se

    def test_iici_matches_uci_deep_in_slack_region(self):
        records = simulate_grid(small_config())
        at_minus5 = {r.method: r for r in records if r.theta2 == -5.0}
        assert at_minus5["IICI"].cp == at_minus5["UCI"].cp
        assert at_minus5["IICI"].al == pytest.approx(at_minus5["UCI"].al, abs=1e-12)

    def test_common_draws_preserve_containment_orderings(self):
        config = small_config(
            theta2_grid=np.array([0.0]),
            methods=("UCI", "EICI", "IICI", "IITCI", "LRCI", "SCLRCI"),
            reps=10_000,
            sclr_reps=20_000,
        )
        by_method = {r.method: r for r in simulate_grid(config)}
        assert by_method["IITCI"].cp >= by_method["IICI"].cp
        assert by_method["IITCI"].al >= by_method["IICI"].al
        assert by_method["SCLRCI"].cp >= by_method["LRCI"].cp
        assert by_method["SCLRCI"].al >= by_method["LRCI"].al

    def test_no_failures(self):
        records = simulate_grid(small_config())
        assert all(record.failures == 0 for record in records)


class TestPanelCurves:
    def setup_method(self):
        self.config = small_config(methods=("UCI", "EICI", "IICI", "IITCI"))
        self.t2 = np.round(np.arange(-30, 61) * 0.1, 10)
        self.curves = panel_a_curves(self.config, self.t2)

    def test_methods_and_shapes(self):
        assert tuple(self.curves) == self.config.methods
        for lower, upper in self.curves.values():
            assert lower.shape == self.t2.shape
            assert np.all(lower <= upper)

    def test_uci_flat_and_eici_affine(self):
        lower, upper = self.curves["UCI"]
        assert np.ptp(lower) == 0.0 and np.ptp(upper) == 0.0
        lower, upper = self.curves["EICI"]
        slopes = np.diff(upper) / np.diff(self.t2)
        assert slopes == pytest.approx(-0.7, abs=1e-9)
        assert upper - lower == pytest.approx(2 * Z95 * SE_EQ, abs=1e-12)

    def test_iici_upper_switches_at_negative_threshold(self):
        _, upper = self.curves["IICI"]
        flat = self.t2 <= -THRESHOLD - 1e-9
        sloped = self.t2 >= -THRESHOLD + 1e-9
        assert np.ptp(upper[flat]) == 0.0
        assert upper[flat][0] == pytest.approx(Z95, abs=1e-12)
        slopes = np.diff(upper[sloped]) / np.diff(self.t2[sloped])
        assert slopes == pytest.approx(-0.7, abs=1e-9)
        # continuity at the switch point itself
        joined = panel_a_curves(self.config, np.array([-THRESHOLD]))
        assert joined["IICI"][1][0] == pytest.approx(Z95, abs=1e-9)

    def test_iici_lower_switches_at_positive_threshold(self):
        lower, _ = self.curves["IICI"]
        flat = self.t2 <= THRESHOLD - 1e-9
        assert np.ptp(lower[flat]) == 0.0
        assert lower[flat][0] == pytest.approx(-Z95, abs=1e-12)

    def test_frozen_violated_upper_endpoint(self):
        curves = panel_a_curves(self.config, np.array([6.0]))
        assert curves["IICI"][1][0] == pytest.approx(-2.800305748188554, abs=1e-12)
        assert curves["EICI"][1][0] == pytest.approx(-2.800305748188554, abs=1e-12)

    def test_iitci_contains_iici_pointwise(self):
        lo_i, up_i = self.curves["IICI"]
        lo_t, up_t = self.curves["IITCI"]
        assert np.all(lo_t <= lo_i + 1e-12)
        assert np.all(up_t >= up_i - 1e-12)


class TestCsvOutput:
    def test_cp_al_files_byte_identical(self, tmp_path):
        config = small_config(reps=2_000)
        records = simulate_grid(config)
        first = write_cp_al_csv(records, tmp_path / "a")
        second = write_cp_al_csv(simulate_grid(config), tmp_path / "b")
        assert [p.name for p in first] == ["UCI_CP_AL.csv", "EICI_CP_AL.csv", "IICI_CP_AL.csv"]
        for p1, p2 in zip(first, second):
            assert p1.read_bytes() == p2.read_bytes()

    def test_cp_al_format(self, tmp_path):
        records = [
            CoverageRecord(theta2=-1.0, method="UCI", cp=0.9512345678, al=3.9199279691),
        ]
        (path,) = write_cp_al_csv(records, tmp_path)
        lines = path.read_text().splitlines()
        assert lines[0] == "theta2,CP,AL"
        assert lines[1] == "-1.000000,0.951235,3.919928"
        assert all(re.fullmatch(r"-?\d+\.\d{6}(,-?\d+\.\d{6}){2}", s) for s in lines[1:])

    def test_panel_roundtrip(self, tmp_path):
        config = small_config(methods=("UCI", "IICI"))
        t2 = np.array([-2.0, 0.0, 2.0])
        curves = panel_a_curves(config, t2)
        paths = write_panel_csv(curves, t2, tmp_path)
        for path, method in zip(paths, ("UCI", "IICI")):
            data = np.loadtxt(path, delimiter=",", skiprows=1)
            assert np.array_equal(data[:, 0], t2)
            assert data[:, 1] == pytest.approx(np.round(curves[method][0], 6), abs=5e-7)
            assert data[:, 2] == pytest.approx(np.round(curves[method][1], 6), abs=5e-7)

    def test_all_methods_supported(self):
        assert METHODS == ("UCI", "EICI", "IICI", "IITCI", "LRCI", "SCLRCI")
