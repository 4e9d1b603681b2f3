import numpy as np
import pytest

import ineqci as iq

# Records (number, description, passed, detail) tuples from the
# acceptance tests so the run can print one summary line per criterion.
_ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def record_criterion(number: int, description: str, passed: bool, detail: str = ""):
    _ACCEPTANCE.append((number, description, bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number:2d}: {description}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


@pytest.fixture
def example_estimate():
    """The running two-parameter example: unit variances, 0.7 covariance."""
    return iq.EstimateSummary(
        theta_hat=np.array([0.0, 2.0]),
        v_hat=np.array([[1.0, 0.7], [0.7, 1.0]]),
        n=1,
        names=("theta1", "theta2"),
    )


@pytest.fixture
def nuisance_constraint():
    """theta2 <= 0 in the two-parameter example."""
    return iq.LinearConstraint(a=np.array([0.0, 1.0]), b=0.0)


@pytest.fixture
def level05():
    return iq.Level(0.05)
