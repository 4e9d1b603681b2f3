"""Endpoint geometry of the adaptive interval.

Sweeps the estimated constraint value through the switching zone and
prints how each endpoint of the inequality-imposed interval moves
between its usual and equality-imposed counterparts.  Also evaluates
the transition threshold two algebraically equivalent ways to show why
the shipped form is the numerically stable one.
"""

import numpy as np

import ineqci as iq


def main() -> None:
    level = iq.Level(0.05)
    constraint = iq.LinearConstraint(a=np.array([0.0, 1.0]), b=0.0)
    v_hat = np.array([[1.0, 0.7], [0.7, 1.0]])

    probe = iq.EstimateSummary(np.zeros(2), v_hat, n=1)
    threshold = iq.transition_threshold(probe, constraint, level)
    print(f"transition threshold on g = a'theta_hat + b: {threshold:.6f}")
    print("the interval switches endpoint sources at g = -threshold (upper)")
    print("and g = +threshold (lower):\n")

    header = f"{'g':>6} {'branch':>12} {'lower':>10} {'upper':>10}   endpoints"
    print(header)
    for g in np.round(np.arange(-1.2, 1.3, 0.2), 10):
        estimate = iq.EstimateSummary(np.array([0.0, g]), v_hat, n=1)
        res = iq.iici(estimate, constraint, level)
        usual = iq.uci(estimate, level)
        source = (
            ("UCI" if abs(res.lower - usual.lower) < 1e-12 else "EICI")
            + "/"
            + ("UCI" if abs(res.upper - usual.upper) < 1e-12 else "EICI")
        )
        print(f"{g:>6.1f} {res.branch:>12} {res.lower:>10.4f} {res.upper:>10.4f}   {source}")

    print("\nfar beyond the zone the interval can separate from the usual one:")
    estimate = iq.EstimateSummary(np.array([0.0, 8.0]), v_hat, n=1)
    res = iq.iici(estimate, constraint, level)
    print(f"g=8: [{res.lower:.4f}, {res.upper:.4f}]  disjoint_from_uci={res.disjoint_from_uci}")

    print("\nthreshold stability near a vanishing covariance:")
    z = level.z
    for cva in (1e-2, 1e-5, 1e-8):
        v = np.array([[1.0, cva], [cva, 1.0]])
        probe = iq.EstimateSummary(np.zeros(2), v, n=1)
        stable = iq.transition_threshold(probe, constraint, level)
        se = 1.0
        se_eq = np.sqrt(1.0 - cva * cva)
        naive = (1.0 / cva) * (se - se_eq) * z  # cancels catastrophically
        print(f"  cva={cva:<8.0e} stable={stable:.12e}  subtraction form={naive:.12e}")


if __name__ == "__main__":
    main()
