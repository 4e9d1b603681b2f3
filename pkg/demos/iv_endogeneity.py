"""Sign-restricted endogeneity in an instrumented regression.

Simulates a design where the regressor of interest is endogenous with a
known sign: the omitted driver raises both the regressor and the
outcome, so gamma = E[x * eps] >= 0.  GMM with a stacked endogeneity
moment estimates gamma alongside the slope, the sign restriction
becomes a linear inequality on the stacked parameter vector, and the
adaptive interval for the slope tightens accordingly.

Command line equivalent:

    ineqci iv --data sim.csv --dependent y --endogenous x \
        --instruments z --constraint "gamma_x >= 0"
"""

import numpy as np
import pandas as pd

import ineqci as iq


def simulate(n: int, seed: int, confounding: float) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    z = rng.normal(size=n)
    confounder = rng.normal(size=n)
    x = 0.9 * z + confounding * confounder + 0.4 * rng.normal(size=n)
    y = 0.5 + 1.8 * x + confounding * 1.2 * confounder + rng.normal(size=n)
    return pd.DataFrame({"y": y, "x": x, "z": z})


def report(data: pd.DataFrame, verbose: bool = False) -> None:
    spec = iq.GmmSpec(dependent="y", endogenous=["x"], instruments=["z"])
    estimate = iq.iv_gmm_with_endogeneity(data, spec)
    level = iq.Level(0.05)

    if verbose:
        print("stacked GMM estimate (slope is the target):")
        for i, name in enumerate(estimate.names):
            se = float(np.sqrt(estimate.v_hat[i, i] / estimate.n))
            print(f"  {name:<10} {estimate.theta_hat[i]:>8.4f}  (se {se:.4f})")
        print()

    g_index = estimate.index_of("gamma_x")
    gamma = estimate.theta_hat[g_index]
    gamma_se = float(np.sqrt(estimate.v_hat[g_index, g_index] / estimate.n))
    constraint = iq.constraint_from_spec("gamma_x >= 0", estimate)
    usual = iq.uci(estimate, level)
    adaptive = iq.iici(estimate, constraint, level)
    print(f"  gamma_x = {gamma:+.4f} ({gamma / gamma_se:+.1f} se from the sign boundary)")
    print(f"  UCI  for the slope: [{usual.lower:.4f}, {usual.upper:.4f}]")
    print(
        f"  IICI for the slope: [{adaptive.lower:.4f}, {adaptive.upper:.4f}]"
        f"  ({adaptive.length / usual.length:.1%} of usual length, branch {adaptive.branch!r})"
    )


def main() -> None:
    print("outside knowledge in every scenario: the omitted driver, if present,")
    print("pushes x and y the same way, so gamma_x = E[x * eps] >= 0.\n")

    print("strong confounding - the estimate sits deep inside the restriction,")
    print("which therefore carries no extra information; the interval is unchanged:")
    report(simulate(n=2_000, seed=5, confounding=0.7), verbose=True)

    print("\nno confounding - the truth is on the boundary gamma_x = 0. the estimate")
    print("lands just inside the switching zone and one endpoint tightens:")
    report(simulate(n=2_000, seed=6, confounding=0.0))

    print("\nno confounding, another sample - the estimate slightly violates the")
    print("restriction and both endpoints switch to the equality-imposed form:")
    report(simulate(n=2_000, seed=3, confounding=0.0))


if __name__ == "__main__":
    main()
