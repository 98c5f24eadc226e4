"""Dump acquisition landscapes over the synthetic 1-D benchmark.

After a handful of observations, evaluates joint PI/EI, their vanilla
counterparts, and the derivative-only band on a dense grid and writes a
tidy CSV (one row per grid point) for plotting with any tool:

    python demos/acquisition_landscape.py > landscape.csv
"""

import numpy as np

from multibo import AcquisitionConfig, SquaredExponential, evaluate, fit, make_benchmark

FAMILIES = ("joint_pi", "joint_ei", "vanilla_pi", "vanilla_ei", "derivative_only")


def main():
    bench = make_benchmark("synthetic1d")
    rng = np.random.default_rng(4)
    X = rng.uniform(0.0, 1.0, (6, 1))
    y = np.array([float(bench.objective(p)) for p in X])
    state = fit(X, y, prior_mean=0.0, kernel=SquaredExponential(1.0, 0.06))

    grid = np.linspace(0.0, 1.0, 200)
    print("x,objective," + ",".join(FAMILIES))
    for xq in grid:
        vals = []
        for family in FAMILIES:
            cfg = AcquisitionConfig(family, threshold=0.45, epsilon=1.0)
            vals.append(evaluate(state, [xq], cfg))
        f = float(bench.objective(np.array([xq])))
        print(",".join([f"{xq:.6f}", f"{f:.6f}"] + [f"{v:.6e}" for v in vals]))


if __name__ == "__main__":
    main()
