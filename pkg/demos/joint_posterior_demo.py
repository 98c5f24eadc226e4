"""Walk through the joint (value, gradient) posterior on a 1-D toy problem.

Fits a GP to five observations of a damped sine, queries the joint posterior
at a few points, and checks the gradient component of the posterior mean
against a central finite difference of the value-posterior mean surface.
"""

import numpy as np

from multibo import SquaredExponential, fit, joint_posterior, value_posterior


def damped_sine(x):
    return np.sin(3.0 * x) * np.exp(-0.2 * x * x)


def main():
    rng = np.random.default_rng(0)
    X = rng.uniform(-2.0, 2.0, (5, 1))
    y = damped_sine(X[:, 0])
    state = fit(X, y, prior_mean=0.0, kernel=SquaredExponential(alpha=1.0, length_scale=0.5))

    print("training points:")
    for xi, yi in zip(X[:, 0], y):
        print(f"  x = {xi:+.3f}   f = {yi:+.4f}")

    print("\njoint posterior (value mean, gradient mean, value sd, gradient sd):")
    for xq in (-1.5, -0.3, 0.6, 1.8):
        j = joint_posterior(state, [xq])
        print(
            f"  x = {xq:+.2f}   mu_f = {j.mu_x:+.4f}   mu_f' = {j.mu_y[0]:+.4f}"
            f"   sd_f = {np.sqrt(j.sigma_xx):.4f}   sd_f' = {np.sqrt(j.sigma_yy[0, 0]):.4f}"
        )

    print("\ngradient mean vs finite difference of the mean surface:")
    h = 1e-5
    for xq in (-1.0, 0.2, 1.1):
        j = joint_posterior(state, [xq])
        up, _ = value_posterior(state, [xq + h])
        dn, _ = value_posterior(state, [xq - h])
        fd = (up - dn) / (2 * h)
        print(f"  x = {xq:+.2f}   analytic {j.mu_y[0]:+.6f}   finite-diff {fd:+.6f}")


if __name__ == "__main__":
    main()
