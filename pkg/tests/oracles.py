"""Independent brute-force oracles used to validate the implementation.

Everything here deliberately avoids the code paths it checks: Monte-Carlo
estimates sample the *full* joint Gaussian, the finite-difference GP oracle
never touches kernel derivatives, and Gaussian conditioning goes through a
plain matrix inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from multibo.gp import GPState, JointGaussian, value_posterior


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    samples: int
    seed: int


def _sample_joint(j: JointGaussian, n_samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    cov = j.cov
    jitter = 0.0
    for _ in range(8):
        try:
            chol = np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
            break
        except np.linalg.LinAlgError:
            jitter = max(jitter * 10.0, 1e-12)
    else:
        raise ValueError("covariance not factorizable for sampling")
    z = rng.standard_normal((n_samples, cov.shape[0]))
    return j.mean + z @ chol.T


def mc_joint_probability(j: JointGaussian, threshold, epsilon, samples=1_000_000,
                         seed=0) -> MonteCarloEstimate:
    """P(f > threshold and |grad_i| < epsilon for all i) by direct sampling."""
    draws = _sample_joint(j, samples, seed)
    hits = (draws[:, 0] > threshold) & np.all(np.abs(draws[:, 1:]) < epsilon, axis=1)
    p = float(np.mean(hits))
    return MonteCarloEstimate(
        value=p,
        stderr=float(np.sqrt(max(p * (1.0 - p), 1e-300) / samples)),
        samples=samples,
        seed=seed,
    )


def mc_joint_ei(j: JointGaussian, threshold, epsilon, samples=1_000_000,
                seed=0) -> MonteCarloEstimate:
    """E[(f - threshold)+ * 1{|grad| < epsilon componentwise}] by sampling."""
    draws = _sample_joint(j, samples, seed)
    gain = np.maximum(draws[:, 0] - threshold, 0.0)
    gain *= np.all(np.abs(draws[:, 1:]) < epsilon, axis=1)
    return MonteCarloEstimate(
        value=float(np.mean(gain)),
        stderr=float(np.std(gain) / np.sqrt(samples)),
        samples=samples,
        seed=seed,
    )


def mc_band_probability_diagonal(j: JointGaussian, epsilon, samples=1_000_000,
                                 seed=0) -> MonteCarloEstimate:
    """P(|grad_i| < epsilon for all i) with independent per-dimension draws.

    Validates the diagonal band product: each component is sampled from its
    own marginal, ignoring gradient cross-correlations by construction.
    """
    rng = np.random.default_rng(seed)
    mu = j.mu_y
    s = np.sqrt(np.maximum(np.diag(j.sigma_yy), 0.0))
    draws = mu + rng.standard_normal((samples, mu.shape[0])) * s
    hits = np.all(np.abs(draws) < epsilon, axis=1)
    p = float(np.mean(hits))
    return MonteCarloEstimate(
        value=p,
        stderr=float(np.sqrt(max(p * (1.0 - p), 1e-300) / samples)),
        samples=samples,
        seed=seed,
    )


def fd_gradient_gp(state: GPState, x, h=1e-5) -> np.ndarray:
    """Central finite difference of the value-posterior mean surface."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        step = np.zeros_like(x)
        step[i] = h
        up, _ = value_posterior(state, x + step)
        dn, _ = value_posterior(state, x - step)
        grad[i] = (up - dn) / (2.0 * h)
    return grad


def fd_joint_posterior(state: GPState, x, h=1e-5):
    """Joint (value, gradient) posterior via finite-difference functionals.

    Builds the exact posterior of the linear functionals
    [f(x), (f(x + h e_i) - f(x - h e_i)) / 2h] from the multi-point value
    posterior, touching no kernel derivatives.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    pts = [x]
    for i in range(n):
        step = np.zeros_like(x)
        step[i] = h
        pts.append(x + step)
        pts.append(x - step)
    P = np.asarray(pts)
    kern = state.kernel
    K_pp = kern.eval_matrix(P, P)
    K_ps = kern.eval_matrix(P, state.inputs)
    mean_pts = state.prior_mean + K_ps @ state.alpha_vec
    from multibo import numerics

    cov_pts = K_pp - K_ps @ numerics.solve(state.factor, K_ps.T)
    # linear map from point values to [f(x), central differences]
    T = np.zeros((1 + n, P.shape[0]))
    T[0, 0] = 1.0
    for i in range(n):
        T[1 + i, 1 + 2 * i] = 1.0 / (2.0 * h)
        T[1 + i, 2 + 2 * i] = -1.0 / (2.0 * h)
    return T @ mean_pts, T @ cov_pts @ T.T


def conditional_oracle(j: JointGaussian, g):
    """Generic multivariate-normal conditioning through a dense inverse."""
    g = np.asarray(g, dtype=float)
    syy_inv = np.linalg.inv(j.sigma_yy)
    mean = j.mu_x + j.sigma_xy @ syy_inv @ (g - j.mu_y)
    var = j.sigma_xx - j.sigma_xy @ syy_inv @ j.sigma_xy
    return float(mean), float(var)
