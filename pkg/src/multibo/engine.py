"""Batched joint-posterior evaluation over a fixed candidate set.

The optimizer re-scores every candidate each iteration. This module keeps
that affordable by maintaining, per candidate x:

* the kernel cross columns against all samples (one new row per step,
  stored sample-major so GEMMs see contiguous memory),
* the joint covariance S(x) = K0(x) - A(x) K^-1 A(x)^T in packed
  upper-triangle form (one contiguous row per entry).

Appending a sample extends the Cholesky factor of K by one row
(L -> [[L, 0], [l~^T, lam]]) and therefore changes S(x) by a rank-1
downdate  S(x) -= v(x) v(x)^T  with

    v(x) = (a_new(x) - A(x) c) / lam,      c = K^-1 k(X, x_new),

where ``a_new(x)`` is the joint kernel column of the new sample. The
products A(x) c and A(x) alpha (posterior mean) collapse into a single
dense GEMM against the cached cross columns, so the per-iteration cost is
O(N k) instead of O(N k^2).

If the factor update fails (duplicate or near-duplicate sample), the state
is refit from scratch through the jitter schedule and the cached
covariances are rebuilt exactly.

Gradient-covariance blocks are inverted in closed form for n <= 3 (the
sizes the experiments use); numerically degenerate candidates fall back to
a diagonal approximation, which only ever affects points whose posterior
has already collapsed onto data.

Everything here is an internal optimization detail; the scalar reference
path lives in ``multibo.gp`` and the two are held together by tests.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import erfc

from . import numerics
from .gp import GPState
from .kernels import Polynomial, SquaredExponential
from .numerics import CholeskyFactor

_CHUNK = 20_000  # candidate rows per block in full rebuilds

_INV_SQRT_2 = 1.0 / np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _q(z):
    return 0.5 * erfc(z * _INV_SQRT_2)


def _phi(z):
    return np.exp(-0.5 * z * z) * _INV_SQRT_2PI


def _improvement_probability_vec(mean, std, threshold):
    degenerate = np.where(mean > threshold, 1.0, np.where(mean == threshold, 0.5, 0.0))
    safe = np.where(std > 0.0, std, 1.0)
    return np.where(std > 0.0, _q((threshold - mean) / safe), degenerate)


def _expected_improvement_vec(mean, std, threshold):
    safe = np.where(std > 0.0, std, 1.0)
    z = (threshold - mean) / safe
    smooth = (mean - threshold) * _q(z) + safe * _phi(z)
    return np.where(std > 0.0, smooth, np.maximum(mean - threshold, 0.0))


class CandidateEvaluator:
    """Joint posterior statistics for a fixed candidate stack, updated per sample."""

    def __init__(self, kernel, candidates, prior_mean, capacity,
                 jitter_schedule=numerics.DEFAULT_JITTER_SCHEDULE):
        self.kernel = kernel
        self.cands = np.ascontiguousarray(np.atleast_2d(np.asarray(candidates, dtype=float)))
        self.prior_mean = float(prior_mean)
        self.jitter_schedule = tuple(jitter_schedule)
        self.capacity = int(capacity)
        n_cand, n = self.cands.shape
        self.n = n
        self._X = np.empty((self.capacity, n))
        self._f = np.empty(self.capacity)
        self._L = np.zeros((self.capacity, self.capacity))
        self._k = 0
        self._jitter = 0.0
        self._alpha = np.empty(0)
        # cross caches are sample-major: row j holds sample j against all candidates
        self._kcs = np.empty((self.capacity, n_cand))
        self._pcs = np.empty((self.capacity, n_cand)) if isinstance(kernel, Polynomial) else None
        # packed upper triangle of the (1+n) x (1+n) joint covariance, entry-major
        self._pairs = [(i, j) for i in range(1 + n) for j in range(i, 1 + n)]
        self._pos = {pair: p for p, pair in enumerate(self._pairs)}
        self._scov = np.empty((len(self._pairs), n_cand))
        k0_val, k0_cross, k0_hess = kernel.joint_blocks_batch(self.cands)
        k0p = np.empty((len(self._pairs), n_cand))
        for p, (i, j) in enumerate(self._pairs):
            if i == 0 and j == 0:
                k0p[p] = k0_val
            elif i == 0:
                k0p[p] = k0_cross[:, j - 1]
            else:
                k0p[p] = k0_hess[:, i - 1, j - 1]
        # squared-exponential blocks are candidate-independent; keep one column
        if isinstance(kernel, SquaredExponential):
            self._k0p = k0p[:, :1].copy()
        else:
            self._k0p = k0p
        self._mu = np.empty((n_cand, 1 + n))
        self._mu_fresh = False
        self._u = np.empty((n_cand, 1 + n))
        self._v = np.empty((n_cand, 1 + n))
        self._fused = np.empty((n_cand, 2 * (1 + n)))
        self._w1 = np.empty(n_cand)

    # -- kernel cross columns ------------------------------------------------

    def _fill_column(self, j, x):
        """Kernel (and dot-product) row of sample ``x`` against all candidates."""
        if isinstance(self.kernel, SquaredExponential):
            d2 = np.sum((self.cands - x) ** 2, axis=1)
            self._kcs[j] = self.kernel.alpha * np.exp(
                -d2 / (2.0 * self.kernel.length_scale**2)
            )
        else:
            p = self.cands @ x
            self._pcs[j] = p
            self._kcs[j] = self.kernel.alpha_bar * (p - self.kernel.offset) ** self.kernel.degree

    def _grad_fixup(self, out):
        """Turn raw GEMM columns into gradient rows for the SE kernel.

        After the GEMM, column 0 holds sum_r w_r k(x, x_r) and the rest hold
        sum_r w_r x_r k(x, x_r); the SE gradient weight sum is
        (sum_r w_r x_r k - x sum_r w_r k) / l^2.
        """
        l2 = self.kernel.length_scale**2
        grad = out[:, 1:]
        grad -= self.cands * out[:, [0]]
        grad /= l2

    def _joint_dot(self, w, out):
        """A(x) @ w for every candidate, written into ``out`` (N, 1 + n)."""
        k = self._k
        kcs = self._kcs[:k]
        X = self._X[:k]
        if isinstance(self.kernel, SquaredExponential):
            np.matmul(kcs.T, np.column_stack([w, w[:, None] * X]), out=out)
            self._grad_fixup(out)
        else:
            np.matmul(kcs.T, w[:, None], out=out[:, :1])
            np.matmul(self._pcs[:k].T, w[:, None] * X, out=out[:, 1:])
            out[:, 1:] *= 2.0 * self.kernel.alpha_bar
        return out

    def _joint_dot_pair(self, w1, w2, out1, out2):
        """A(x) @ w1 and A(x) @ w2 in one pass over the cross cache."""
        k = self._k
        X = self._X[:k]
        if isinstance(self.kernel, SquaredExponential):
            stacked = np.column_stack([w1, w1[:, None] * X, w2, w2[:, None] * X])
            np.matmul(self._kcs[:k].T, stacked, out=self._fused)
            width = 1 + self.n
            out1[:] = self._fused[:, :width]
            out2[:] = self._fused[:, width:]
            self._grad_fixup(out1)
            self._grad_fixup(out2)
        else:
            self._joint_dot(w1, out1)
            self._joint_dot(w2, out2)
        return out1, out2

    def _joint_column(self, x, kcol, pcol, out):
        """Joint kernel column [k(x_c, x); grad_y k(y, x)|_{y=x_c}] per candidate."""
        out[:, 0] = kcol
        if isinstance(self.kernel, SquaredExponential):
            l2 = self.kernel.length_scale**2
            for d in range(self.n):
                np.subtract(self.cands[:, d], x[d], out=self._w1)
                self._w1 *= kcol
                self._w1 /= -l2
                out[:, 1 + d] = self._w1
        else:
            for d in range(self.n):
                np.multiply(pcol, 2.0 * self.kernel.alpha_bar * x[d], out=out[:, 1 + d])
        return out

    # -- fitting -------------------------------------------------------------

    def fit(self, X, f):
        """Full (re)fit on samples ``X`` (k, n), values ``f``; rebuilds all caches."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        f = np.asarray(f, dtype=float).ravel()
        k = X.shape[0]
        if k > self.capacity:
            raise ValueError(f"sample count {k} exceeds evaluator capacity {self.capacity}")
        K = self.kernel.eval_matrix(X, X)
        K = 0.5 * (K + K.T)
        factor = numerics.cholesky(K, self.jitter_schedule)
        self._k = k
        self._jitter = factor.jitter
        self._X[:k] = X
        self._f[:k] = f
        self._L[:k, :k] = factor.lower
        self._refresh_alpha()
        self._mu_fresh = False
        for j in range(k):
            self._fill_column(j, X[j])
        self._rebuild_scov()

    def _refresh_alpha(self):
        k = self._k
        L = self._L[:k, :k]
        y = solve_triangular(L, self._f[:k] - self.prior_mean, lower=True)
        self._alpha = solve_triangular(L.T, y, lower=False)

    def _rebuild_scov(self):
        k = self._k
        L = self._L[:k, :k]
        X = self._X[:k]
        n_cand = self.cands.shape[0]
        for start in range(0, n_cand, _CHUNK):
            stop = min(start + _CHUNK, n_cand)
            block = slice(start, stop)
            a = np.empty((stop - start, 1 + self.n, k))
            a[:, 0, :] = self._kcs[:k, block].T
            a[:, 1:, :] = self.kernel.grad_tensor(self.cands[block], X).transpose(0, 2, 1)
            flat = a.reshape(-1, k)
            v = solve_triangular(L, flat.T, lower=True).T.reshape(stop - start, 1 + self.n, k)
            for p, (i, j) in enumerate(self._pairs):
                k0 = self._k0p[p, block] if self._k0p.shape[1] > 1 else self._k0p[p, 0]
                self._scov[p, block] = k0 - np.einsum("ak,ak->a", v[:, i, :], v[:, j, :])

    def append(self, x_new, f_new):
        """Add one observation; falls back to a full refit when the factor degrades."""
        x_new = np.asarray(x_new, dtype=float).ravel()
        k = self._k
        if k == 0:
            self.fit(x_new[None, :], [f_new])
            return
        if k + 1 > self.capacity:
            raise ValueError("evaluator capacity exhausted")
        k_vec = self.kernel.eval_matrix(x_new[None, :], self._X[:k])[0]
        k_self = self.kernel.eval(x_new, x_new)
        L = self._L[:k, :k]
        l_row = solve_triangular(L, k_vec, lower=True)
        lam2 = k_self + self._jitter - float(l_row @ l_row)
        if lam2 <= 1e-12 * max(k_self, 1.0):
            # near-duplicate sample: refactor everything through the schedule
            X = np.vstack([self._X[:k], x_new])
            f = np.append(self._f[:k], f_new)
            self.fit(X, f)
            return
        lam = np.sqrt(lam2)
        c = solve_triangular(L.T, l_row, lower=False)
        # extend the sample set first so the fused pass sees the new column
        self._fill_column(k, x_new)
        kcol = self._kcs[k]
        pcol = self._pcs[k] if self._pcs is not None else None
        v = self._joint_column(x_new, kcol, pcol, out=self._v)
        self._X[k] = x_new
        self._f[k] = f_new
        self._L[k, :k] = l_row
        self._L[k, k] = lam
        self._k = k + 1
        self._refresh_alpha()
        # one fused GEMM yields both the downdate projection (old samples,
        # weight c padded with 0) and the new posterior mean (weight alpha)
        c_pad = np.append(c, 0.0)
        self._joint_dot_pair(c_pad, self._alpha, self._u, self._mu)
        self._mu[:, 0] += self.prior_mean
        self._mu_fresh = True
        v -= self._u
        v /= lam
        t = self._w1
        for p, (i, j) in enumerate(self._pairs):
            np.multiply(v[:, i], v[:, j], out=t)
            self._scov[p] -= t

    # -- posterior statistics --------------------------------------------------

    @property
    def n_samples(self) -> int:
        return self._k

    @property
    def jitter(self) -> float:
        return self._jitter

    def gradient_mean_at(self, x) -> np.ndarray:
        """Posterior-mean gradient at a single point (used by the optimum flag)."""
        x = np.asarray(x, dtype=float).ravel()
        g = self.kernel.grad_tensor(x[None, :], self._X[: self._k])[0]
        return g.T @ self._alpha

    def state(self) -> GPState:
        """Snapshot of the current fit as an immutable GPState."""
        k = self._k
        return GPState(
            inputs=self._X[:k].copy(),
            values=self._f[:k].copy(),
            prior_mean=self.prior_mean,
            kernel=self.kernel,
            factor=CholeskyFactor(lower=self._L[:k, :k].copy(), jitter=self._jitter),
            alpha_vec=self._alpha.copy(),
        )

    def posterior_mean(self) -> np.ndarray:
        """Joint posterior mean per candidate, shape (N, 1 + n)."""
        if not self._mu_fresh:
            self._joint_dot(self._alpha, out=self._mu)
            self._mu[:, 0] += self.prior_mean
            self._mu_fresh = True
        return self._mu

    def joint_cov(self, index: int) -> np.ndarray:
        """Unpacked joint covariance of one candidate (testing hook)."""
        m = np.empty((1 + self.n, 1 + self.n))
        for p, (i, j) in enumerate(self._pairs):
            m[i, j] = m[j, i] = self._scov[p, index]
        return m

    def _sxx(self):
        return self._scov[self._pos[(0, 0)]]

    def _sxy(self, d):
        return self._scov[self._pos[(0, 1 + d)]]

    def _syy(self, i, j):
        key = (1 + i, 1 + j) if i <= j else (1 + j, 1 + i)
        return self._scov[self._pos[key]]

    def _band_probability(self, mu_y, epsilon):
        prob = np.ones(self.cands.shape[0])
        for d in range(self.n):
            s = np.sqrt(np.maximum(self._syy(d, d), 0.0))
            mu_d = mu_y[:, d]
            safe = np.where(s > 0.0, s, 1.0)
            spread = _q((-epsilon - mu_d) / safe) - _q((epsilon - mu_d) / safe)
            prob *= np.where(s > 0.0, spread, (np.abs(mu_d) < epsilon).astype(float))
        return np.clip(prob, 0.0, 1.0)

    def _conditional_stats(self, mu):
        """Value mean/std conditioned on gradient 0 per candidate.

        Solves the (regularized) gradient block in closed form for n <= 3.
        The conditional variance is clamped into [0, S_xx]: conditioning on
        the gradient can only shrink the value variance.
        """
        n = self.n
        sxx = self._sxx()
        resid = -mu[:, 1:]
        if n <= 3:
            beta_r, beta_s = self._solve_syy_small(resid)
        else:
            beta_r, beta_s = self._solve_syy_generic(resid)
        gain = np.zeros_like(sxx)
        shrink = np.zeros_like(sxx)
        for d in range(n):
            gain += self._sxy(d) * beta_r[:, d]
            shrink += self._sxy(d) * beta_s[:, d]
        cond_mean = mu[:, 0] + gain
        cond_var = np.clip(sxx - shrink, 0.0, np.maximum(sxx, 0.0))
        return cond_mean, np.sqrt(cond_var)

    def _solve_syy_small(self, resid):
        """Closed-form solve of S_yy b = rhs for rhs in {resid, S_yx}, n <= 3.

        Diagonal entries are floored at a tiny relative level; candidates
        whose block determinant degenerates fall back to the diagonal
        approximation (their posterior has collapsed onto data and the band
        factor controls the acquisition there anyway).
        """
        n = self.n
        N = self.cands.shape[0]
        d = [np.maximum(self._syy(i, i), 0.0) for i in range(n)]
        scale = d[0].copy()
        for i in range(1, n):
            np.maximum(scale, d[i], out=scale)
        floor = 1e-12 * np.maximum(scale, 1.0)
        dsafe = [np.maximum(d[i], floor) for i in range(n)]
        beta_r = np.empty((N, n))
        beta_s = np.empty((N, n))
        sxy = [self._sxy(i) for i in range(n)]
        if n == 1:
            beta_r[:, 0] = resid[:, 0] / dsafe[0]
            beta_s[:, 0] = sxy[0] / dsafe[0]
            return beta_r, beta_s
        if n == 2:
            o = self._syy(0, 1)
            det = dsafe[0] * dsafe[1] - o * o
            ok = np.abs(det) > 1e-12 * np.maximum(scale, 1.0) ** 2
            det_safe = np.where(ok, det, 1.0)
            for rhs, beta in ((resid, beta_r), (np.column_stack(sxy), beta_s)):
                b0 = (dsafe[1] * rhs[:, 0] - o * rhs[:, 1]) / det_safe
                b1 = (dsafe[0] * rhs[:, 1] - o * rhs[:, 0]) / det_safe
                beta[:, 0] = np.where(ok, b0, rhs[:, 0] / dsafe[0])
                beta[:, 1] = np.where(ok, b1, rhs[:, 1] / dsafe[1])
            return beta_r, beta_s
        a, b, c = dsafe
        e, f, g = self._syy(0, 1), self._syy(0, 2), self._syy(1, 2)
        c00 = b * c - g * g
        c01 = f * g - e * c
        c02 = e * g - f * b
        c11 = a * c - f * f
        c12 = e * f - a * g
        c22 = a * b - e * e
        det = a * c00 + e * c01 + f * c02
        ok = np.abs(det) > 1e-12 * np.maximum(scale, 1.0) ** 3
        det_safe = np.where(ok, det, 1.0)
        for rhs, beta in ((resid, beta_r), (np.column_stack(sxy), beta_s)):
            r0, r1, r2 = rhs[:, 0], rhs[:, 1], rhs[:, 2]
            beta[:, 0] = np.where(ok, (c00 * r0 + c01 * r1 + c02 * r2) / det_safe, r0 / a)
            beta[:, 1] = np.where(ok, (c01 * r0 + c11 * r1 + c12 * r2) / det_safe, r1 / b)
            beta[:, 2] = np.where(ok, (c02 * r0 + c12 * r1 + c22 * r2) / det_safe, r2 / c)
        return beta_r, beta_s

    def _solve_syy_generic(self, resid):
        n = self.n
        N = self.cands.shape[0]
        syy = np.empty((N, n, n))
        for i in range(n):
            for j in range(i, n):
                syy[:, i, j] = syy[:, j, i] = self._syy(i, j)
        diag = np.einsum("aii->ai", syy)
        floor = 1e-12 * np.maximum(diag.max(axis=1), 1.0)
        idx = np.arange(n)
        syy[:, idx, idx] = np.maximum(diag, floor[:, None])
        rhs = np.empty((N, n, 2))
        rhs[:, :, 0] = resid
        for d in range(n):
            rhs[:, d, 1] = self._sxy(d)
        sol = None
        for jitter in self.jitter_schedule:
            try:
                sol = np.linalg.solve(syy + jitter * np.eye(n), rhs)
                break
            except np.linalg.LinAlgError:
                continue
        if sol is None:
            # last resort: diagonal approximation
            sol = rhs / np.maximum(diag, floor[:, None])[:, :, None]
        return sol[:, :, 0], sol[:, :, 1]

    def acquisition_values(self, cfg) -> np.ndarray:
        """Acquisition of the configured family at every candidate."""
        mu = self.posterior_mean()
        if cfg.family in ("vanilla_pi", "vanilla_ei"):
            mean = mu[:, 0]
            std = np.sqrt(np.maximum(self._sxx(), 0.0))
            if cfg.family == "vanilla_pi":
                return _improvement_probability_vec(mean, std, cfg.threshold)
            return _expected_improvement_vec(mean, std, cfg.threshold)
        band = self._band_probability(mu[:, 1:], cfg.epsilon)
        if cfg.family == "derivative_only":
            return band
        cond_mean, cond_std = self._conditional_stats(mu)
        if cfg.family == "joint_pi":
            return _improvement_probability_vec(cond_mean, cond_std, cfg.threshold) * band
        return _expected_improvement_vec(cond_mean, cond_std, cfg.threshold) * band
