"""Covariance kernels with analytic first and mixed-second derivatives.

Two families are provided:

* ``SquaredExponential``:  k(x, y) = alpha * exp(-||x - y||^2 / (2 l^2))
* ``Polynomial``:          k(x, y) = alpha_bar * (x . y - offset)^degree

The polynomial form uses ``(x . y - offset)`` deliberately; callers expecting
the ``+ offset`` convention should negate the parameter.

Derivative convention
---------------------
``grad_second_arg(x, y)`` differentiates with respect to the *derivative
argument* ``y`` of ``k(y, x)``; for stationary kernels this flips sign under
swapping the roles of the two points, so the convention matters. The mixed
second derivative ``hess_mixed(y, y2)`` is d^2 k(y, y2) / dy dy2 with rows
indexed by components of ``y`` and columns by components of ``y2``.

Analytic derivatives for the polynomial family are implemented for the
homogeneous quadratic case (offset 0, degree 2) only; other parameter
combinations raise ``Unsupported``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, Unsupported


@dataclass(frozen=True)
class JointKernelBlocks:
    """Kernel blocks at coincident arguments for the joint (value, gradient) prior.

    ``kxx`` is k(x, x), ``cross`` the n-vector dk(x, y)/dy at y = x, and
    ``hess`` the n x n mixed second derivative at y = y2 = x.
    """

    kxx: float
    cross: np.ndarray
    hess: np.ndarray

    @property
    def dim(self) -> int:
        return self.cross.shape[0]

    def matrix(self) -> np.ndarray:
        """Assemble the full (1+n) x (1+n) prior covariance block."""
        n = self.dim
        out = np.empty((1 + n, 1 + n))
        out[0, 0] = self.kxx
        out[0, 1:] = self.cross
        out[1:, 0] = self.cross
        out[1:, 1:] = self.hess
        return out


def _check_pair(x, y):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatch(f"point shapes {x.shape} and {y.shape} differ")
    return x, y


@dataclass(frozen=True)
class SquaredExponential:
    """Squared-exponential kernel with scale factor ``alpha`` and length scale ``length_scale``."""

    alpha: float
    length_scale: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.length_scale > 0:
            raise ValueError("length_scale must be positive")

    def eval(self, x, y) -> float:
        x, y = _check_pair(x, y)
        d2 = float(np.sum((x - y) ** 2))
        return self.alpha * np.exp(-d2 / (2.0 * self.length_scale**2))

    def eval_matrix(self, X, Y) -> np.ndarray:
        """Pairwise kernel matrix between row stacks ``X`` (m, n) and ``Y`` (k, n)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if X.shape[1] != Y.shape[1]:
            raise DimensionMismatch("row stacks have different point dimensions")
        d2 = (
            np.sum(X * X, axis=1)[:, None]
            - 2.0 * X @ Y.T
            + np.sum(Y * Y, axis=1)[None, :]
        )
        np.maximum(d2, 0.0, out=d2)
        return self.alpha * np.exp(-d2 / (2.0 * self.length_scale**2))

    def grad_second_arg(self, x, y) -> np.ndarray:
        """dk(y, x)/dy = -((y - x) / l^2) k(y, x)."""
        x, y = _check_pair(x, y)
        return -(y - x) / self.length_scale**2 * self.eval(y, x)

    def grad_tensor(self, Y, X) -> np.ndarray:
        """Gradients dk(y, x_r)/dy for every candidate y in ``Y`` (m, n) and sample x_r in ``X`` (k, n).

        Returns shape (m, k, n).
        """
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        X = np.atleast_2d(np.asarray(X, dtype=float))
        kern = self.eval_matrix(Y, X)
        diff = Y[:, None, :] - X[None, :, :]
        return -diff / self.length_scale**2 * kern[:, :, None]

    def hess_mixed(self, y, y2) -> np.ndarray:
        """d^2 k(y, y2) / dy dy2 = (k / l^2) (I - (y - y2)(y - y2)^T / l^2)."""
        y, y2 = _check_pair(y, y2)
        n = y.shape[0]
        r = y - y2
        l2 = self.length_scale**2
        k = self.eval(y, y2)
        return (k / l2) * (np.eye(n) - np.outer(r, r) / l2)

    def joint_blocks(self, x) -> JointKernelBlocks:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n = x.shape[0]
        return JointKernelBlocks(
            kxx=self.alpha,
            cross=np.zeros(n),
            hess=(self.alpha / self.length_scale**2) * np.eye(n),
        )

    def joint_blocks_batch(self, Y):
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        m, n = Y.shape
        kxx = np.full(m, self.alpha)
        cross = np.zeros((m, n))
        hess = np.broadcast_to(
            (self.alpha / self.length_scale**2) * np.eye(n), (m, n, n)
        ).copy()
        return kxx, cross, hess


@dataclass(frozen=True)
class Polynomial:
    """Polynomial kernel ``alpha_bar * (x . y - offset)^degree``.

    Analytic derivatives exist here only for the homogeneous quadratic case
    (offset 0, degree 2).
    """

    alpha_bar: float
    offset: float = 0.0
    degree: int = 2

    def __post_init__(self):
        if not self.alpha_bar > 0:
            raise ValueError("alpha_bar must be positive")
        if self.offset < 0:
            raise ValueError("offset must be nonnegative")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError("degree must be a positive integer")

    def _require_quadratic(self):
        if self.offset != 0.0 or self.degree != 2:
            raise Unsupported(
                "analytic polynomial derivatives implemented only for offset 0, degree 2"
            )

    def eval(self, x, y) -> float:
        x, y = _check_pair(x, y)
        return self.alpha_bar * (float(x @ y) - self.offset) ** self.degree

    def eval_matrix(self, X, Y) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if X.shape[1] != Y.shape[1]:
            raise DimensionMismatch("row stacks have different point dimensions")
        return self.alpha_bar * (X @ Y.T - self.offset) ** self.degree

    def grad_second_arg(self, x, y) -> np.ndarray:
        """dk(y, x)/dy = 2 alpha_bar (y . x) x for the quadratic case."""
        self._require_quadratic()
        x, y = _check_pair(x, y)
        return 2.0 * self.alpha_bar * float(y @ x) * x

    def grad_tensor(self, Y, X) -> np.ndarray:
        self._require_quadratic()
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        X = np.atleast_2d(np.asarray(X, dtype=float))
        dots = Y @ X.T
        return 2.0 * self.alpha_bar * dots[:, :, None] * X[None, :, :]

    def hess_mixed(self, y, y2) -> np.ndarray:
        """d^2 k(y, y2) / dy dy2 = 2 alpha_bar (y2 y^T + (y . y2) I) for the quadratic case."""
        self._require_quadratic()
        y, y2 = _check_pair(y, y2)
        n = y.shape[0]
        return 2.0 * self.alpha_bar * (np.outer(y2, y) + float(y @ y2) * np.eye(n))

    def joint_blocks(self, x) -> JointKernelBlocks:
        self._require_quadratic()
        x = np.atleast_1d(np.asarray(x, dtype=float))
        sq = float(x @ x)
        return JointKernelBlocks(
            kxx=self.alpha_bar * sq**2,
            cross=2.0 * self.alpha_bar * sq * x,
            hess=2.0 * self.alpha_bar * (np.outer(x, x) + sq * np.eye(x.shape[0])),
        )

    def joint_blocks_batch(self, Y):
        self._require_quadratic()
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        m, n = Y.shape
        sq = np.sum(Y * Y, axis=1)
        kxx = self.alpha_bar * sq**2
        cross = 2.0 * self.alpha_bar * sq[:, None] * Y
        hess = 2.0 * self.alpha_bar * (
            Y[:, :, None] * Y[:, None, :] + sq[:, None, None] * np.eye(n)
        )
        return kxx, cross, hess


Kernel = SquaredExponential | Polynomial
