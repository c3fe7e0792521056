"""Exact proximal operators used by the solver and the experiments.

Every operator evaluates ``prox_{alpha f}(v) = argmin_y f(y) + ||v-y||^2/(2a)``
in closed form and declares the function class of the underlying f.  The
subgradient used implicitly by the prox is recoverable as (v - y)/alpha.
Operators with an evaluable objective expose it via ``objective``; others
return None there.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .funclass import FunctionClass, estimate_class_quadratic

__all__ = [
    "ProxOperator",
    "prox_l1",
    "prox_affine_indicator",
    "prox_quadratic",
    "prox_zero",
    "recover_subgradient",
]


class ProxOperator:
    """Base class: an evaluatable proximal map with a declared function class."""

    function_class: FunctionClass

    def evaluate(self, v: np.ndarray, alpha: float) -> np.ndarray:
        raise NotImplementedError

    def objective(self, x: np.ndarray):
        """Value of the underlying f at x, or None if not evaluable."""
        return None


class _SoftThreshold(ProxOperator):
    """Prox of gamma * ||x||_1: componentwise soft threshold at alpha*gamma."""

    def __init__(self, gamma: float):
        if not gamma > 0:
            raise ValueError(f"gamma must be > 0, got {gamma}")
        self.gamma = gamma
        self.function_class = FunctionClass(0.0, math.inf)

    def evaluate(self, v, alpha):
        t = alpha * self.gamma
        return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)

    def objective(self, x):
        return self.gamma * float(np.sum(np.abs(x)))


class _AffineProjection(ProxOperator):
    """Prox of the indicator of {y | Ay = b}: Euclidean projection, alpha-free.

    The Cholesky factor of A A^T is computed once at construction.  Requires
    full row rank; a pivot below 1e-12 * trace/p is rejected.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError("A must be p x n and b length p")
        self.A = A
        self.b = b
        G = A @ A.T
        p = A.shape[0]
        try:
            self._cho = scipy.linalg.cho_factor(G)
        except scipy.linalg.LinAlgError as exc:
            raise ValueError(
                "A A^T is not positive definite; remove linearly dependent "
                "rows of A before constructing the projection"
            ) from exc
        pivots = np.diag(self._cho[0]) ** 2
        if pivots.min() < 1e-12 * np.trace(G) / p:
            raise ValueError(
                "A is numerically rank deficient (tiny Cholesky pivot); "
                "remove linearly dependent rows of A"
            )
        self.function_class = FunctionClass(0.0, math.inf)
        self._feas_tol = 1e-9 * (1.0 + float(np.linalg.norm(b)))

    def evaluate(self, v, alpha):
        r = self.A @ v - self.b
        return v - self.A.T @ scipy.linalg.cho_solve(self._cho, r)

    def objective(self, x):
        if np.linalg.norm(self.A @ x - self.b) <= self._feas_tol:
            return 0.0
        return math.inf


class _QuadraticProx(ProxOperator):
    """Prox of 0.5 * ||Ax - b||^2: solves (I + a A^T A) y = v + a A^T b.

    One Cholesky factorization per distinct alpha, cached; the solver keeps
    alpha constant so exactly one factorization occurs per run.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError("A must be p x n and b length p")
        self.A = A
        self.b = b
        self._H = A.T @ A
        self._Atb = A.T @ b
        self._cho_cache = {}
        self.function_class = estimate_class_quadratic(A)

    def _factor(self, alpha):
        cho = self._cho_cache.get(alpha)
        if cho is None:
            n = self._H.shape[0]
            M = np.eye(n) + alpha * self._H
            # I + a A^T A is positive definite for every a > 0
            cho = scipy.linalg.cho_factor(M)
            self._cho_cache[alpha] = cho
        return cho

    def evaluate(self, v, alpha):
        return scipy.linalg.cho_solve(self._factor(alpha), v + alpha * self._Atb)

    def objective(self, x):
        r = self.A @ x - self.b
        return 0.5 * float(r @ r)


class _Identity(ProxOperator):
    """Prox of the zero function: the identity map."""

    def __init__(self):
        self.function_class = FunctionClass(0.0, math.inf)

    def evaluate(self, v, alpha):
        return np.asarray(v, dtype=float).copy()

    def objective(self, x):
        return 0.0


def prox_l1(gamma: float) -> ProxOperator:
    """Soft-threshold operator for gamma * ||x||_1; class F(0, inf)."""
    return _SoftThreshold(gamma)


def prox_affine_indicator(A: np.ndarray, b: np.ndarray) -> ProxOperator:
    """Projection onto {y | Ay = b}; class F(0, inf). A must have full row rank."""
    return _AffineProjection(A, b)


def prox_quadratic(A: np.ndarray, b: np.ndarray) -> ProxOperator:
    """Prox of 0.5 * ||Ax - b||^2; class estimated from the spectrum of A^T A."""
    return _QuadraticProx(A, b)


def prox_zero() -> ProxOperator:
    """Identity prox (f = 0); useful for degenerate tests."""
    return _Identity()


def recover_subgradient(op: ProxOperator, v: np.ndarray, y: np.ndarray, alpha: float) -> np.ndarray:
    """Subgradient of f at y = op.evaluate(v, alpha), i.e. (v - y)/alpha."""
    return (np.asarray(v, dtype=float) - np.asarray(y, dtype=float)) / alpha
