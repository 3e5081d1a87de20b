"""Kernel ridge regression with the Gaussian (RBF) kernel.

The dual system (K + lambda*I) alpha = y is solved with a Cholesky
factorization; K + lambda*I is symmetric positive definite for any
lambda > 0 because the RBF kernel is positive semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .panel import LagDesign

_JITTER = 1e-10


@dataclass(frozen=True)
class KernelConfig:
    """Ridge penalty and RBF width.

    ``gamma=None`` means "resolve at fit time as 1 / n_features", so a
    restricted and an unrestricted design automatically get widths matched
    to their own column counts.
    """

    ridge_lambda: float = 1.0
    gamma: float | None = None

    def __post_init__(self):
        if self.ridge_lambda <= 0:
            raise ValueError("ridge_lambda must be positive")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive when fixed")

    def resolve_gamma(self, n_features: int) -> float:
        return 1.0 / n_features if self.gamma is None else self.gamma


@dataclass(frozen=True)
class KrrModel:
    """Fitted dual coefficients plus the training rows needed to predict."""

    alpha: np.ndarray
    train_rows: np.ndarray
    gamma: float
    ridge_lambda: float

    @property
    def n_train(self) -> int:
        return self.train_rows.shape[0]


@dataclass(frozen=True)
class KernelSystem:
    """Cholesky factor of K + lambda*I for one training design.

    One factorization serves every target vector regressed on the same
    design: solving for dual coefficients is a pair of triangular solves.
    """

    factor: tuple
    gamma: float
    ridge_lambda: float
    n_train: int


def rbf_kernel(x: np.ndarray, x_other: np.ndarray, gamma: float) -> float:
    """exp(-gamma * ||x - x'||^2) for two equal-length vectors."""
    x = np.asarray(x, dtype=float)
    x_other = np.asarray(x_other, dtype=float)
    if x.shape != x_other.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x_other.shape}")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    diff = x - x_other
    return float(np.exp(-gamma * np.dot(diff, diff)))


def _squared_distances(rows: np.ndarray, other: np.ndarray) -> np.ndarray:
    sq_rows = np.einsum("ij,ij->i", rows, rows)
    sq_other = np.einsum("ij,ij->i", other, other)
    d2 = rows @ other.T
    d2 *= -2.0
    d2 += sq_rows[:, None]
    d2 += sq_other[None, :]
    np.maximum(d2, 0.0, out=d2)  # clamp negative round-off
    return d2


def _kernel_from_distances(d2: np.ndarray, gamma: float) -> np.ndarray:
    # in place: these matrices reach tens of MB and allocations are costly
    d2 *= -gamma
    np.exp(d2, out=d2)
    return d2


def gram_matrix(rows: np.ndarray, gamma: float) -> np.ndarray:
    """Pairwise RBF kernel matrix with an exactly symmetric, unit diagonal."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    d2 = _squared_distances(rows, rows)
    np.fill_diagonal(d2, 0.0)
    k = _kernel_from_distances(d2, gamma)
    # BLAS blocking can leave K[i,j] != K[j,i] in the last bit; averaging
    # restores bitwise symmetry without changing values beyond round-off.
    transposed = k.T.copy()
    k += transposed
    k *= 0.5
    np.fill_diagonal(k, 1.0)
    return k


def cross_kernel(rows: np.ndarray, train_rows: np.ndarray, gamma: float) -> np.ndarray:
    """Kernel evaluations of each of ``rows`` against every training row."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != train_rows.shape[1]:
        raise ValueError(
            f"dimension mismatch: {rows.shape[1]} features vs {train_rows.shape[1]} trained"
        )
    return _kernel_from_distances(_squared_distances(rows, train_rows), gamma)


def _regularized_gram(rows: np.ndarray, gamma: float, ridge: float) -> np.ndarray:
    # The factorization reads the lower triangle only, so the bitwise
    # symmetrization pass of gram_matrix is skipped here; entries agree with
    # it to one rounding unit.
    d2 = _squared_distances(rows, rows)
    np.fill_diagonal(d2, 0.0)
    k = _kernel_from_distances(d2, gamma)
    k[np.diag_indices_from(k)] += ridge
    return k


def factor_kernel_system(
    train_matrix: np.ndarray, config: KernelConfig = KernelConfig()
) -> KernelSystem:
    """Assemble and factor the regularized Gram matrix of a training design.

    A borderline-conditioned system gets one retry with a tiny diagonal
    jitter before the failure is raised.
    """
    train_matrix = np.atleast_2d(np.asarray(train_matrix, dtype=float))
    if train_matrix.shape[0] < 1:
        raise ValueError("training design is empty")
    gamma = config.resolve_gamma(train_matrix.shape[1])
    k = _regularized_gram(train_matrix, gamma, config.ridge_lambda)
    try:
        factor = scipy.linalg.cho_factor(
            k, lower=True, overwrite_a=True, check_finite=False
        )
    except scipy.linalg.LinAlgError:
        # k was clobbered by the failed in-place attempt; rebuild with jitter
        k = _regularized_gram(train_matrix, gamma, config.ridge_lambda + _JITTER)
        factor = scipy.linalg.cho_factor(
            k, lower=True, overwrite_a=True, check_finite=False
        )
    return KernelSystem(
        factor=factor,
        gamma=gamma,
        ridge_lambda=config.ridge_lambda,
        n_train=train_matrix.shape[0],
    )


def solve_dual(system: KernelSystem, y: np.ndarray) -> np.ndarray:
    """Dual coefficients (K + lambda*I)^-1 y via the cached factorization."""
    return scipy.linalg.cho_solve(system.factor, y, check_finite=False)


def krr_fit(train: LagDesign, config: KernelConfig = KernelConfig()) -> KrrModel:
    """Fit dual coefficients alpha = (K + lambda*I)^-1 y on a training design."""
    system = factor_kernel_system(train.X, config)
    alpha = solve_dual(system, train.y_true)
    return KrrModel(
        alpha=alpha,
        train_rows=train.X.copy(),
        gamma=system.gamma,
        ridge_lambda=config.ridge_lambda,
    )


def krr_predict(model: KrrModel, rows: np.ndarray) -> np.ndarray:
    """Predict sum_i alpha_i * kernel(train_row_i, row) for each query row."""
    k = cross_kernel(rows, model.train_rows, model.gamma)
    return k @ model.alpha
