"""Composite Hilbert space: three electronic levels tensor a truncated oscillator.

Composite index convention: ``index = level * n_fock + fock``, i.e. operators
are assembled as ``np.kron(atomic_part, motional_part)``.  Level ordering is
g = 0, e1 = 1, e2 = 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEVEL_G, LEVEL_1, LEVEL_2 = 0, 1, 2


@dataclass(frozen=True)
class SpaceDims:
    """Dimensions of the composite space."""

    n_levels: int
    n_fock: int

    def __post_init__(self):
        if self.n_levels != 3:
            raise ValueError("this model has exactly three electronic levels")
        if self.n_fock < 2:
            raise ValueError("n_fock must be >= 2")

    @property
    def dim(self) -> int:
        return self.n_levels * self.n_fock


@dataclass
class QOperator:
    """Operator on the composite space (dense complex matrix plus dims)."""

    dims: SpaceDims
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (self.dims.dim, self.dims.dim):
            raise ValueError(f"data shape {self.data.shape} inconsistent with dims {self.dims}")

    def dag(self) -> "QOperator":
        return QOperator(self.dims, self.data.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.data))

    def __matmul__(self, other):
        return QOperator(self.dims, self.data @ _raw(other))

    def __add__(self, other):
        return QOperator(self.dims, self.data + _raw(other))

    def __sub__(self, other):
        return QOperator(self.dims, self.data - _raw(other))

    def __mul__(self, scalar):
        return QOperator(self.dims, self.data * scalar)

    __rmul__ = __mul__


def _raw(op) -> np.ndarray:
    return op.data if isinstance(op, QOperator) else np.asarray(op)


def fock_annihilation(n_fock: int) -> np.ndarray:
    """Bare oscillator annihilation matrix, a|n> = sqrt(n)|n-1>."""
    return np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), 1).astype(complex)


def fock_position(n_fock: int) -> np.ndarray:
    """Dimensionless position a + a^dag on the bare oscillator space."""
    a = fock_annihilation(n_fock)
    return a + a.conj().T


def fock_plane_wave(n_fock: int, eta: float, sign: int = 1) -> np.ndarray:
    """exp(sign * i * eta * (a + a^dag)) on the bare oscillator space.

    Computed by eigendecomposition of the Hermitian generator, which is exact
    within the truncated space.
    """
    evals, evecs = np.linalg.eigh(fock_position(n_fock).real)
    return (evecs * np.exp(1j * sign * eta * evals)) @ evecs.T.astype(complex)


def fock_standing_wave(n_fock: int, eta: float) -> np.ndarray:
    """sin(eta * (a + a^dag)) via (e^{i eta X} - e^{-i eta X}) / 2i."""
    return (fock_plane_wave(n_fock, eta, +1) - fock_plane_wave(n_fock, eta, -1)) / 2j


def annihilation(dims: SpaceDims) -> QOperator:
    """identity_atom tensor a."""
    return QOperator(dims, np.kron(np.eye(3), fock_annihilation(dims.n_fock)))


def number(dims: SpaceDims) -> QOperator:
    """identity_atom tensor a^dag a."""
    a = fock_annihilation(dims.n_fock)
    return QOperator(dims, np.kron(np.eye(3), a.conj().T @ a))


def identity(dims: SpaceDims) -> QOperator:
    return QOperator(dims, np.eye(dims.dim, dtype=complex))


def atomic_matrix(i: int, j: int) -> np.ndarray:
    """Bare 3x3 matrix |i><j|."""
    m = np.zeros((3, 3), dtype=complex)
    m[i, j] = 1.0
    return m


def atomic(dims: SpaceDims, i: int, j: int) -> QOperator:
    """|i><j| on the electronic factor, identity on the motion."""
    if not (0 <= i < 3 and 0 <= j < 3):
        raise ValueError("level indices must be in {0, 1, 2}")
    return QOperator(dims, np.kron(atomic_matrix(i, j), np.eye(dims.n_fock)))


def plane_wave(dims: SpaceDims, eta: float, sign: int = 1) -> QOperator:
    """exp(sign * i * eta * (a + a^dag)) tensored with the atomic identity."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return QOperator(dims, np.kron(np.eye(3), fock_plane_wave(dims.n_fock, eta, sign)))


def standing_wave(dims: SpaceDims, eta: float) -> QOperator:
    """sin(eta * (a + a^dag)) tensored with the atomic identity."""
    return QOperator(dims, np.kron(np.eye(3), fock_standing_wave(dims.n_fock, eta)))
