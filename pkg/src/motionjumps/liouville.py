"""Full master-equation Liouvillian, steady state, and spectral machinery.

Vectorization is column-stacking throughout: ``vec(X)[i + d*j] = X[i, j]``,
so ``vec(A @ X @ B) = kron(B.T, A) @ vec(X)`` and the coherent part of the
generator is ``-i (kron(I, H) - kron(H.T, I))``.

This module is the exact numerical oracle against which every perturbative
result is checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eig

from .errors import NearDefective, NonUniqueSteadyState
from .hilbert import (QOperator, SpaceDims, atomic_matrix, fock_annihilation,
                      fock_plane_wave, fock_standing_wave)
from .params import SystemParams

DEFAULT_QUAD_ORDER = 8


def vec(X: np.ndarray) -> np.ndarray:
    """Column-stack an operator into a vector."""
    return np.asarray(X).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    if d is None:
        d = round(np.sqrt(v.size))
    return v.reshape((d, d), order="F")


def spre(A: np.ndarray) -> np.ndarray:
    """Superoperator for left multiplication, vec(A X)."""
    return np.kron(np.eye(A.shape[0], dtype=complex), A)


def spost(A: np.ndarray) -> np.ndarray:
    """Superoperator for right multiplication, vec(X A)."""
    return np.kron(A.T, np.eye(A.shape[0], dtype=complex))


def dipole_pattern(u):
    """Normalized dipole radiation pattern w(u) = 3(1 + u^2)/8, u = cos(theta)."""
    return 3.0 * (1.0 + np.asarray(u) ** 2) / 8.0


def dipole_quadrature(quad_order: int = DEFAULT_QUAD_ORDER):
    """Gauss-Legendre nodes on [-1, 1] and weights already folded with w(u)."""
    if quad_order < 2:
        raise ValueError("quad_order must be >= 2")
    u, w = np.polynomial.legendre.leggauss(quad_order)
    return u, w * dipole_pattern(u)


def dipole_w2(quad_order: int = DEFAULT_QUAD_ORDER) -> float:
    """Second angular moment of the dipole pattern, int w(u) u^2 du = 2/5."""
    u, w = dipole_quadrature(quad_order)
    return float(np.sum(w * u**2))


@dataclass
class SuperOperator:
    """Dense superoperator on vectorized operators."""

    dims: SpaceDims
    data: np.ndarray

    def __post_init__(self):
        d2 = self.dims.dim ** 2
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (d2, d2):
            raise ValueError(f"superoperator shape {self.data.shape} inconsistent with dims")

    def __call__(self, X: np.ndarray) -> np.ndarray:
        """Apply to an operator (matrix in, matrix out)."""
        return unvec(self.data @ vec(X), self.dims.dim)


def build_hamiltonian(p: SystemParams) -> QOperator:
    """Full Hamiltonian: trap + detunings + both laser couplings.

    H = (a^dag a + 1/2) + delta1 |1><1| + delta2 |2><2|
        + (Omega1/2) [|1><g| e^{i eta1 cos(phi1) X} + h.c.]
        + (Omega2/2) sin(eta2 cos(phi2) X) [|2><g| + h.c.]
    with X = a + a^dag.  The standing-wave node sits at the trap center.
    """
    dims = SpaceDims(3, p.n_fock)
    nf = p.n_fock
    a = fock_annihilation(nf)
    eye_f = np.eye(nf)
    Epl = fock_plane_wave(nf, p.eta1 * np.cos(p.phi1), +1)
    Ssw = fock_standing_wave(nf, p.eta2 * np.cos(p.phi2))
    H = (np.kron(np.eye(3), a.conj().T @ a + 0.5 * eye_f)
         + p.delta1 * np.kron(atomic_matrix(1, 1), eye_f)
         + p.delta2 * np.kron(atomic_matrix(2, 2), eye_f)
         + (p.omega1 / 2) * (np.kron(atomic_matrix(1, 0), Epl)
                             + np.kron(atomic_matrix(0, 1), Epl.conj().T))
         + (p.omega2 / 2) * np.kron(atomic_matrix(2, 0) + atomic_matrix(0, 2), Ssw))
    return QOperator(dims, H)


def build_dissipator(p: SystemParams, quad_order: int = DEFAULT_QUAD_ORDER) -> SuperOperator:
    """Spontaneous-decay superoperator with recoil.

    K rho = sum_j gamma_j/2 (2 |g><j| rho_j |j><g| - {|j><j|, rho}) where
    rho_j averages the photon-recoil kick e^{-i eta_j u X} rho e^{+i eta_j u X}
    over emission directions u with the dipole pattern, evaluated by
    Gauss-Legendre quadrature.
    """
    dims = SpaceDims(3, p.n_fock)
    d2 = dims.dim ** 2
    u_nodes, w_nodes = dipole_quadrature(quad_order)
    K = np.zeros((d2, d2), dtype=complex)
    eye_f = np.eye(p.n_fock)
    for j, gam, eta in ((1, p.gamma1, p.eta1), (2, p.gamma2, p.eta2)):
        P = np.kron(atomic_matrix(j, j), eye_f)
        K -= gam / 2 * (spre(P) + spost(P))
        for u, w in zip(u_nodes, w_nodes):
            E = np.kron(atomic_matrix(0, j), fock_plane_wave(p.n_fock, eta * u, -1))
            K += gam * w * np.kron(E.conj(), E)
    return SuperOperator(dims, K)


def build_liouvillian(p: SystemParams, quad_order: int = DEFAULT_QUAD_ORDER) -> SuperOperator:
    """Full generator L rho = -i[H, rho] + K rho."""
    H = build_hamiltonian(p).data
    L = -1j * (spre(H) - spost(H)) + build_dissipator(p, quad_order).data
    return SuperOperator(SpaceDims(3, p.n_fock), L)


def steady_state(L: SuperOperator, null_tol: float = 1e-10) -> QOperator:
    """Unique trace-one steady state from the null space of L.

    Raises NonUniqueSteadyState when the null space dimension differs from
    one (relative singular-value threshold ``null_tol``).
    """
    d = L.dims.dim
    _, s, Vh = np.linalg.svd(L.data)
    null_mask = s < null_tol * s[0]
    n_null = int(null_mask.sum())
    if n_null != 1:
        raise NonUniqueSteadyState(f"null space dimension {n_null}, expected 1")
    rho = unvec(Vh[-1].conj(), d)
    rho = rho / np.trace(rho)
    return QOperator(L.dims, (rho + rho.conj().T) / 2)


@dataclass
class SpectralDecomposition:
    """Biorthonormal eigen-element triples of a superoperator.

    ``Tr{lefts[k] @ rights[j]} = delta_{kj}``; projector action is
    P^k X = rights[k] * Tr{lefts[k] @ X}.
    """

    dims: SpaceDims
    eigenvalues: np.ndarray   # (d^2,)
    rights: np.ndarray        # (d^2, d, d)
    lefts: np.ndarray         # (d^2, d, d)

    def project(self, k: int, X: np.ndarray) -> np.ndarray:
        return self.rights[k] * np.trace(self.lefts[k] @ X)

    def evolve(self, rho0: np.ndarray, times: np.ndarray) -> np.ndarray:
        """e^{L t} rho0 on a time grid, shape (len(times), d, d)."""
        c = np.einsum("kij,ji->k", self.lefts, rho0)
        phases = np.exp(np.multiply.outer(np.asarray(times), self.eigenvalues))
        return np.einsum("tk,kij->tij", phases * c, self.rights)


def spectral_decomposition(L: SuperOperator, pair_tol: float = 1e-8) -> SpectralDecomposition:
    """Eigendecompose L with exactly biorthonormalized left elements.

    Left eigenvectors are taken as rows of the inverse of the right
    eigenvector matrix, which enforces the trace pairing exactly even in
    degenerate (but diagonalizable) subspaces.  Raises NearDefective when a
    matched unit-normalized pair has |Tr{left @ right}| < ``pair_tol``.
    """
    d = L.dims.dim
    w, V = eig(L.data)
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    try:
        U = np.linalg.inv(V)
    except np.linalg.LinAlgError as exc:
        raise NearDefective("right eigenvector matrix is singular") from exc
    pair_size = 1.0 / np.linalg.norm(U, axis=1)  # |Tr{l_unit r_unit}| per pair
    if pair_size.min() < pair_tol:
        raise NearDefective(
            f"matched left/right pairing as small as {pair_size.min():.2e}")
    rights = np.array([unvec(V[:, k], d) for k in range(d * d)])
    lefts = np.array([unvec(U[k, :], d).T for k in range(d * d)])
    return SpectralDecomposition(L.dims, w, rights, lefts)


def correlation_spectrum(L, Dop: QOperator, rho_st: QOperator, grid: np.ndarray,
                         zero_tol: float = 1e-8):
    """Exact emission spectrum via the quantum regression theorem.

    S(delta_omega) = Re sum_lambda F(lambda) / (i delta_omega - lambda) with
    F(lambda) = Tr{D^dag P^lambda D rho_st}.  The lambda = 0 (elastic) term is
    a delta at the laser frequency and is returned as a separate scalar weight
    in the result metadata, not added to the curve.

    ``L`` may be a SuperOperator or a precomputed SpectralDecomposition.
    """
    from .spectrum import SpectrumResult  # local import to avoid a cycle

    decomp = L if isinstance(L, SpectralDecomposition) else spectral_decomposition(L)
    D = Dop.data
    Drho = D @ rho_st.data
    F = np.einsum("ij,kji->k", D.conj().T, decomp.rights) \
        * np.einsum("kij,ji->k", decomp.lefts, Drho)
    scale = np.abs(decomp.eigenvalues).max()
    elastic = np.abs(decomp.eigenvalues) < zero_tol * scale
    grid = np.asarray(grid, dtype=float)
    denom = 1j * grid[:, None] - decomp.eigenvalues[None, ~elastic]
    curve = np.sum((F[None, ~elastic] / denom).real, axis=1)
    return SpectrumResult(
        grid=grid,
        total=curve,
        components={"inelastic": curve},
        metadata={
            "elastic_weight": float(np.sum(F[elastic]).real),
            "total_signal": complex(np.sum(F)),
            "method": "exact",
        },
    )
