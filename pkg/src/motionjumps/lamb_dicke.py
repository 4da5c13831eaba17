"""Lamb-Dicke expansion of the Liouvillian and zero-order projector algebra.

The generator splits as L = L0 + L1 + L2 + O(eta^3), where L0 decouples the
internal (atom at rest) and external (bare oscillator) dynamics, L1 is linear
in the position and L2 collects the quadratic coupling plus recoil diffusion.

Zero-order eigen-elements factorize as (internal triple) x |n><n+l|, with
external eigenvalue i*l (trap units).  This module provides coefficient-space
transforms in that basis, the grouping of degenerate zero-order eigenvalues,
reduced resolvents, second-order effective generators per group, and the
perturbative steady-state corrections.  All spectrum and cooling perturbation
theory is built on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import QOperator, SpaceDims, atomic_matrix, fock_position
from .internal import InternalEigensystem, internal_eigensystem, internal_liouvillian
from .liouville import dipole_w2, spost, spre
from .params import SystemParams

GROUP_TOL = 1e-6          # zero-order eigenvalues within this are one subspace
FIRST_ORDER_TOL = 1e-9


@dataclass
class LDExpansion:
    """Pieces of the expansion (coefficient matrices on the 3-level space).

    ``v1`` and ``v2`` are the first and second derivatives of the laser
    coupling with respect to the dimensionless position X = a + a^dag, so the
    expansion terms are L1 = -i[v1 (x) X, .] and
    L2 = -i/2 [v2 (x) X^2, .] + K2.  ``k2_coeffs[j]`` multiplies the recoil
    diffusion sandwich of decay channel j.
    """

    L0_internal: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    k2_coeffs: dict
    w2: float


def expand(p: SystemParams) -> LDExpansion:
    """Expansion coefficients at the standing-wave node."""
    c1 = p.eta1 * np.cos(p.phi1)
    c2 = p.eta2 * np.cos(p.phi2)
    v1 = (1j * (p.omega1 / 2) * c1 * (atomic_matrix(1, 0) - atomic_matrix(0, 1))
          + (p.omega2 / 2) * c2 * (atomic_matrix(2, 0) + atomic_matrix(0, 2)))
    # standing wave has sin''(0) = 0: only the running wave survives at second order
    v2 = -(p.omega1 / 2) * c1**2 * (atomic_matrix(1, 0) + atomic_matrix(0, 1))
    w2 = dipole_w2()
    k2 = {1: p.gamma1 * p.eta1**2 * w2 / 2, 2: p.gamma2 * p.eta2**2 * w2 / 2}
    return LDExpansion(L0_internal=internal_liouvillian(p), v1=v1, v2=v2,
                       k2_coeffs=k2, w2=w2)


@dataclass
class Group:
    """One zero-order eigenvalue subspace (possibly several (k, l) pairs)."""

    gid: int
    value: complex
    pairs: list            # [(internal index k, external index l), ...]
    idx: tuple             # coordinate arrays (k_arr, n_arr, m_arr)

    @property
    def size(self) -> int:
        return len(self.idx[0])


class LambDickeFrame:
    """Working frame for perturbation theory in the zero-order eigenbasis.

    Coefficient arrays have shape (9, n_fock, n_fock); entry [k, n, m] is the
    component along (internal right k) x |n><m|, paired bilinearly with
    (internal left k) x |m><n|.
    """

    def __init__(self, p: SystemParams, eigsys: InternalEigensystem | None = None):
        self.p = p
        self.dims = SpaceDims(3, p.n_fock)
        self.eigsys = eigsys if eigsys is not None else internal_eigensystem(p)
        self.expansion = expand(p)
        nf = p.n_fock
        self._R = self.eigsys.rights          # (9, 3, 3)
        self._L = self.eigsys.lefts
        self._Xf = fock_position(nf)
        self._X2f = self._Xf @ self._Xf
        self._G1 = np.kron(self.expansion.v1, self._Xf)
        self._G2 = np.kron(self.expansion.v2, self._X2f)
        self._Xfull = np.kron(np.eye(3), self._Xf)
        self._X2full = np.kron(np.eye(3), self._X2f)

        n = np.arange(nf)
        self.lam0 = (self.eigsys.eigenvalues[:, None, None]
                     + 1j * (n[None, None, :] - n[None, :, None]))
        self.groups, self.group_id = self._build_groups()

    # ------------------------------------------------------------------
    # basis transforms

    def to_coeffs(self, X: np.ndarray) -> np.ndarray:
        """Expansion coefficients of an operator (supports batch leading axes)."""
        nf = self.p.n_fock
        X4 = np.asarray(X).reshape(X.shape[:-2] + (3, nf, 3, nf))
        return np.einsum("kac,...cnam->...knm", self._L, X4)

    def from_coeffs(self, c: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`to_coeffs`."""
        nf = self.p.n_fock
        X4 = np.einsum("...kpq,kab->...apbq", c, self._R)
        return X4.reshape(c.shape[:-3] + (3 * nf, 3 * nf))

    def dual_coeffs(self, A: np.ndarray) -> np.ndarray:
        """Coefficients of the functional X -> Tr{A X} against the right basis.

        Tr{A Y} = sum(dual_coeffs(A) * to_coeffs(Y)).
        """
        nf = self.p.n_fock
        A4 = np.asarray(A).reshape(3, nf, 3, nf)
        return np.einsum("amcn,kca->knm", A4, self._R)

    # ------------------------------------------------------------------
    # expansion terms acting on operators

    def apply_L1(self, X: np.ndarray) -> np.ndarray:
        return -1j * (self._G1 @ X - X @ self._G1)

    def apply_L2(self, X: np.ndarray) -> np.ndarray:
        out = -0.5j * (self._G2 @ X - X @ self._G2)
        T = 2 * self._Xfull @ X @ self._Xfull - self._X2full @ X - X @ self._X2full
        nf = self.p.n_fock
        g = slice(0, nf)
        for j, coef in self.expansion.k2_coeffs.items():
            blk = slice(j * nf, (j + 1) * nf)
            out[..., g, g] += coef * T[..., blk, blk]
        return out

    def dense_L1(self) -> np.ndarray:
        """L1 as a dense superoperator matrix (for small truncations)."""
        return -1j * (spre(self._G1) - spost(self._G1))

    def dense_L2(self) -> np.ndarray:
        """L2 (coupling + recoil diffusion) as a dense superoperator matrix."""
        out = -0.5j * (spre(self._G2) - spost(self._G2))
        for j, coef in self.expansion.k2_coeffs.items():
            S = np.kron(atomic_matrix(0, j), np.eye(self.p.n_fock))
            SX = S @ self._Xfull
            SX2 = S @ self._X2full
            out += coef * (2 * np.kron(SX.conj(), SX)
                           - np.kron(S.conj(), SX2) - np.kron(SX2.conj(), S))
        return out

    # ------------------------------------------------------------------
    # zero-order subspace structure

    def _build_groups(self):
        nf = self.p.n_fock
        pairs = [(k, ell) for k in range(9) for ell in range(-(nf - 1), nf)]
        values = np.array([self.eigsys.eigenvalues[k] + 1j * ell for k, ell in pairs])
        cluster = -np.ones(len(pairs), dtype=int)
        groups = []
        for i in np.lexsort((values.imag, values.real)):
            if cluster[i] >= 0:
                continue
            members = np.nonzero(np.abs(values - values[i]) < GROUP_TOL)[0]
            gid = len(groups)
            cluster[members] = gid
            karr, narr, marr = [], [], []
            for m in members:
                k, ell = pairs[m]
                n = np.arange(max(0, -ell), nf - max(0, ell))
                karr.append(np.full(n.size, k))
                narr.append(n)
                marr.append(n + ell)
            groups.append(Group(
                gid=gid,
                value=complex(np.mean(values[members])),
                pairs=[pairs[m] for m in members],
                idx=(np.concatenate(karr), np.concatenate(narr), np.concatenate(marr)),
            ))
        group_id = np.empty((9, nf, nf), dtype=int)
        for g in groups:
            group_id[g.idx] = g.gid
        return groups, group_id

    def group_of(self, lambda_i: complex, ell: int) -> Group:
        """The group containing internal eigenvalue lambda_i shifted by i*ell."""
        k = int(np.argmin(np.abs(self.eigsys.eigenvalues - lambda_i)))
        if abs(self.eigsys.eigenvalues[k] - lambda_i) > 1e-6:
            raise ValueError(f"{lambda_i} is not an internal eigenvalue")
        target = self.eigsys.eigenvalues[k] + 1j * ell
        for g in self.groups:
            if abs(g.value - target) < GROUP_TOL and (k, ell) in g.pairs:
                return g
        raise ValueError(f"no zero-order subspace at {target}")

    def zero_group(self) -> Group:
        return self.group_of(0.0, 0)

    def resolvent_weights(self, g: Group) -> np.ndarray:
        """1 / (lambda_g - lambda0) on the complement of group g, else 0."""
        w = np.zeros_like(self.lam0)
        outside = self.group_id != g.gid
        w[outside] = 1.0 / (g.value - self.lam0[outside])
        return w

    def project(self, g: Group, c: np.ndarray) -> np.ndarray:
        """Keep only group-g coordinates of a coefficient array."""
        out = np.zeros_like(c)
        out[g.idx] = c[g.idx]
        return out

    # ------------------------------------------------------------------
    # second-order structure

    def basis_rights(self, g: Group) -> np.ndarray:
        """Stacked operators of the group's zero-order right basis."""
        nf = self.p.n_fock
        d = 3 * nf
        out = np.zeros((g.size, d, d), dtype=complex)
        karr, narr, marr = g.idx
        for i in range(g.size):
            c = np.zeros((9, nf, nf), dtype=complex)
            c[karr[i], narr[i], marr[i]] = 1.0
            out[i] = self.from_coeffs(c)
        return out

    def effective_matrix(self, g: Group) -> np.ndarray:
        """Second-order generator P0 (L2 + L1 S L1) P0 in group coordinates."""
        R = self.basis_rights(g)
        Y = self.apply_L2(R)
        mid = self.to_coeffs(self.apply_L1(R)) * self.resolvent_weights(g)
        Y = Y + self.apply_L1(self.from_coeffs(mid))
        cy = self.to_coeffs(Y)
        return cy[(slice(None),) + g.idx].T  # M[i, j] = <left_i | Y_j>

    def branches(self, g: Group, cond_tol: float = 1e-10):
        """Diagonalize the effective generator: per-branch second-order data.

        Returns (lam2, rights, lefts), each row a branch, with rights/lefts
        biorthonormal vectors in group coordinates.  When the effective matrix
        is too close to defective the off-diagonal mixing is dropped and each
        coordinate becomes its own branch (keeps the summed weights exact).
        """
        M = self.effective_matrix(g)
        w, V = np.linalg.eig(M)
        V = V / np.linalg.norm(V, axis=0, keepdims=True)
        try:
            U = np.linalg.inv(V)
            ok = (1.0 / np.linalg.norm(U, axis=1)).min() >= cond_tol
        except np.linalg.LinAlgError:
            ok = False
        if not ok:
            eye = np.eye(g.size, dtype=complex)
            return np.diag(M).copy(), eye, eye
        return w, V.T.copy(), U  # branch b: right V[:, b], left U[b, :]


def project_zero_order(p: SystemParams, lambda_i: complex, ell: int, X) -> np.ndarray:
    """Apply the zero-order projector at (lambda_i, i*ell) to an operator.

    P X = sum_n (internal projector applied slicewise) |n><n| X |n+l><n+l|,
    realized by keeping the matching coefficients in the zero-order basis.
    """
    frame = LambDickeFrame(p)
    g = frame.group_of(lambda_i, ell)
    data = X.data if isinstance(X, QOperator) else np.asarray(X, dtype=complex)
    return frame.from_coeffs(frame.project(g, frame.to_coeffs(data)))


def first_order_vanishing_check(p: SystemParams, tol: float = FIRST_ORDER_TOL) -> bool:
    """Check P0 L1 P0 = 0 on every zero-order subspace.

    Returns False when any subspace couples to itself through L1, which
    happens at accidental degeneracies (an internal gap hitting a multiple of
    the trap frequency) where nondegenerate perturbation theory breaks down.
    """
    frame = LambDickeFrame(p)
    scale = max(1.0, float(np.linalg.norm(frame._G1)))
    for g in frame.groups:
        R = frame.basis_rights(g)
        c = frame.to_coeffs(frame.apply_L1(R))
        coupling = np.linalg.norm(c[(slice(None),) + g.idx])
        if coupling > tol * scale:
            return False
    return True


def steady_state_corrections(frame: LambDickeFrame, mu_st: np.ndarray):
    """Perturbative steady state rho0 + rho1 + rho2.

    rho0 = rho_st (x) mu_st, rho1 = S0 L1 rho0,
    rho2 = S0 (L1 rho1 + L2 rho0), with S0 the reduced resolvent at the
    zero-eigenvalue subspace (kernel components set to zero; they only matter
    at third order).  mu_st is the motional steady state of the cooling rate
    equation.
    """
    rho_st = frame.eigsys.rights[0]
    s0 = frame.resolvent_weights(frame.zero_group())
    rho0 = np.kron(rho_st, mu_st)
    rho1 = frame.from_coeffs(frame.to_coeffs(frame.apply_L1(rho0)) * s0)
    rho2 = frame.from_coeffs(
        frame.to_coeffs(frame.apply_L1(rho1) + frame.apply_L2(rho0)) * s0)
    return rho0, rho1, rho2
