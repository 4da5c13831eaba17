"""Analytic eigensystem of the internal (atom-at-rest) Liouvillian.

The internal dynamics couples only the g <-> 1 transition coherently (the
standing wave vanishes at the trap center), so the 9x9 generator decomposes
into closed sectors: the dressed g-1 two-level block, the decay of state 2,
and the coherences between state 2 and the dressed states.  Five of the nine
eigen-element triples have closed forms; the remaining two-level-subsystem
triple is obtained from a small numerical eigensolve.

Left and right eigen-elements are biorthonormal under the plain trace pairing
Tr{left @ right} = delta (no conjugation: the dual basis of a non-Hermitian
operator).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInternal
from .hilbert import atomic_matrix
from .params import SystemParams

DEGENERACY_TOL = 1e-8


def saturation(p: SystemParams) -> float:
    """Saturation parameter s = (Omega1^2/2) / (delta1^2 + gamma1^2/4)."""
    return (p.omega1**2 / 2) / (p.delta1**2 + p.gamma1**2 / 4)


def dressed_frequencies(p: SystemParams) -> tuple[complex, complex]:
    """Complex eigenfrequencies omega_+/- of the driven g-1 block.

    omega_+- = z/2 +- sqrt(z^2 + Omega1^2)/2 with z = delta1 - i*gamma1/2.
    The branch is fixed by continuity from Omega1 = 0, where
    omega_+ -> z and omega_- -> 0.
    """
    z = p.delta1 - 0.5j * p.gamma1
    root = np.sqrt(z**2 + p.omega1**2 + 0j)
    # continuity: keep the root on the same side as z itself
    if np.real(np.conj(z) * root) < 0:
        root = -root
    return 0.5 * z + 0.5 * root, 0.5 * z - 0.5 * root


def dressed_states(p: SystemParams) -> dict:
    """Dressed kets |+->, their non-conjugated duals, and frequencies.

    Components are in the (g, 1, 2) basis.  Duals pair bilinearly:
    sum_k dual[k] * ket[k] = 1, and cross pairings vanish.
    """
    om_p, om_m = dressed_frequencies(p)
    kets, duals = {}, {}
    for sig, om in (("+", om_p), ("-", om_m)):
        norm = np.sqrt(om**2 + p.omega1**2 / 4)
        vec = np.array([p.omega1 / 2, om, 0.0], dtype=complex) / norm
        kets[sig] = vec
        duals[sig] = vec.copy()  # same components, no conjugation
    return {"omega": {"+": om_p, "-": om_m}, "ket": kets, "dual": duals}


@dataclass
class InternalSteadyState:
    """Closed-form internal steady state and its normalization."""

    rho_st: np.ndarray
    N_st: float


def internal_steady_state(p: SystemParams) -> InternalSteadyState:
    """Steady state of the driven g-1 transition; state 2 is unpopulated."""
    N = p.gamma1**2 + 4 * p.delta1**2 + 2 * p.omega1**2
    coh = p.omega1 * (2 * p.delta1 + 1j * p.gamma1)
    rho = (p.omega1**2 * atomic_matrix(1, 1)
           + (N - p.omega1**2) * atomic_matrix(0, 0)
           - coh * atomic_matrix(1, 0) - np.conj(coh) * atomic_matrix(0, 1)) / N
    return InternalSteadyState(rho_st=rho, N_st=float(N))


def internal_hamiltonian_nh(p: SystemParams) -> np.ndarray:
    """Non-Hermitian 3x3 effective Hamiltonian of the internal motion at x=0."""
    H = (p.delta1 * atomic_matrix(1, 1) + p.delta2 * atomic_matrix(2, 2)
         + (p.omega1 / 2) * (atomic_matrix(1, 0) + atomic_matrix(0, 1)))
    H = H - 0.5j * (p.gamma1 * atomic_matrix(1, 1) + p.gamma2 * atomic_matrix(2, 2))
    return H


def internal_liouvillian(p: SystemParams) -> np.ndarray:
    """Dense 9x9 internal Liouvillian (column-stacking convention)."""
    H = (p.delta1 * atomic_matrix(1, 1) + p.delta2 * atomic_matrix(2, 2)
         + (p.omega1 / 2) * (atomic_matrix(1, 0) + atomic_matrix(0, 1)))
    eye = np.eye(3)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for j, gam in ((1, p.gamma1), (2, p.gamma2)):
        S = atomic_matrix(0, j)
        P = atomic_matrix(j, j)
        L += gam / 2 * (2 * np.kron(S.conj(), S) - np.kron(eye, P) - np.kron(P.T, eye))
    return L


@dataclass
class InternalEigensystem:
    """All nine eigen-element triples of the internal Liouvillian.

    ``eigenvalues[k]``, ``rights[k]``, ``lefts[k]`` are matched triples with
    Tr{lefts[k] @ rights[k']} = delta_{kk'}.  Fixed ordering:
    0 steady state, 1 decay of state 2, 2/3 coherences (+,-) at lambda_1pm,
    4/5 their conjugates at lambda_2pm, 6-8 the g-1 two-level triple.
    """

    eigenvalues: np.ndarray          # (9,) complex
    rights: np.ndarray               # (9, 3, 3)
    lefts: np.ndarray                # (9, 3, 3)
    omega_plus: complex
    omega_minus: complex
    omega_2: complex
    lambda_1p: complex
    lambda_1m: complex
    lambda_2p: complex
    lambda_2m: complex
    lambda_decay: complex
    lambda_tls: np.ndarray           # (3,) complex
    upsilon: complex
    varsigma: complex


def _tls_triples(p: SystemParams):
    """Nonzero eigen-elements of the g-1 two-level block, embedded in 3x3.

    The block closes under the Liouvillian for right elements; left elements
    acquire a |2><2| component c = gamma2 * sigma_gg / (lambda + gamma2)
    because decay from state 2 feeds the ground-state population.
    """
    L = internal_liouvillian(p)
    idx = np.array([0, 1, 3, 4])  # vectorized (g,g), (1,g), (g,1), (1,1)
    block = L[np.ix_(idx, idx)]
    w, V = np.linalg.eig(block)
    U = np.linalg.inv(V)  # rows are biorthonormal left eigenvectors
    order = np.argsort(np.abs(w))
    out = []
    for k in order[1:]:  # skip the zero mode (steady state handled analytically)
        lam = w[k]
        rvec = np.zeros(9, dtype=complex)
        rvec[idx] = V[:, k]
        right = rvec.reshape((3, 3), order="F")
        # left element: unvec of the dual row gives its transpose
        lvec = np.zeros(9, dtype=complex)
        lvec[idx] = U[k, :]
        left = lvec.reshape((3, 3), order="F").T
        left = left + (p.gamma2 * left[0, 0] / (lam + p.gamma2)) * atomic_matrix(2, 2)
        out.append((lam, right, left))
    # real eigenvalue first, then the conjugate pair
    out.sort(key=lambda t: abs(t[0].imag))
    return out


def internal_eigensystem(p: SystemParams) -> InternalEigensystem:
    """Assemble the nine (eigenvalue, right, left) triples."""
    if abs(p.gamma1 - 2 * p.gamma2) < 1e-12:
        raise DegenerateInternal("gamma1 = 2*gamma2: decay eigen-element coefficients diverge")
    om_p, om_m = dressed_frequencies(p)
    om_2 = p.delta2 - 0.5j * p.gamma2
    lam_1p = (om_p - np.conj(om_2)) / 1j
    lam_1m = (om_m - np.conj(om_2)) / 1j
    lam_2p = (om_2 - np.conj(om_p)) / 1j
    lam_2m = (om_2 - np.conj(om_m)) / 1j
    lam_dec = -p.gamma2 + 0j

    ds = dressed_states(p)
    e2 = np.array([0.0, 0.0, 1.0], dtype=complex)

    sst = internal_steady_state(p)
    ups = (p.gamma1 - p.gamma2) / (p.gamma1 - 2 * p.gamma2)
    vsg = p.omega1 / (2 * p.delta1 + 1j * (p.gamma1 - 2 * p.gamma2))
    rho_dec = atomic_matrix(2, 2) - (
        abs(vsg) ** 2 * atomic_matrix(1, 1)
        + (ups + abs(vsg) ** 2) * atomic_matrix(0, 0)
        - (ups * np.conj(vsg) * atomic_matrix(1, 0)
           + np.conj(ups * np.conj(vsg)) * atomic_matrix(0, 1))
    ) / (ups + 2 * abs(vsg) ** 2)

    triples = [
        (0.0 + 0j, sst.rho_st, np.eye(3, dtype=complex)),
        (lam_dec, rho_dec, atomic_matrix(2, 2)),
    ]
    for sig, lam in (("+", lam_1p), ("-", lam_1m)):
        right = np.outer(ds["ket"][sig], e2)
        left = np.outer(e2, ds["dual"][sig])
        triples.append((lam, right, left))
    # Hermiticity preservation maps eigen-elements at lambda to lambda*
    # through the adjoint, giving the 2 <- (g,1) coherence sector
    for sig, lam in (("+", lam_2p), ("-", lam_2m)):
        right = np.outer(ds["ket"][sig], e2).conj().T
        left = np.outer(e2, ds["dual"][sig]).conj().T
        triples.append((lam, right, left))
    triples.extend(_tls_triples(p))

    lam = np.array([t[0] for t in triples])
    diffs = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(diffs, np.inf)
    if diffs.min() < DEGENERACY_TOL:
        i, j = np.unravel_index(np.argmin(diffs), diffs.shape)
        raise DegenerateInternal(
            f"internal eigenvalues {lam[i]:.3e} and {lam[j]:.3e} coincide within {DEGENERACY_TOL}")

    return InternalEigensystem(
        eigenvalues=lam,
        rights=np.array([t[1] for t in triples]),
        lefts=np.array([t[2] for t in triples]),
        omega_plus=om_p,
        omega_minus=om_m,
        omega_2=om_2,
        lambda_1p=lam_1p,
        lambda_1m=lam_1m,
        lambda_2p=lam_2p,
        lambda_2m=lam_2m,
        lambda_decay=lam_dec,
        lambda_tls=lam[6:9],
        upsilon=complex(ups),
        varsigma=complex(vsg),
    )
