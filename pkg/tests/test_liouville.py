import numpy as np
import pytest
from scipy.integrate import solve_ivp, trapezoid

import motionjumps as mj
from motionjumps.hilbert import QOperator, SpaceDims, atomic_matrix
from motionjumps.liouville import (dipole_quadrature, spost, spre, unvec, vec)


@pytest.fixture(scope="module")
def p8():
    return mj.figure2_params(n_fock=8)


@pytest.fixture(scope="module")
def L8(p8):
    return mj.build_liouvillian(p8)


def test_hamiltonian_hermitian(p8):
    H = mj.build_hamiltonian(p8).data
    assert np.linalg.norm(H - H.conj().T) < 1e-12


def test_hamiltonian_zero_eta_blocks(p8):
    H = mj.build_hamiltonian(p8.with_(eta1=0.0, eta2=0.0)).data
    nf = p8.n_fock
    # standing-wave coupling to |2> vanishes at the node
    assert np.linalg.norm(H[2 * nf:, :nf]) == 0.0
    # running-wave coupling is purely atomic (identity on the motion)
    blk = H[nf:2 * nf, :nf]
    assert np.allclose(blk, (p8.omega1 / 2) * np.eye(nf))


def test_hamiltonian_perpendicular_standing_wave(p8):
    H = mj.build_hamiltonian(p8.with_(phi2=np.pi / 2)).data
    nf = p8.n_fock
    assert np.linalg.norm(H[2 * nf:, :nf]) < 1e-16


def test_dipole_quadrature_normalization_and_w2():
    u, w = dipole_quadrature(3)
    assert np.sum(w) == pytest.approx(1.0, abs=1e-14)
    assert mj.dipole_w2(3) == pytest.approx(0.4, abs=1e-14)
    assert mj.dipole_w2(8) == pytest.approx(2.0 / 5.0, abs=1e-14)


def test_dissipator_zero_eta_reduces_to_bare_decay(p8):
    q = p8.with_(eta1=0.0, eta2=0.0)
    K = mj.build_dissipator(q).data
    nf = q.n_fock
    eye = np.eye(nf)
    ref = np.zeros_like(K)
    for j, gam in ((1, q.gamma1), (2, q.gamma2)):
        S = np.kron(atomic_matrix(0, j), eye)
        P = np.kron(atomic_matrix(j, j), eye)
        ref += gam / 2 * (2 * np.kron(S.conj(), S) - spre(P) - spost(P))
    assert np.linalg.norm(K - ref) < 1e-12


def test_trace_preservation_on_random_states(p8, L8):
    d = L8.dims.dim
    rng = np.random.default_rng(0)
    for _ in range(20):
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = A + A.conj().T
        assert abs(np.trace(L8(rho))) < 1e-10 * np.linalg.norm(rho)


def test_trace_row_annihilates_liouvillian(L8):
    row = vec(np.eye(L8.dims.dim))
    assert np.linalg.norm(row @ L8.data) < 1e-10 * np.linalg.norm(L8.data)


def test_hermiticity_preservation(p8, L8):
    rng = np.random.default_rng(1)
    d = L8.dims.dim
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    out_dag = L8(A).conj().T
    out_of_dag = L8(A.conj().T)
    assert np.abs(out_dag - out_of_dag).max() < 1e-12


@pytest.fixture(scope="module")
def eigs8(L8):
    return np.linalg.eigvals(L8.data)


def test_spectrum_in_left_half_plane(eigs8):
    assert eigs8.real.max() < 1e-8


def test_unique_zero_eigenvalue(eigs8):
    scale = np.abs(eigs8).max()
    assert np.sum(np.abs(eigs8) < 1e-8 * scale) == 1


def test_conjugate_pair_symmetry(eigs8):
    for lam in eigs8[np.abs(eigs8.imag) > 1e-8][:40]:
        assert np.min(np.abs(eigs8 - np.conj(lam))) < 1e-8


def test_steady_state_properties(p8, L8):
    rho = mj.steady_state(L8)
    assert np.linalg.norm(L8(rho.data)) < 1e-10 * np.linalg.norm(L8.data)
    assert rho.trace() == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(rho.data - rho.data.conj().T) < 1e-12
    evals = np.linalg.eigvalsh(rho.data)
    assert evals.min() > -1e-12


@pytest.mark.xfail(strict=True, reason=(
    "Documented model-level discrepancy: the rate-equation mean phonon number "
    "(0.291) and the full-Liouvillian steady state (0.380) differ by 31% at "
    "the reference parameters.  The gap is converged in n_fock, scales as "
    "eta^2 with a 1/gamma2-enhanced coefficient (shelved population ~ "
    "T_D/(T_B+T_D) = 4.4% carries a hot motional distribution), and vanishes "
    "as eta -> 0.  See notes in the repo root."))
def test_steady_state_mean_phonon_fig2(exact10):
    rho = exact10["rho_st"]
    n_op = mj.number(rho.dims)
    nbar = float(np.trace(n_op.data @ rho.data).real)
    assert nbar == pytest.approx(0.3, abs=0.05)


def test_steady_state_mean_phonon_converges_to_rate_equation():
    """As eta -> 0 the exact steady state approaches the rate-equation value."""
    p = mj.figure2_params(n_fock=10).with_(eta1=0.0125, eta2=0.0125)
    rho = mj.steady_state(mj.build_liouvillian(p))
    nbar = float(np.trace(mj.number(rho.dims).data @ rho.data).real)
    rate = mj.cooling_rates(p).n_bar
    assert nbar == pytest.approx(rate, rel=0.03)


def test_non_unique_steady_state_at_zero_eta(p8):
    L = mj.build_liouvillian(p8.with_(eta1=0.0, eta2=0.0))
    with pytest.raises(mj.NonUniqueSteadyState):
        mj.steady_state(L)


def test_spectral_decomposition_completeness(exact10):
    dec = exact10["decomposition"]
    d = dec.dims.dim
    rng = np.random.default_rng(2)
    for _ in range(10):
        X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        c = np.einsum("kij,ji->k", dec.lefts, X)
        rec = np.einsum("k,kij->ij", c, dec.rights)
        assert np.abs(rec - X).max() < 1e-8 * np.abs(X).max()


def test_left_element_at_zero_is_identity(exact10):
    dec = exact10["decomposition"]
    k = int(np.argmin(np.abs(dec.eigenvalues)))
    left = dec.lefts[k]
    left = left / left[0, 0]
    assert np.abs(left - np.eye(dec.dims.dim)).max() < 1e-8


def test_zero_eta_spectrum_contains_internal_lattice(p8):
    """At eta = 0 the eigenvalues are lambda_I + i * integer."""
    q = p8.with_(eta1=0.0, eta2=0.0, n_fock=5)
    lams = np.linalg.eigvals(mj.build_liouvillian(q).data)
    internal = mj.internal_eigensystem(q).eigenvalues
    for lam_i in internal:
        for ell in (-2, -1, 0, 1, 2):
            target = lam_i + 1j * ell
            assert np.min(np.abs(lams - target)) < 1e-8


def test_evolve_matches_rk4_stepping(p8):
    """Eigendecomposition propagation vs fixed-step 4th-order integration."""
    q = p8.with_(n_fock=8)
    L = mj.build_liouvillian(q)
    dec = mj.spectral_decomposition(L)
    rng = np.random.default_rng(4)
    d = L.dims.dim
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho0 = A @ A.conj().T
    rho0 /= np.trace(rho0)
    t_end = 10.0 / q.gamma2
    h = 0.05
    n = int(np.ceil(t_end / h))
    y = vec(rho0).copy()
    Ld = L.data
    for _ in range(n):
        k1 = Ld @ y
        k2 = Ld @ (y + 0.5 * h * k1)
        k3 = Ld @ (y + 0.5 * h * k2)
        k4 = Ld @ (y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    ref = dec.evolve(rho0, np.array([n * h]))[0]
    assert np.abs(unvec(y, d) - ref).max() < 1e-6


def test_correlation_spectrum_sum_rule(exact10):
    p, dec, rho = exact10["params"], exact10["decomposition"], exact10["rho_st"]
    D = mj.dipole_operator(p, 1)
    res = mj.correlation_spectrum(dec, QOperator(dec.dims, D.full), rho,
                                  np.linspace(-1, 1, 11))
    expect = np.trace(D.full.conj().T @ D.full @ rho.data)
    assert res.metadata["total_signal"] == pytest.approx(complex(expect), abs=1e-8)


def test_correlation_spectrum_positive(exact10):
    p, dec, rho = exact10["params"], exact10["decomposition"], exact10["rho_st"]
    D = mj.dipole_operator(p, 1)
    grid = np.linspace(-15, 15, 501)
    res = mj.correlation_spectrum(dec, QOperator(dec.dims, D.full), rho, grid)
    assert res.total.min() > -1e-10 * res.total.max()


def test_mollow_limit_against_time_domain_oracle():
    """At eta = 0 the transition-1 spectrum is the bare-atom (Mollow-type)
    spectrum; check the resolvent curve against direct integration of the
    regression correlator."""
    p = mj.SystemParams(eta1=0.0, eta2=0.0, n_fock=2)
    L = mj.build_liouvillian(p)
    rho = np.kron(mj.internal_steady_state(p).rho_st,
                  np.diag([1.0, 0.0])).astype(complex)
    D = np.kron(atomic_matrix(0, 1), np.eye(2))
    grid = np.linspace(-10, 10, 81)
    dec = mj.spectral_decomposition(L)
    res = mj.correlation_spectrum(dec, QOperator(L.dims, D),
                                  QOperator(L.dims, rho), grid)
    # oracle: integrate d/dt vec(C) = L vec(C) from C(0) = D rho and Fourier it
    t_end, n_t = 2500.0, 12001
    ts = np.linspace(0.0, t_end, n_t)
    sol = solve_ivp(lambda t, y: L.data @ y, (0, t_end), vec(D @ rho),
                    t_eval=ts, rtol=1e-10, atol=1e-12)
    corr = np.einsum("ij,jit->t", D.conj().T,
                     sol.y.reshape(6, 6, n_t, order="F"))
    elastic = res.metadata["elastic_weight"]
    oracle = np.array([trapezoid((np.exp(-1j * w * ts) * (corr - elastic)).real, ts)
                       for w in grid])
    assert np.abs(oracle - res.total).max() < 1e-4 * res.total.max()
