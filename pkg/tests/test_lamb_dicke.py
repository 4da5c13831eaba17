import numpy as np
import pytest

import motionjumps as mj
from motionjumps.hilbert import atomic_matrix
from motionjumps.lamb_dicke import LambDickeFrame, steady_state_corrections
from motionjumps.liouville import spost, spre, vec, unvec


def _dense_L0(p):
    from motionjumps.hilbert import fock_annihilation
    nf = p.n_fock
    a = fock_annihilation(nf)
    eyef = np.eye(nf)
    H0 = (np.kron(np.eye(3), a.conj().T @ a + 0.5 * eyef)
          + p.delta1 * np.kron(atomic_matrix(1, 1), eyef)
          + p.delta2 * np.kron(atomic_matrix(2, 2), eyef)
          + (p.omega1 / 2) * np.kron(atomic_matrix(1, 0) + atomic_matrix(0, 1), eyef))
    L0 = -1j * (spre(H0) - spost(H0))
    for j, gam in ((1, p.gamma1), (2, p.gamma2)):
        S = np.kron(atomic_matrix(0, j), eyef)
        P = np.kron(atomic_matrix(j, j), eyef)
        L0 += gam / 2 * (2 * np.kron(S.conj(), S) - spre(P) - spost(P))
    return L0


def test_expansion_vanishes_at_zero_eta():
    exp = mj.expand(mj.figure2_params().with_(eta1=0.0, eta2=0.0))
    assert np.linalg.norm(exp.v1) == 0.0
    assert np.linalg.norm(exp.v2) == 0.0


def test_v2_has_no_standing_wave_part():
    exp = mj.expand(mj.figure2_params())
    assert exp.v2[2, 0] == 0.0 and exp.v2[0, 2] == 0.0
    assert abs(exp.v2[1, 0]) > 0


def test_reassembly_cubic_scaling():
    """||L_full - (L0+L1+L2)|| scales as eta^3."""
    norms = []
    etas = [0.02, 0.04, 0.08]
    for eta in etas:
        p = mj.figure2_params(n_fock=8).with_(eta1=eta, eta2=eta)
        fr = LambDickeFrame(p)
        Lsum = _dense_L0(p) + fr.dense_L1() + fr.dense_L2()
        norms.append(np.linalg.norm(mj.build_liouvillian(p).data - Lsum))
    ratios = [norms[i + 1] / norms[i] for i in range(2)]
    for r in ratios:
        assert r == pytest.approx(8.0, rel=0.25)  # doubling eta -> 2^3


def test_order_scaling_of_expansion_terms():
    """||L1|| ~ eta, ||L2|| ~ eta^2 over a decade."""
    etas = np.array([0.01, 0.02, 0.05, 0.1])
    n1, n2 = [], []
    for eta in etas:
        fr = LambDickeFrame(mj.figure2_params(n_fock=8).with_(eta1=eta, eta2=eta))
        n1.append(np.linalg.norm(fr.dense_L1()))
        n2.append(np.linalg.norm(fr.dense_L2()))
    s1 = np.polyfit(np.log(etas), np.log(n1), 1)[0]
    s2 = np.polyfit(np.log(etas), np.log(n2), 1)[0]
    assert s1 == pytest.approx(1.0, abs=0.02)
    assert s2 == pytest.approx(2.0, abs=0.02)


def test_k2_preserves_trace():
    fr = LambDickeFrame(mj.figure2_params(n_fock=8))
    rng = np.random.default_rng(0)
    d = 24
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    # K2 alone: subtract the commutator part
    full = fr.apply_L2(X)
    comm = -0.5j * (fr._G2 @ X - X @ fr._G2)
    assert abs(np.trace(full - comm)) < 1e-12 * np.linalg.norm(X)


@pytest.fixture(scope="module")
def frame():
    return LambDickeFrame(mj.figure2_params(n_fock=10))


def test_projector_idempotent(frame):
    p = frame.p
    rng = np.random.default_rng(1)
    d = 30
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    lam = frame.eigsys.lambda_1m
    P1 = mj.project_zero_order(p, lam, 1, X)
    P2 = mj.project_zero_order(p, lam, 1, P1)
    assert np.abs(P1 - P2).max() < 1e-9


def test_projector_fixes_zero_order_steady_state(frame):
    p = frame.p
    mu = mj.thermal_state(0.3, p.n_fock)
    rho0 = np.kron(mj.internal_steady_state(p).rho_st, mu)
    out = mj.project_zero_order(p, 0.0, 0, rho0)
    assert np.abs(out - rho0).max() < 1e-12


def test_projector_completeness(frame):
    rng = np.random.default_rng(2)
    d = 30
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    total = np.zeros_like(X)
    nf = frame.p.n_fock
    for lam in frame.eigsys.eigenvalues:
        for ell in range(-(nf - 1), nf):
            total += mj.project_zero_order(frame.p, lam, ell, X)
    assert np.abs(total - X).max() < 1e-9


def test_external_projector_action(frame):
    """P_E^{i ell} keeps exactly the |n><n+ell| diagonals."""
    nf = frame.p.n_fock
    rng = np.random.default_rng(5)
    X = np.kron(frame.eigsys.rights[0],
                rng.normal(size=(nf, nf)) + 1j * rng.normal(size=(nf, nf)))
    out = mj.project_zero_order(frame.p, 0.0, 2, X)
    out4 = out.reshape(3, nf, 3, nf)
    X4 = X.reshape(3, nf, 3, nf)
    for n in range(nf - 2):
        assert np.allclose(out4[:, n, :, n + 2], X4[:, n, :, n + 2], atol=1e-10)
    assert abs(out4[0, 0, 0, 0]) < 1e-12  # other diagonals removed


def test_first_order_vanishing_fig2_and_zero_eta():
    assert mj.first_order_vanishing_check(mj.figure2_params(n_fock=6))
    assert mj.first_order_vanishing_check(
        mj.figure2_params(n_fock=6).with_(eta1=0.0, eta2=0.0))


def test_first_order_vanishing_fails_at_engineered_resonance():
    """When an internal gap hits the trap frequency the zero-order subspaces
    merge and the linear coupling connects them."""
    gamma1 = 12.0
    omega1 = float(np.sqrt(1.0 + gamma1**2 / 4))  # dressed splitting = 1
    p = mj.figure2_params(n_fock=6).with_(delta1=0.0, omega1=omega1)
    eig = mj.internal_eigensystem(p)
    assert abs((eig.lambda_1p - eig.lambda_1m) + 1j) < 1e-10  # gap is -i*nu
    assert not mj.first_order_vanishing_check(p)


def test_steady_state_corrections_scaling():
    """rho0 + rho1 + rho2 approaches the exact steady state to O(eta^3)."""
    errs = []
    etas = [0.02, 0.04, 0.08]
    for eta in etas:
        p = mj.figure2_params(n_fock=10).with_(eta1=eta, eta2=eta)
        fr = LambDickeFrame(p)
        nb = mj.cooling_rates(p).n_bar
        mu = mj.thermal_state(nb, p.n_fock)
        r0, r1, r2 = steady_state_corrections(fr, mu)
        exact = mj.steady_state(mj.build_liouvillian(p)).data
        errs.append(np.linalg.norm(exact - (r0 + r1 + r2)))
    # cubic scaling within fit slop (the kernel choice contributes at eta^3)
    slope = np.polyfit(np.log(etas), np.log(errs), 1)[0]
    assert slope == pytest.approx(3.0, abs=0.5)


def test_corrections_are_traceless(frame):
    nb = 0.3
    mu = mj.thermal_state(nb, frame.p.n_fock)
    r0, r1, r2 = steady_state_corrections(frame, mu)
    assert abs(np.trace(r0) - 1.0) < 1e-12
    assert abs(np.trace(r1)) < 1e-12
    assert abs(np.trace(r2)) < 1e-12


def test_effective_generator_matches_cooling_rates(frame):
    """The second-order generator on the zero subspace is the cooling rate
    equation: its slowest nonzero eigenvalue is -W, the sideband subspace
    relaxes at -W/2."""
    rates = mj.cooling_rates(frame.p)
    g0 = frame.zero_group()
    lam2, _, _ = frame.branches(g0)
    lam2 = np.sort(lam2.real)
    assert abs(lam2[-1]) < 1e-12 * rates.W_total  # exact zero mode
    assert lam2[-2] == pytest.approx(-rates.W_total, rel=1e-4)
    g1 = frame.group_of(0.0, 1)
    lamb, _, _ = frame.branches(g1)
    slowest = lamb[np.argmax(lamb.real)]
    assert slowest.real == pytest.approx(-rates.W_total / 2, rel=1e-4)
