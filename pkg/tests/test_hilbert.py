import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import motionjumps as mj
from motionjumps.hilbert import (SpaceDims, fock_annihilation, fock_plane_wave,
                                 fock_standing_wave)

DIMS = SpaceDims(3, 12)


def test_annihilation_defining_elements():
    a2 = fock_annihilation(2)
    assert a2[0, 1] == 1.0
    assert np.all(a2[:, 0] == 0)  # a|0> = 0
    full = mj.annihilation(SpaceDims(3, 2)).data
    assert full.shape == (6, 6)
    # per-atomic-block structure
    assert full[0, 1] == 1.0 and full[2, 3] == 1.0 and full[4, 5] == 1.0


def test_commutator_below_truncation_edge():
    nf = DIMS.n_fock
    a = fock_annihilation(nf)
    comm = a @ a.conj().T - a.conj().T @ a
    sub = slice(0, nf - 1)
    assert np.linalg.norm(comm[sub, sub] - np.eye(nf - 1)) < 1e-12


def test_atomic_completeness_product_trace():
    tot = sum(mj.atomic(DIMS, i, i).data for i in range(3))
    assert np.allclose(tot, np.eye(DIMS.dim))
    prod = mj.atomic(DIMS, 1, 0) @ mj.atomic(DIMS, 0, 1)
    assert np.allclose(prod.data, mj.atomic(DIMS, 1, 1).data)
    assert mj.atomic(DIMS, 0, 0).trace() == pytest.approx(DIMS.n_fock)


def test_atomic_rejects_bad_levels():
    with pytest.raises(ValueError):
        mj.atomic(DIMS, 3, 0)


def test_plane_wave_identity_at_zero():
    assert np.allclose(mj.plane_wave(DIMS, 0.0).data, np.eye(DIMS.dim))


def test_plane_wave_vacuum_overlap():
    # <0|exp(i eta X)|0> = exp(-eta^2 / 2)
    eta = 0.05
    U = fock_plane_wave(12, eta, +1)
    assert U[0, 0] == pytest.approx(np.exp(-eta**2 / 2), abs=1e-10)


def test_plane_wave_inverse_pair():
    U = fock_plane_wave(12, 0.05, +1) @ fock_plane_wave(12, 0.05, -1)
    assert np.linalg.norm(U - np.eye(12)) < 1e-12


def test_plane_wave_unitary_below_edge():
    nf = 12
    U = fock_plane_wave(nf, 0.3, +1)
    G = U.conj().T @ U
    sub = slice(0, nf - 2)
    assert np.linalg.norm(G[sub, sub] - np.eye(nf - 2)) < 1e-10


def test_standing_wave_zero_and_linear_term():
    assert np.linalg.norm(fock_standing_wave(12, 0.0)) == 0.0
    X = fock_annihilation(12)
    X = X + X.conj().T
    cubic = np.linalg.norm(X @ X @ X) / 6
    errs = [np.linalg.norm(fock_standing_wave(12, eta) - eta * X)
            for eta in (1e-3, 2e-3)]
    assert errs[1] / errs[0] == pytest.approx(8.0, rel=0.1)  # O(eta^3)
    assert errs[0] == pytest.approx(1e-9 * cubic, rel=0.2)


def test_standing_wave_first_matrix_element():
    eta = 0.05
    S = fock_standing_wave(15, eta)
    assert S[1, 0] == pytest.approx(eta * np.exp(-eta**2 / 2), abs=eta**3)


def test_factors_commute():
    A = mj.atomic(DIMS, 1, 0).data
    B = np.kron(np.eye(3), fock_annihilation(DIMS.n_fock))
    assert np.linalg.norm(A @ B - B @ A) < 1e-14


@settings(max_examples=20, deadline=None)
@given(eta=st.floats(-0.8, 0.8), sign=st.sampled_from([1, -1]))
def test_plane_wave_entries_finite_and_bounded(eta, sign):
    U = fock_plane_wave(10, eta, sign)
    assert np.all(np.isfinite(U))
    assert np.abs(U).max() <= 1.0 + 1e-10  # unitary within truncation
