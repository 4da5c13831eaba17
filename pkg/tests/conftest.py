"""Shared fixtures.  Heavy objects are session-scoped and reused."""

import numpy as np
import pytest

import motionjumps as mj


@pytest.fixture(scope="session")
def fig2():
    return mj.figure2_params(n_fock=15)


@pytest.fixture(scope="session")
def fig2_small():
    return mj.figure2_params(n_fock=8)


@pytest.fixture(scope="session")
def fig2_rates(fig2):
    return mj.cooling_rates(fig2)


@pytest.fixture(scope="session")
def exact10(fig2):
    """Exact Liouvillian machinery at n_fock = 10 (oracle for perturbation)."""
    p = fig2.with_(n_fock=10)
    L = mj.build_liouvillian(p)
    rho = mj.steady_state(L)
    dec = mj.spectral_decomposition(L)
    return {"params": p, "L": L, "rho_st": rho, "decomposition": dec}


@pytest.fixture(scope="session")
def waiting_fig2(fig2, fig2_rates):
    grid = np.concatenate(([0.0], np.geomspace(1e-3, 5.0 / fig2.gamma2, 400)))
    return mj.waiting_time(fig2, grid, n_bar=fig2_rates.n_bar)
