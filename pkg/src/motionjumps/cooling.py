"""Laser-cooling rate equations: fluctuation spectra, rates, mean phonon number.

At second order in the Lamb-Dicke parameters the phonon populations obey a
birth-death rate equation with upward rate (n+1)(A1+ + A2+) and downward rate
n(A1- + A2-).  The per-channel rates follow from the internal fluctuation
spectrum of the linear coupling, evaluated at the trap frequency through the
internal resolvent.  A positive net rate per channel defines equilibrium
occupations n_j and cooling rates W_j; the combined stationary occupation is
their W-weighted mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HeatingRegime, ResolventPole
from .hilbert import atomic_matrix, fock_annihilation
from .internal import internal_liouvillian, internal_steady_state
from .liouville import dipole_w2, unvec, vec
from .params import SystemParams

_POLE_TOL = 1e-8
_INACTIVE = 1e-300


def coupling_matrix(p: SystemParams, j: int) -> np.ndarray:
    """Internal coefficient of the position-linear coupling for channel j."""
    if j == 1:
        return 1j * (p.omega1 / 2) * p.eta1 * np.cos(p.phi1) * (
            atomic_matrix(1, 0) - atomic_matrix(0, 1))
    if j == 2:
        return -(p.omega2 / 2) * p.eta2 * np.cos(p.phi2) * (
            atomic_matrix(2, 0) + atomic_matrix(0, 2))
    raise ValueError("transition j must be 1 or 2")


def fluctuation_spectrum(p: SystemParams, j: int, freq: float) -> complex:
    """One-sided fluctuation spectrum of the channel-j coupling.

    s_j(freq) = int_0^inf dt e^{i freq t} Tr{V e^{L_I t} V rho_st}, evaluated
    as -Tr{V (L_I + i freq)^{-1} V rho_st} on the 9-dimensional internal
    space.  Raises ResolventPole if i*freq sits on an internal eigenvalue.
    """
    L = internal_liouvillian(p)
    lam = np.linalg.eigvals(L)
    if np.min(np.abs(lam + 1j * freq)) < _POLE_TOL:
        raise ResolventPole(f"i*{freq} is an eigenvalue of the internal Liouvillian")
    V = coupling_matrix(p, j)
    rho = internal_steady_state(p).rho_st
    sol = np.linalg.solve(L + 1j * freq * np.eye(9), vec(V @ rho))
    return -complex(np.trace(V @ unvec(sol, 3)))


@dataclass
class CoolingRates:
    """Per-channel heating/cooling rates and the combined stationary numbers."""

    A1_plus: float
    A1_minus: float
    A2_plus: float
    A2_minus: float
    D: float
    n1: float
    n2: float
    W1: float
    W2_rate: float
    n_bar: float
    W_total: float


def cooling_rates(p: SystemParams) -> CoolingRates:
    """Assemble A_{j+-}, per-channel n_j and W_j, and the combined <n>.

    A_{1+-} = 2 Re{s_1(-+nu)} + 2D with the recoil diffusion
    D = eta1^2 W2 (gamma1/2) rho_11; A_{2+-} = 2 Re{s_2(-+nu)}.
    Raises HeatingRegime when an active channel has W_j <= 0 or the total
    cooling rate is not positive.
    """
    rho11 = internal_steady_state(p).rho_st[1, 1].real
    D = p.eta1**2 * dipole_w2() * (p.gamma1 / 2) * rho11
    A1p = 2 * fluctuation_spectrum(p, 1, -1.0).real + 2 * D
    A1m = 2 * fluctuation_spectrum(p, 1, +1.0).real + 2 * D
    A2p = 2 * fluctuation_spectrum(p, 2, -1.0).real
    A2m = 2 * fluctuation_spectrum(p, 2, +1.0).real

    channels = {}
    for j, (Ap, Am) in ((1, (A1p, A1m)), (2, (A2p, A2m))):
        if max(abs(Ap), abs(Am)) < _INACTIVE:
            channels[j] = (math.nan, 0.0)  # channel decoupled
            continue
        W = Am - Ap
        if W <= 0:
            raise HeatingRegime(f"channel {j} heats: A+ = {Ap:.3e} >= A- = {Am:.3e}")
        channels[j] = (Ap / W, W)
    n1, W1 = channels[1]
    n2, W2 = channels[2]
    W = W1 + W2
    if W <= 0:
        raise HeatingRegime("total cooling rate is not positive")
    num = sum(n * w for n, w in channels.values() if w > 0)
    return CoolingRates(A1_plus=A1p, A1_minus=A1m, A2_plus=A2p, A2_minus=A2m,
                        D=D, n1=n1, n2=n2, W1=W1, W2_rate=W2,
                        n_bar=num / W, W_total=W)


def doppler_limit(p: SystemParams) -> tuple[float, float]:
    """Closed-form Doppler values (gamma1 >> nu, delta1 = gamma1/2).

    n1 = (gamma1/4)(1 + W2/cos^2 phi1) - 1/2,
    W1 = 2 eta1^2 Omega1^2 cos^2 phi1 / gamma1^2.
    """
    w2 = dipole_w2()
    c2 = math.cos(p.phi1) ** 2
    n1 = (p.gamma1 / 4) * (1 + w2 / c2) - 0.5
    W1 = 2 * p.eta1**2 * p.omega1**2 * c2 / p.gamma1**2
    return n1, W1


def sideband_limit(p: SystemParams) -> tuple[float, float]:
    """Closed-form sideband values including the light shift of the ground state.

    The drive on transition 1 gives the ground state an effective linewidth
    gamma_minus = Omega1^2 / (2 gamma1); then
    n2 = (gamma2 + gamma_minus)^2 / (16 nu^2),
    W2 = eta2^2 Omega2^2 cos^2 phi2 / (gamma2 + gamma_minus).
    """
    gm = p.omega1**2 / (2 * p.gamma1)
    n2 = (p.gamma2 + gm) ** 2 / 16
    W2 = p.eta2**2 * p.omega2**2 * math.cos(p.phi2) ** 2 / (p.gamma2 + gm)
    return n2, W2


def thermal_state(n_bar: float, n_fock: int) -> np.ndarray:
    """Truncated thermal motional state with mean occupation n_bar.

    Diagonal with p_n proportional to (n_bar/(1+n_bar))^n, renormalized after
    truncation.
    """
    if n_bar < 0:
        raise ValueError("n_bar must be >= 0")
    if n_bar == 0:
        mu = np.zeros(n_fock)
        mu[0] = 1.0
    else:
        q = n_bar / (1.0 + n_bar)
        mu = q ** np.arange(n_fock)
        mu /= mu.sum()
    return np.diag(mu).astype(complex)


def mean_phonon(mu: np.ndarray) -> float:
    """Tr{a^dag a mu} on the motional space."""
    a = fock_annihilation(mu.shape[0])
    return float(np.trace(a.conj().T @ a @ mu).real)


@dataclass
class ScanRow:
    value: float
    n1: float
    n2: float
    n_bar: float
    heating: bool = False


def scan_mean_phonon(p: SystemParams, param_name: str, values) -> list[ScanRow]:
    """Scan one parameter and tabulate (value, n1, n2, n_bar).

    Rows where a channel heats are flagged instead of aborting the scan.
    """
    if param_name not in SystemParams.__dataclass_fields__:
        raise ValueError(f"unknown parameter {param_name!r}")
    rows = []
    for v in values:
        q = p.with_(**{param_name: v})
        try:
            r = cooling_rates(q)
            rows.append(ScanRow(value=float(v), n1=r.n1, n2=r.n2, n_bar=r.n_bar))
        except HeatingRegime:
            rows.append(ScanRow(value=float(v), n1=math.nan, n2=math.nan,
                                n_bar=math.nan, heating=True))
    return rows
