"""Waiting-time distribution, bright/dark time scales, and jump trajectories.

The waiting-time distribution P(t) is the probability of detecting no photon
for a time t after a detection; it follows from propagating the conditional
(no-click) state with the non-Hermitian effective Hamiltonian.  Its fast
decay sets the emission time scale inside a bright period, the weak slow
component the dark-period statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq, curve_fit

from .cooling import cooling_rates, thermal_state
from .errors import InfiniteBright, NoTimescaleSeparation
from .hilbert import QOperator, SpaceDims, atomic_matrix, fock_plane_wave
from .internal import dressed_states, internal_steady_state, saturation
from .liouville import build_hamiltonian
from .params import SystemParams

SEPARATION_MIN = 10.0


@dataclass
class EffectiveHamiltonian:
    """Non-Hermitian H - (i/2) sum_j gamma_j |j><j| with its eigensystem."""

    op: QOperator
    eigenvalues: np.ndarray   # omega_a, Im <= 0
    vectors: np.ndarray       # columns are right eigenvectors
    vectors_inv: np.ndarray
    gram: np.ndarray          # V^dag V, for norms in eigencoordinates


def effective_hamiltonian(p: SystemParams) -> EffectiveHamiltonian:
    H = build_hamiltonian(p).data.copy()
    eye_f = np.eye(p.n_fock)
    H -= 0.5j * (p.gamma1 * np.kron(atomic_matrix(1, 1), eye_f)
                 + p.gamma2 * np.kron(atomic_matrix(2, 2), eye_f))
    w, V = np.linalg.eig(H)
    return EffectiveHamiltonian(
        op=QOperator(SpaceDims(3, p.n_fock), H),
        eigenvalues=w,
        vectors=V,
        vectors_inv=np.linalg.inv(V),
        gram=V.conj().T @ V,
    )


@dataclass
class BiexpFit:
    """Two-exponential model A e^{-t/t_fast} + B e^{-t/t_slow} of P(t)."""

    A: float
    t_fast: float
    B: float
    t_slow: float

    def __call__(self, t):
        return (self.A * np.exp(-np.asarray(t) / self.t_fast)
                + self.B * np.exp(-np.asarray(t) / self.t_slow))

    def slow(self, t):
        return self.B * np.exp(-np.asarray(t) / self.t_slow)

    @property
    def crossover(self) -> float:
        """Time where the two fitted components are equal.

        Gaps longer than this are more likely slow-class (shelving) than
        fast-class, so it is the count-optimal dark-period threshold.
        """
        return math.log(self.A / self.B) / (1.0 / self.t_fast - 1.0 / self.t_slow)


@dataclass
class WaitingTimeResult:
    times: np.ndarray
    P: np.ndarray
    n_bar: float
    tau: float | None = None
    T_B: float | None = None
    T_D: float | None = None
    T_B_analytic: float | None = None
    T_D_analytic: float | None = None
    Gamma: float | None = None
    T0: float | None = None
    fit: BiexpFit | None = None
    P_perturbative: np.ndarray | None = None


def _survival_terms(p: SystemParams, n_bar: float):
    """Eigenmode weights W_ab and complex rates for P(t) = sum W_ab e^{r_ab t}."""
    eff = effective_hamiltonian(p)
    mu = thermal_state(n_bar, p.n_fock)
    rho_gg = np.kron(atomic_matrix(0, 0), mu)
    A = eff.vectors_inv @ rho_gg @ eff.vectors_inv.conj().T
    W = A * eff.gram.T
    rates = -1j * (eff.eigenvalues[:, None] - np.conj(eff.eigenvalues)[None, :])
    return W.ravel(), rates.ravel()


def survival_function(p: SystemParams, n_bar: float):
    """Callable P(t) built from the effective-Hamiltonian eigensystem."""
    W, rates = _survival_terms(p, n_bar)

    def P(t):
        t = np.asarray(t, dtype=float)
        return np.real(np.exp(np.multiply.outer(t, rates)) @ W)

    return P


def split_time(times: np.ndarray, P: np.ndarray) -> tuple[float, BiexpFit]:
    """Two-exponential fit of P(t) and the split time tau = sqrt(t_f * t_s).

    Stage one estimates the slow component from the late tail and the fast
    one from early times after subtracting it; stage two refines all four
    parameters by least squares on log P over the full grid.  Raises
    NoTimescaleSeparation if the fitted scales are closer than a factor 10.
    """
    times = np.asarray(times, float)
    P = np.asarray(P, float)
    pos = P > 0
    t, y = times[pos], np.log(P[pos])
    if t[-1] <= 0 or len(t) < 8:
        raise NoTimescaleSeparation("need a sampled decay curve")

    tail = t > 0.6 * t[-1]
    slope_s, amp_s = np.polyfit(t[tail], y[tail], 1)
    t_slow0 = -1.0 / min(slope_s, -1e-300)
    B0 = math.exp(amp_s)
    resid = P - B0 * np.exp(slope_s * times)
    early = (times < 0.05 * t[-1]) & (resid > 0)
    if early.sum() < 4:
        raise NoTimescaleSeparation("no resolvable fast component")
    slope_f, amp_f = np.polyfit(times[early], np.log(resid[early]), 1)
    t_fast0, A0 = -1.0 / min(slope_f, -1e-300), math.exp(amp_f)

    def model(tt, a, tf, b, ts):
        return np.log(np.abs(a) * np.exp(-tt / np.abs(tf)) + np.abs(b) * np.exp(-tt / np.abs(ts)))

    try:
        popt, _ = curve_fit(model, t, y, p0=[A0, t_fast0, B0, t_slow0], maxfev=20000)
        fit = BiexpFit(A=abs(popt[0]), t_fast=abs(popt[1]),
                       B=abs(popt[2]), t_slow=abs(popt[3]))
    except RuntimeError:
        fit = BiexpFit(A=A0, t_fast=t_fast0, B=B0, t_slow=t_slow0)
    if fit.t_fast > fit.t_slow:
        fit = BiexpFit(A=fit.B, t_fast=fit.t_slow, B=fit.A, t_slow=fit.t_fast)
    if fit.t_slow / fit.t_fast < SEPARATION_MIN:
        raise NoTimescaleSeparation(
            f"time scales {fit.t_fast:.3g} and {fit.t_slow:.3g} are not separated")
    return math.sqrt(fit.t_fast * fit.t_slow), fit


def bright_dark_periods(times: np.ndarray, P: np.ndarray, tau: float,
                        fit: BiexpFit) -> tuple[float, float]:
    """Bright and dark time scales from the split waiting-time distribution.

    T_B = [1 - P(tau)]^{-1} {tau + P(tau)^{-1} int_0^tau P dt},
    T_D = tau + P(tau)^{-1} int_tau^inf P dt,

    evaluated in the separation regime the split assumes (t_fast << tau <<
    t_slow): beyond tau the survival is the slow class alone, and its decay
    over the split scale is higher order, so P(tau) is the slow amplitude B
    and the tail integral closes to B * t_slow.  That makes T_D = tau +
    t_slow, independent of the split point, as it must be for a
    single-exponential tail.  The integral up to tau uses the trapezoid rule
    on the sampled (log-spaced) grid.
    """
    times = np.asarray(times, float)
    P = np.asarray(P, float)
    mask = times < tau
    tgrid = np.concatenate((times[mask], [tau]))
    pgrid = np.concatenate((P[mask], [np.interp(tau, times, P)]))
    int0 = trapezoid(pgrid, tgrid)
    T_B = (tau + int0 / fit.B) / (1.0 - fit.B)
    T_D = tau + fit.t_slow
    return float(T_B), float(T_D)


@dataclass
class AnalyticScales:
    """Closed-form bright/dark scales, exact dressed-state sum and small-s forms."""

    T_B: float
    T_D: float
    Gamma: float               # from the exact dressed sum
    T0: float
    gamma1_prime: float
    Gamma_small_s: float       # gamma1'^2 / (4 <n>) form
    Gamma_apps: float          # saturation-expanded form with gamma2 correction
    T_B_small_s: float


def _dressed_g_weights(p: SystemParams):
    ds = dressed_states(p)
    om = ds["omega"]
    gk = {s: ds["ket"][s][0] * ds["dual"][s][0] for s in ("+", "-")}
    return om, gk


def analytic_scales(p: SystemParams, n_bar: float) -> AnalyticScales:
    """Perturbative bright/dark time scales.

    Gamma^{-2} = sum_{l=+-1} (<n> + delta_{l,1})
                 |sum_sigma <g|sigma><sigma~|g> / (omega_2 - omega_sigma + l)|^2
    and T_B = (eta2 cos phi2)^{-2} (4 Gamma^2 / Omega2^2) T0 with
    T0 = 1/(gamma1 rho_11); T_D = 1/gamma2.  Raises InfiniteBright when the
    standing wave is perpendicular to the motion.
    """
    c2 = math.cos(p.phi2)
    if abs(c2) < 1e-12:
        raise InfiniteBright("cos(phi2) = 0: no coupling to state 2, T_B diverges")
    om, gk = _dressed_g_weights(p)
    om2 = p.delta2 - 0.5j * p.gamma2
    gm_inv2 = 0.0
    for ell in (+1, -1):
        amp = sum(gk[s] / (om2 - om[s] + ell) for s in ("+", "-"))
        gm_inv2 += (n_bar + (1.0 if ell == 1 else 0.0)) * abs(amp) ** 2
    Gamma2 = 1.0 / gm_inv2
    s = saturation(p)
    rho11 = 0.5 * s / (s + 1.0)
    T0 = 1.0 / (p.gamma1 * rho11)
    T_B = (1.0 / (p.eta2**2 * c2**2)) * (4.0 * Gamma2 / p.omega2**2) * T0
    g1p = s * p.gamma1 / 2
    gamma2_apps = 1.0 / ((16 * n_bar / (p.gamma1**2 * s**2))
                         * (1.0 + s + (4.0 / s) * (p.gamma2 / p.gamma1)))
    return AnalyticScales(
        T_B=float(T_B),
        T_D=1.0 / p.gamma2,
        Gamma=math.sqrt(Gamma2),
        T0=float(T0),
        gamma1_prime=g1p,
        Gamma_small_s=math.sqrt(g1p**2 / (4 * n_bar)),
        Gamma_apps=math.sqrt(gamma2_apps),
        T_B_small_s=g1p / (p.eta2**2 * c2**2 * n_bar * p.omega2**2),
    )


def perturbative_waiting_time(p: SystemParams, n_bar: float, grid) -> np.ndarray:
    """Dressed-state approximation to P(t).

    Fast part: zero-order evolution of |g> in the dressed non-Hermitian basis
    (independent of the motional state).  Slow part: weight eta2^2 cos^2 phi2
    (Omega2^2/4) Gamma^{-2} decaying at gamma2, from the first-order overlap
    of |g, n> with the metastable branch.
    """
    grid = np.asarray(grid, float)
    om, gk = _dressed_g_weights(p)
    ds = dressed_states(p)
    om2 = p.delta2 - 0.5j * p.gamma2
    fast = np.zeros(grid.shape, dtype=complex)
    for s1 in ("+", "-"):
        for s2 in ("+", "-"):
            ov = np.vdot(ds["ket"][s2], ds["ket"][s1])
            amp = ov * ds["dual"][s1][0] * np.conj(ds["dual"][s2][0])
            fast += amp * np.exp(-1j * (om[s1] - np.conj(om[s2])) * grid)
    gm_inv2 = 0.0
    for ell in (+1, -1):
        amp = sum(gk[s] / (om2 - om[s] + ell) for s in ("+", "-"))
        gm_inv2 += (n_bar + (1.0 if ell == 1 else 0.0)) * abs(amp) ** 2
    w_slow = p.eta2**2 * math.cos(p.phi2) ** 2 * (p.omega2**2 / 4) * gm_inv2
    return np.real(fast) + w_slow * np.exp(-p.gamma2 * grid)


def waiting_time(p: SystemParams, grid, n_bar: float | None = None,
                 extract_scales: bool = True) -> WaitingTimeResult:
    """Waiting-time distribution on a grid, with time-scale extraction.

    The initial state is |g><g| tensor the thermal motional state of the
    cooling rate equation (pass ``n_bar`` to override).  When
    ``extract_scales`` is set, the biexponential split, T_B/T_D estimates and
    the analytic scales are attached to the result.
    """
    if n_bar is None:
        n_bar = cooling_rates(p).n_bar
    grid = np.asarray(grid, dtype=float)
    P = survival_function(p, n_bar)(grid)
    res = WaitingTimeResult(times=grid, P=P, n_bar=float(n_bar))
    res.P_perturbative = perturbative_waiting_time(p, n_bar, grid)
    if extract_scales:
        res.tau, res.fit = split_time(grid, P)
        res.T_B, res.T_D = bright_dark_periods(grid, P, res.tau, res.fit)
        scales = analytic_scales(p, n_bar)
        res.T_B_analytic = scales.T_B
        res.T_D_analytic = scales.T_D
        res.Gamma = scales.Gamma
        res.T0 = scales.T0
    return res


# ----------------------------------------------------------------------
# Monte Carlo unraveling


def sample_emission_direction(rng: np.random.Generator, size: int | None = None):
    """Draw u = cos(theta) from the dipole pattern w(u) = 3(1+u^2)/8.

    Inverse CDF: u^3 + 3u = 8r - 4 has a unique real root (Cardano).
    """
    r = rng.random(size)
    c = 8.0 * r - 4.0
    disc = np.sqrt(c * c / 4.0 + 1.0)
    return np.cbrt(c / 2.0 + disc) + np.cbrt(c / 2.0 - disc)


@dataclass
class TrajectoryRecord:
    """Emission record and the bright/dark partition of one trajectory."""

    events: list                 # (time, transition j, direction u)
    periods: list                # (start, end, "bright" | "dark")
    duration: float
    tau: float
    n_bar: float
    seed: int

    def gaps(self, transition: int | None = None) -> np.ndarray:
        """Inter-click gaps, optionally restricted to one transition's clicks."""
        ts = [t for t, j, _ in self.events if transition is None or j == transition]
        return np.diff(np.asarray(ts))

    def dark_durations(self) -> np.ndarray:
        return np.asarray([e - s for s, e, kind in self.periods if kind == "dark"])

    def bright_durations(self) -> np.ndarray:
        return np.asarray([e - s for s, e, kind in self.periods if kind == "bright"])


def simulate_trajectory(p: SystemParams, duration: float, rng_seed: int,
                        n_bar: float | None = None,
                        tau: float | None = None,
                        require_decay_click: bool = False) -> TrajectoryRecord:
    """Monte Carlo wave-function unraveling of the master equation.

    Deterministic evolution under the effective Hamiltonian, interrupted by
    collapses |g><j| e^{-i eta_j u X} at rate gamma_j with the emission
    direction u sampled from the dipole pattern.  Dark periods are gaps
    between transition-1 clicks exceeding ``tau``.  The default threshold is
    the crossover of the two fitted components of P(t) (the point of equal
    class likelihood), which minimizes the number of misclassified gaps; the
    geometric-mean split time sits earlier, inside the fast class's tail,
    and would flood the record with false dark periods.

    With ``require_decay_click`` a long gap only counts as dark when a
    transition-2 photon (the decay of the shelved state, spectrally resolved
    from the bright fluorescence) arrives inside it.  This rejects the
    fast-class tail essentially completely, at the cost of missing the
    shelving events that end by stimulated return to the ground state.
    """
    rng = np.random.default_rng(rng_seed)
    if n_bar is None:
        n_bar = cooling_rates(p).n_bar
    if tau is None:
        t_probe = np.concatenate(([0.0], np.geomspace(1e-3, 5.0 / p.gamma2, 300)))
        r = waiting_time(p, t_probe, n_bar=n_bar)
        # with the decay-click gate the threshold only needs to clear the
        # ordinary click-gap scale; unaided, it must sit at the class boundary
        tau = 3.0 * r.fit.t_fast if require_decay_click else r.fit.crossover

    eff = effective_hamiltonian(p)
    nf = p.n_fock
    d = 3 * nf
    w, V, Vinv, G = eff.eigenvalues, eff.vectors, eff.vectors_inv, eff.gram

    # start in |g> with a thermal phonon sampled from mu_st
    mu_diag = np.diag(thermal_state(n_bar, nf)).real
    psi = np.zeros(d, dtype=complex)
    psi[int(rng.choice(nf, p=mu_diag / mu_diag.sum()))] = 1.0

    proj = {j: np.arange(j * nf, (j + 1) * nf) for j in (1, 2)}
    events = []
    t_now = 0.0
    probe = np.geomspace(1e-4, duration, 64)

    while t_now < duration:
        c = Vinv @ psi
        norm0 = np.real(np.vdot(c, G @ c))
        target = rng.random() * norm0

        def norm2(dt, c=c):
            ph = np.exp(-1j * w * dt) * c
            return np.real(np.vdot(ph, G @ ph))

        # vectorized bracket search on a geometric grid, then refine
        phases = np.exp(np.multiply.outer(-1j * probe, w)) * c
        norms = np.real(np.einsum("ti,ij,tj->t", phases.conj(), G, phases))
        below = np.nonzero(norms < target)[0]
        if below.size == 0:
            break  # no further click before the record ends
        hi = probe[below[0]]
        lo = probe[below[0] - 1] if below[0] > 0 else 0.0
        dt = brentq(lambda x: norm2(x) - target, lo, hi, xtol=1e-12, rtol=1e-13)
        t_now += dt
        if t_now >= duration:
            break
        psi = V @ (np.exp(-1j * w * dt) * c)
        # choose decay channel and emission direction, then collapse
        weights = np.array([p.gamma1 * np.sum(np.abs(psi[proj[1]]) ** 2),
                            p.gamma2 * np.sum(np.abs(psi[proj[2]]) ** 2)])
        j = 1 + int(rng.random() * weights.sum() > weights[0])
        u = float(sample_emission_direction(rng))
        eta = p.eta1 if j == 1 else p.eta2
        kick = fock_plane_wave(nf, eta * u, -1)
        new = np.zeros(d, dtype=complex)
        new[:nf] = kick @ psi[proj[j]]
        psi = new / np.linalg.norm(new)
        events.append((t_now, j, u))

    periods = _classify_periods(events, duration, tau, require_decay_click)
    return TrajectoryRecord(events=events, periods=periods, duration=duration,
                            tau=float(tau), n_bar=float(n_bar), seed=rng_seed)


def _classify_periods(events, duration, tau, require_decay_click=False):
    """Partition [0, duration] into bright/dark by transition-1 click gaps."""
    t1 = [t for t, j, _ in events if j == 1]
    t2 = np.asarray([t for t, j, _ in events if j == 2])

    def is_dark(a, b):
        if b - a <= tau:
            return False
        if not require_decay_click:
            return True
        k = np.searchsorted(t2, a, side="right")
        return k < t2.size and t2[k] < b

    periods = []
    bright_start = 0.0
    prev = 0.0
    for t in t1:
        if is_dark(prev, t):
            if prev > bright_start:
                periods.append((bright_start, prev, "bright"))
            periods.append((prev, t, "dark"))
            bright_start = t
        prev = t
    if is_dark(prev, duration):
        if prev > bright_start:
            periods.append((bright_start, prev, "bright"))
        periods.append((prev, duration, "dark"))
    else:
        periods.append((bright_start, duration, "bright"))
    return periods
