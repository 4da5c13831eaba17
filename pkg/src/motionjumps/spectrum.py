"""Perturbative spectrum of resonance fluorescence for both transitions.

The emission spectrum of transition j decomposes over the eigenvalues of the
Liouvillian, S(dw) = Re sum_lambda F(lambda) / (i dw - lambda).  At zero
order in the Lamb-Dicke parameters only internal eigenvalues contribute (the
atom-at-rest spectrum); the mechanical effects enter at second order through
the weights

    F2(lambda) = sum_{a+b+c+d=2} Tr{D_a^dag P_b^lambda D_c rho_d^st},

evaluated here with the projector and steady-state expansions from the
Lamb-Dicke frame.  Each zero-order subspace is additionally split by its
second-order effective generator, which resolves the narrow features: the
exact zero eigenvalue (elastic line), the motional sidebands of width W/2,
and the metastable-decay peak.

Component classification is by eigenvalue labels (internal eigenvalue,
external index), never by frequency windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cooling import cooling_rates, thermal_state
from .errors import InfiniteBright
from .hilbert import atomic_matrix, fock_position
from .internal import dressed_states, internal_eigensystem, internal_steady_state, saturation
from .lamb_dicke import LambDickeFrame, steady_state_corrections
from .params import SystemParams

ZERO_BRANCH_TOL = 1e-10


@dataclass
class DipoleOperator:
    """Positive-frequency dipole operator of one transition and its expansion.

    D = |g><j| e^{-i eta_j cos(psi) X}; d0, d1, d2 are the Taylor coefficients
    in X (with the 1/n! included), as full-space matrices.
    """

    transition: int
    psi: float
    full: np.ndarray
    d0: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


def dipole_operator(p: SystemParams, j: int) -> DipoleOperator:
    if j not in (1, 2):
        raise ValueError("transition must be 1 or 2")
    nf = p.n_fock
    eta_d = (p.eta1 if j == 1 else p.eta2) * math.cos(p.psi)
    X = fock_position(nf)
    evals, evecs = np.linalg.eigh(X.real)
    expm = (evecs * np.exp(-1j * eta_d * evals)) @ evecs.T
    S = atomic_matrix(0, j)
    return DipoleOperator(
        transition=j,
        psi=p.psi,
        full=np.kron(S, expm),
        d0=np.kron(S, np.eye(nf)),
        d1=np.kron(S, -1j * eta_d * X),
        d2=np.kron(S, -0.5 * eta_d**2 * (X @ X)),
    )


@dataclass
class SpectrumResult:
    """Spectrum on a detuning grid, split into labelled components.

    ``total`` is the sum of the plotted components.  Delta contributions at
    the laser frequency (elastic line and its second-order correction) are
    scalars in ``metadata``, never added to the curve.
    """

    grid: np.ndarray
    total: np.ndarray
    components: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)


def zero_order_spectrum(p: SystemParams, j: int, grid) -> SpectrumResult:
    """Spectrum of the bare atom at rest (Mollow-type for transition 1).

    Identically zero for transition 2: state 2 carries no excitation at this
    order, so every contribution to its spectrum is mechanical.
    """
    grid = np.asarray(grid, dtype=float)
    eig = internal_eigensystem(p)
    d0 = atomic_matrix(0, j)
    rho = internal_steady_state(p).rho_st
    F = np.einsum("ij,kji->k", d0.conj().T, eig.rights) \
        * np.einsum("kij,ji->k", eig.lefts, d0 @ rho)
    curve = np.zeros_like(grid)
    elastic = 0.0
    for lam, f in zip(eig.eigenvalues, F):
        if abs(lam) < 1e-12:
            elastic += f.real
        else:
            curve += (f / (1j * grid - lam)).real
    return SpectrumResult(
        grid=grid,
        total=curve,
        components={"inelastic_zero": curve},
        metadata={"transition": j, "order": 0, "elastic_weight": float(elastic),
                  "total_signal": complex(np.sum(F))},
    )


def _component_label(frame: LambDickeFrame, group) -> str:
    if len(group.pairs) != 1:
        return "inelastic_second"
    k, ell = group.pairs[0]
    if k == 0 and ell == 0:
        return "elastic_correction"
    if k == 0 and ell == 1:
        return "sideband_blue"
    if k == 0 and ell == -1:
        return "sideband_red"
    return "inelastic_second"


def second_order_spectrum(p: SystemParams, j: int, n_bar: float, grid,
                          frame: LambDickeFrame | None = None) -> SpectrumResult:
    """All second-order spectral weights of transition j.

    Assembles the ten trace combinations for every zero-order subspace and
    classifies the contributions by eigenvalue label.  Subspaces whose
    zero-order eigenvalue has no real part (the motional lattice on the
    internal steady state) are split by their second-order effective
    generator: there the second-order shift is the leading width, which gives
    the sidebands their cooling-rate width W/2 and keeps the exact zero
    eigenvalue a separate delta.  Subspaces with a zero-order width keep their
    bare eigenvalue; a second-order correction to an O(gamma) width is beyond
    the accuracy of the expansion (and at the parameters of interest those
    corrections mix neighboring subspaces non-perturbatively, so resolving
    them here would be spurious precision).
    """
    grid = np.asarray(grid, dtype=float)
    if frame is None:
        frame = LambDickeFrame(p)
    mu = thermal_state(n_bar, p.n_fock)
    rho0, rho1, rho2 = steady_state_corrections(frame, mu)
    dip = dipole_operator(p, j)

    # functional (bra) sides and operator (ket) sides of the traces
    a = {k: frame.dual_coeffs(m.conj().T)
         for k, m in (("0", dip.d0), ("1", dip.d1), ("2", dip.d2))}
    c = {
        "00": frame.to_coeffs(dip.d0 @ rho0),
        "10": frame.to_coeffs(dip.d1 @ rho0),
        "01": frame.to_coeffs(dip.d0 @ rho1),
        "20": frame.to_coeffs(dip.d2 @ rho0),
        "11": frame.to_coeffs(dip.d1 @ rho1),
        "02": frame.to_coeffs(dip.d0 @ rho2),
    }

    def L1c(coeffs):
        return frame.to_coeffs(frame.apply_L1(frame.from_coeffs(coeffs)))

    def L2c(coeffs):
        return frame.to_coeffs(frame.apply_L2(frame.from_coeffs(coeffs)))

    components = {name: np.zeros_like(grid) for name in
                  ("elastic_correction", "sideband_red", "sideband_blue",
                   "inelastic_second")}
    branch_table = []
    elastic_delta = 0.0
    gamma_sb = None

    for g in frame.groups:
        label = _component_label(frame, g)
        sw = frame.resolvent_weights(g)
        if abs(g.value.real) < 1e-9:
            lam2, Rb, Lb = frame.branches(g)
        else:
            lam2 = np.zeros(g.size, dtype=complex)
            Rb = Lb = np.eye(g.size, dtype=complex)
        nb = lam2.size
        gidx = g.idx

        # group-restricted functional sides
        ag = {k: v[gidx] for k, v in a.items()}
        cg = {k: v[gidx] for k, v in c.items()}

        # chains shared by all branches of this group
        sL1_00 = L1c(sw * c["00"])            # L1 S x00
        sL1_01 = L1c(sw * c["01"])
        sL1_10 = L1c(sw * c["10"])
        sL1L1_00 = L1c(sw * sL1_00)           # L1 S L1 S x00
        # right-end group projector for the -P0 L1 S^2 L1 P0 term
        p0c00 = np.zeros_like(c["00"])
        p0c00[gidx] = c["00"][gidx]
        back_00 = L1c(sw * sw * L1c(p0c00))

        # branch operators and their images
        emb = np.zeros((nb, 9, p.n_fock, p.n_fock), dtype=complex)
        emb[(slice(None),) + gidx] = Rb
        Ub = frame.from_coeffs(emb)           # (nb, d, d)
        L1U = frame.to_coeffs(frame.apply_L1(Ub))
        L2U = frame.to_coeffs(frame.apply_L2(Ub))
        L1sL1U = frame.to_coeffs(frame.apply_L1(frame.from_coeffs(sw * L1U)))

        for b in range(nb):
            r_b, l_b = Rb[b], Lb[b]
            # beta = 0: P0 combinations
            F = (ag["0"] @ r_b) * (l_b @ (cg["02"] + cg["11"] + cg["20"]))
            F += (ag["1"] @ r_b) * (l_b @ (cg["01"] + cg["10"]))
            F += (ag["2"] @ r_b) * (l_b @ cg["00"])
            # beta = 1: P1 = P0 L1 S + S L1 P0
            F += (ag["1"] @ r_b) * (l_b @ sL1_00[gidx])
            F += (ag["0"] @ r_b) * (l_b @ (sL1_01 + sL1_10)[gidx])
            out_b = np.sum(a["1"] * sw * L1U[b]) * (l_b @ cg["00"])
            out_b += np.sum(a["0"] * sw * L1U[b]) * (l_b @ (cg["01"] + cg["10"]))
            F += out_b
            # beta = 2 on x00
            F += (ag["0"] @ r_b) * (l_b @ (L2c(sw * c["00"]) + sL1L1_00)[gidx])
            F += np.sum(a["0"] * sw * L2U[b]) * (l_b @ cg["00"])
            F += np.sum(a["0"] * sw * L1U[b]) * (l_b @ sL1_00[gidx])
            F += np.sum(a["0"] * sw * L1sL1U[b]) * (l_b @ cg["00"])
            F -= (ag["0"] @ r_b) * (l_b @ back_00[gidx])

            lam = g.value + lam2[b]
            branch_table.append((lam, complex(F), label, tuple(g.pairs)))
            if label == "elastic_correction" and abs(lam) < ZERO_BRANCH_TOL:
                elastic_delta += F.real
                continue
            components[label] += (F / (1j * grid - lam)).real
            if label == "sideband_blue":
                if gamma_sb is None or -lam.real < gamma_sb:
                    gamma_sb = -lam.real

    total = sum(components.values())
    return SpectrumResult(
        grid=grid,
        total=total,
        components=components,
        metadata={
            "transition": j,
            "order": 2,
            "n_bar": float(n_bar),
            "elastic_weight": float(elastic_delta),
            "gamma_sb": gamma_sb,
            "branches": branch_table,
            "total_signal": complex(sum(f for _, f, _, _ in branch_table)),
        },
    )


def perturbative_spectrum(p: SystemParams, j: int, n_bar: float, grid,
                          frame: LambDickeFrame | None = None) -> SpectrumResult:
    """S0 + S2 with merged components (the full perturbative curve)."""
    s0 = zero_order_spectrum(p, j, grid)
    s2 = second_order_spectrum(p, j, n_bar, grid, frame=frame)
    components = dict(s2.components)
    components["inelastic_zero"] = s0.total
    meta = dict(s2.metadata)
    meta["elastic_weight_zero_order"] = s0.metadata["elastic_weight"]
    return SpectrumResult(grid=s2.grid, total=s0.total + s2.total,
                          components=components, metadata=meta)


# ----------------------------------------------------------------------
# closed-form signals


def central_peak_transition1(p: SystemParams, n_bar: float, grid) -> SpectrumResult:
    """Closed-form central peak of transition 1: Lorentzian of half-width gamma2.

    Weight in two forms: the dressed-state expression
    F = eta2^2 cos^2 phi2 (Omega2^2 / 2 gamma2) |<1|rho_st|g>|^2 P(<n>)
    and its expansion to first order in the saturation parameter,
    F = eta2^2 cos^2 phi2 <n> Omega2^2/(gamma1 gamma2) (1 - 2s + 2 gamma2/(s gamma1)).
    """
    grid = np.asarray(grid, dtype=float)
    ds = dressed_states(p)
    rho = internal_steady_state(p).rho_st
    om2c = p.delta2 - 0.5j * p.gamma2
    c2 = math.cos(p.phi2) ** 2
    # overall sign as in the transition-2 analogue; it makes the weight positive
    # and consistent with the saturation expansion below
    pn = 0.0
    for sig in ("+", "-"):
        lam1 = (ds["omega"][sig] - np.conj(om2c)) / 1j
        w = ds["ket"][sig][0] * (ds["dual"][sig] @ rho[:, 0])
        pn -= (w * ((2 * n_bar + 1) * (p.gamma2 + lam1) - 1j)
               / ((p.gamma2 + lam1) ** 2 + 1.0)).real
    F_exact = p.eta2**2 * c2 * (p.omega2**2 / (2 * p.gamma2)) * abs(rho[1, 0]) ** 2 * pn
    s = saturation(p)
    F_s = (p.eta2**2 * c2 * n_bar * p.omega2**2 / (p.gamma1 * p.gamma2)
           * (1 - 2 * s + (2 / s) * (p.gamma2 / p.gamma1)))
    lorentz = p.gamma2 / (grid**2 + p.gamma2**2)
    return SpectrumResult(
        grid=grid,
        total=F_exact * lorentz,
        components={"central_peak": F_exact * lorentz,
                    "central_peak_small_s": F_s * lorentz},
        metadata={"transition": 1, "hwhm": p.gamma2,
                  "weight": float(F_exact), "weight_small_s": float(F_s)},
    )


def transition2_signals(p: SystemParams, n_bar: float, grid,
                        W: float | None = None) -> SpectrumResult:
    """Closed-form transition-2 signals: two motional sidebands and the pedestal.

    Sidebands are pure Lorentzians at +-nu with width gamma_sb = W/2 (W the
    total cooling rate) and weights

    F_sb(i l nu) = eta2^2 cos^2 phi2 (Omega2^2 (<n> + delta_{l,-1}) / 4)
                   |sum_sigma <g|sigma><sigma~|rho_st|g> / (lambda_1sigma - i l)|^2,

    independent of the detector angle.  The pedestal sits at the eigenvalue
    lambda_1- (near +nu, width ~ gamma1'/2) with the dominant gamma2^{-1}
    weight.  Small-s expansions are reported alongside.
    Raises InfiniteBright when cos(phi2) = 0.
    """
    grid = np.asarray(grid, dtype=float)
    c2 = math.cos(p.phi2) ** 2
    if c2 < 1e-24:
        raise InfiniteBright("cos(phi2) = 0: transition-2 signals vanish")
    if W is None:
        W = cooling_rates(p).W_total
    gamma_sb = W / 2
    ds = dressed_states(p)
    rho = internal_steady_state(p).rho_st
    om2c = p.delta2 - 0.5j * p.gamma2
    lam1 = {sig: (ds["omega"][sig] - np.conj(om2c)) / 1j for sig in ("+", "-")}
    wgt = {sig: ds["ket"][sig][0] * (ds["dual"][sig] @ rho[:, 0]) for sig in ("+", "-")}

    comps, meta_w = {}, {}
    for ell, name in ((1, "sideband_blue"), (-1, "sideband_red")):
        amp = sum(wgt[s_] / (lam1[s_] - 1j * ell) for s_ in ("+", "-"))
        F = c2 * p.eta2**2 * (p.omega2**2 * (n_bar + (1.0 if ell == -1 else 0.0)) / 4) \
            * abs(amp) ** 2
        comps[name] = (F / (1j * (grid - ell) + gamma_sb)).real
        meta_w[name] = float(F)

    pn = sum((wgt[s_] * ((2 * n_bar + 1) * lam1[s_] - 1j) / (lam1[s_] ** 2 + 1.0))
             for s_ in ("+", "-")).real
    F_inel = -c2 * p.eta2**2 * (p.omega2**2 / (2 * p.gamma2)) * ds["ket"]["-"][0] ** 2 * pn
    comps["inelastic_second"] = (F_inel / (1j * grid - lam1["-"])).real

    s = saturation(p)
    g1, g2 = p.gamma1, p.gamma2
    F_red_s = c2 * p.eta2**2 * p.omega2**2 * (n_bar + 1) / 16 * (1 - s)
    F_blue_s = c2 * p.eta2**2 * 4 * p.omega2**2 * n_bar / (g1**2 * s**2) \
        * (1 - (4 / s) * (g2 / g1))
    F_inel_s = c2 * p.eta2**2 * (2 * p.omega2**2 / (g1 * g2)) * (n_bar / s) \
        * (1 - (2 / s) * (g2 / g1) - 0.5j * s)

    return SpectrumResult(
        grid=grid,
        total=sum(comps.values()),
        components=comps,
        metadata={
            "transition": 2,
            "gamma_sb": float(gamma_sb),
            "W": float(W),
            "lambda_1m": complex(lam1["-"]),
            "weights": meta_w | {"inelastic_second": complex(F_inel)},
            "weights_small_s": {"sideband_red": float(F_red_s),
                                "sideband_blue": float(F_blue_s),
                                "inelastic_second": complex(F_inel_s)},
        },
    )


@dataclass
class AngleReport:
    """cos^2 phi2 regressions and detector-angle flatness of the weights."""

    phi2_values: np.ndarray
    central_peak_weights: np.ndarray
    t2_total_weights: np.ndarray
    r2_central_peak: float
    r2_t2_total: float
    psi_values: np.ndarray
    sideband_weights_vs_psi: np.ndarray   # (n_psi, 2) blue/red
    psi_variation: float


def _r_squared(x, y):
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    ss_tot = np.sum((y - y.mean()) ** 2)
    return 1.0 - np.sum(resid**2) / ss_tot


def angle_dependence_report(p: SystemParams, n_bar: float,
                            n_phi: int = 10, n_psi: int = 8) -> AngleReport:
    """Scan phi2 and psi, regressing the numerical second-order weights.

    The central-peak weight (transition 1) and the total transition-2 weight
    follow cos^2 phi2; the transition-2 sideband weights do not depend on the
    detector angle.  Weights are computed from the full second-order
    machinery, not from the closed forms, so the laws are actually exercised.
    """
    phi2 = np.linspace(0.0, math.pi / 2, n_phi)
    cp_w = np.empty(n_phi)
    t2_w = np.empty(n_phi)
    for i, f2 in enumerate(phi2):
        q = p.with_(phi2=float(f2))
        frame = LambDickeFrame(q)
        s2_t1 = second_order_spectrum(q, 1, n_bar, [0.0], frame=frame)
        cp_w[i] = sum(f.real for _, f, _, pairs in s2_t1.metadata["branches"]
                      if pairs == ((1, 0),))  # the metastable-decay subspace
        s2_t2 = second_order_spectrum(q, 2, n_bar, [0.0], frame=frame)
        t2_w[i] = s2_t2.metadata["total_signal"].real

    psi = np.linspace(0.0, math.pi, n_psi)
    sb = np.empty((n_psi, 2))
    for i, ps in enumerate(psi):
        q = p.with_(psi=float(ps))
        s2 = second_order_spectrum(q, 2, n_bar, [0.0])
        for k, lbl in enumerate(("sideband_blue", "sideband_red")):
            sb[i, k] = sum(f.real for _, f, l, _ in s2.metadata["branches"] if l == lbl)
    scale = np.abs(sb).max()
    variation = float((sb.max(axis=0) - sb.min(axis=0)).max() / scale) if scale > 0 else 0.0

    x = np.cos(phi2) ** 2
    return AngleReport(
        phi2_values=phi2,
        central_peak_weights=cp_w,
        t2_total_weights=t2_w,
        r2_central_peak=_r_squared(x, cp_w),
        r2_t2_total=_r_squared(x, t2_w),
        psi_values=psi,
        sideband_weights_vs_psi=sb,
        psi_variation=variation,
    )
