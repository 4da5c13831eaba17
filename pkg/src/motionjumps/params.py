"""System parameters.

All rates and frequencies are dimensionless multiples of the trap frequency
(hbar = 1, trap frequency = 1), so e.g. ``gamma1 = 12.0`` means a linewidth of
twelve trap frequencies.  Angles are in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the driven, trapped three-level atom.

    Attributes:
        gamma1, gamma2: decay rates of the excited states 1 and 2.
        omega1, omega2: Rabi frequencies of the running- and standing-wave lasers.
        delta1, delta2: detunings (atomic frequency minus laser frequency).
        eta1, eta2: Lamb-Dicke parameters of the two transitions.
        phi1, phi2: angles between the laser wave vectors and the motional axis.
        psi: detector angle relative to the motional axis.
        n_fock: phonon-space truncation (states ``|0> .. |n_fock-1>``).
    """

    gamma1: float = 12.0
    gamma2: float = 0.015
    omega1: float = 2.5
    omega2: float = 0.5
    delta1: float = 6.0
    delta2: float = 0.87
    eta1: float = 0.05
    eta2: float = 0.05
    phi1: float = math.pi / 9
    phi2: float = 0.0
    psi: float = 4 * math.pi / 5
    n_fock: int = 15

    def __post_init__(self):
        for name in ("gamma1", "gamma2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("eta1", "eta2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("gamma1", "gamma2", "omega1", "omega2", "delta1",
                     "delta2", "eta1", "eta2", "phi1", "phi2", "psi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.n_fock < 2:
            raise ValueError("n_fock must be >= 2")

    def with_(self, **kwargs) -> "SystemParams":
        """Return a copy with the given fields replaced."""
        return replace(self, **kwargs)


def figure2_params(n_fock: int = 15) -> SystemParams:
    """Parameter set used throughout the reference figures (telegraph regime).

    gamma1 = 12, delta1 = 6, Omega1 = 2.5 (Doppler cooling on transition 1),
    gamma2 = 0.015, Omega2 = 0.5, delta2 = 0.87 (sideband regime on
    transition 2), eta1 = eta2 = 0.05, phi1 = pi/9, phi2 = 0, psi = 4*pi/5.
    """
    return SystemParams(n_fock=n_fock)
