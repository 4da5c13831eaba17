"""Quantum jumps driven by the center-of-mass motion of a trapped atom.

A simulator for a laser-cooled three-level atom in a harmonic trap, where
shelving into the metastable state (and hence every dark period in the
fluorescence) requires exchanging a phonon with the motion.  The package
computes waiting-time distributions, bright/dark time scales, cooling rates
and resonance-fluorescence spectra, both exactly in a truncated phonon space
and through perturbation theory in the Lamb-Dicke parameters, each route
checked against the other.
"""

from .params import SystemParams, figure2_params
from .errors import (ComputeError, ConfigError, DegenerateInternal, HeatingRegime,
                     InfiniteBright, NearDefective, NonUniqueSteadyState,
                     NoTimescaleSeparation, ResolventPole)
from .hilbert import (QOperator, SpaceDims, annihilation, atomic, identity,
                      number, plane_wave, standing_wave)
from .internal import (InternalEigensystem, InternalSteadyState, dressed_frequencies,
                       internal_eigensystem, internal_liouvillian,
                       internal_steady_state, saturation)
from .liouville import (SpectralDecomposition, SuperOperator, build_dissipator,
                        build_hamiltonian, build_liouvillian, correlation_spectrum,
                        dipole_w2, spectral_decomposition, steady_state)
from .lamb_dicke import (LambDickeFrame, LDExpansion, expand,
                         first_order_vanishing_check, project_zero_order,
                         steady_state_corrections)
from .cooling import (CoolingRates, cooling_rates, doppler_limit, fluctuation_spectrum,
                      mean_phonon, scan_mean_phonon, sideband_limit, thermal_state)
from .jumps import (AnalyticScales, EffectiveHamiltonian, TrajectoryRecord,
                    WaitingTimeResult, analytic_scales, bright_dark_periods,
                    effective_hamiltonian, perturbative_waiting_time,
                    simulate_trajectory, split_time, waiting_time)
from .spectrum import (AngleReport, DipoleOperator, SpectrumResult,
                       angle_dependence_report, central_peak_transition1,
                       dipole_operator, perturbative_spectrum,
                       second_order_spectrum, transition2_signals,
                       zero_order_spectrum)

__version__ = "0.1.0"
