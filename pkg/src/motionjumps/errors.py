"""Exception types raised by the compute modules."""


class ComputeError(Exception):
    """Base class for physics/numerics failures in the compute layer."""


class NonUniqueSteadyState(ComputeError):
    """The Liouvillian null space has dimension != 1."""


class NearDefective(ComputeError):
    """An eigenbasis is too ill-conditioned to biorthonormalize reliably."""


class DegenerateInternal(ComputeError):
    """Two internal Liouvillian eigenvalues coincide within tolerance."""


class ResolventPole(ComputeError):
    """A resolvent was requested at (or too close to) an eigenvalue."""


class HeatingRegime(ComputeError):
    """A cooling channel has non-positive net cooling rate; no thermal steady state."""


class NoTimescaleSeparation(ComputeError):
    """The waiting-time distribution does not split into two well-separated decays."""


class InfiniteBright(ComputeError):
    """cos(phi2) = 0: state 2 decouples and the bright period diverges."""


class ConfigError(Exception):
    """Invalid or incomplete run configuration."""
