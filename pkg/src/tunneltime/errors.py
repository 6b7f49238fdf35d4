"""Exception hierarchy shared by all modules."""


class TunnelError(Exception):
    """Base class for every error raised by the package."""


class NoBarrier(TunnelError):
    """Energy is at or above the barrier top; no classically forbidden region."""


class MultiBump(TunnelError):
    """More than one forbidden interval was found at the requested energy."""


class NonDecaying(TunnelError):
    """The potential does not fall below the asymptotic threshold in the search span."""


class Divergent(TunnelError):
    """A traversal-time integral did not converge or exceeded the divergence threshold."""


class TurningPointRegion(TunnelError):
    """WKB wavefunction requested too close to a turning point."""


class PhaseWrap(TunnelError):
    """Transmission phase could not be unwrapped unambiguously."""


class ChannelAboveBarrier(TunnelError):
    """A Zeeman-shifted spin channel is no longer below the barrier top."""


class NoConvergence(TunnelError):
    """An extrapolation or refinement loop failed to meet its tolerance."""


class GridTooCoarse(TunnelError):
    """Frequency grid cannot resolve the principal-value integral."""


class NonDecayingInput(TunnelError):
    """Dispersion input lacks the high-frequency decay a Kramers-Kronig integral needs."""


class BranchAmbiguity(TunnelError):
    """1 + chi crosses the branch cut of the square root."""


class BoxTooSmall(TunnelError):
    """Probability reached the edges of the periodic simulation box."""


class UnstableStep(TunnelError):
    """Norm drifted during time stepping."""


class NoTransmission(TunnelError):
    """Transmitted signal at the detector is below the noise floor."""


class ConfigError(TunnelError):
    """Run configuration does not match the documented schema."""
