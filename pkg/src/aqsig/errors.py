"""Exception types shared across the simulator."""


class AqsigError(Exception):
    """Base class for all simulator errors."""


class NormalizationError(AqsigError):
    """Amplitudes or a density matrix fail the state invariants."""


class UsageError(AqsigError):
    """Operation attempted on a consumed register."""


class ShapeError(AqsigError):
    """Register lengths or bitstring lengths do not match."""


class KeySizeError(AqsigError):
    """Key material too short for the requested pad."""


class KeyReuseError(AqsigError):
    """Strict segmentation mode found overlapping key consumption."""


class CapabilityError(AqsigError):
    """A party tried to read secret material it does not own."""


class ProtocolError(AqsigError):
    """Malformed message sizes or an impossible protocol step."""
