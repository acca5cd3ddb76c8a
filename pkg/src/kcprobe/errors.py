"""Exception types shared across the package."""


class KCProbeError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(KCProbeError):
    """Operands have incompatible or out-of-range dimensions."""


class InvariantViolation(KCProbeError):
    """A constructed object failed one of its defining numerical invariants."""


class LabelError(KCProbeError):
    """An outcome label is not valid for the step it was used at."""


class NumericalFault(KCProbeError):
    """A quantity left its mathematically guaranteed range by more than tolerance."""


class CapacityError(KCProbeError):
    """An enumeration would exceed the configured sequence cap."""


class ProtocolError(KCProbeError):
    """A protocol does not have the shape required by the requested operation."""


class PreconditionError(KCProbeError):
    """A mathematical precondition of the operation does not hold for the inputs."""


class ConfigError(KCProbeError):
    """A run configuration is malformed or internally inconsistent."""
