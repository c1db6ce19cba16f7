"""Exception types shared across the package."""


class CavmolError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(CavmolError):
    """Operator or state dimensions are inconsistent."""


class NonHermitianError(CavmolError):
    """A matrix required to be hermitian is not."""


class StateError(CavmolError):
    """A density matrix violates trace, hermiticity, or positivity bounds."""


class InsufficientTruncationError(CavmolError):
    """The photon Fock-space cutoff is too small for the requested state."""


class GridViolationError(CavmolError):
    """A propagation grid violates the step-size constraints."""


class TraceDriftError(CavmolError):
    """The propagated density matrix lost normalization beyond tolerance."""


class ConfigError(CavmolError):
    """A scenario configuration is malformed or inconsistent."""
