"""Exception types shared across the package."""


class KerrLatticeError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(KerrLatticeError):
    """A configuration object or file is invalid (CLI exit code 2)."""


class NumericalError(KerrLatticeError):
    """An integration or linear-algebra routine failed its own sanity
    checks (non-physical state, non-convergence after retries, ...).
    CLI exit code 3."""


class InconclusiveError(KerrLatticeError):
    """A classification could not be decided within the allotted evolution
    time, even after the retry policy. CLI exit code 4."""


class MultistabilityError(NumericalError):
    """The Liouvillian kernel is degenerate: more than one steady state
    within numerical tolerance, so a unique density matrix cannot be
    returned."""


class TruncationError(NumericalError):
    """The Fock-space cutoff could not be raised enough to keep the
    top-level population below threshold."""


class UndefinedCorrelatorError(NumericalError):
    """A normalized correlator was requested where its denominator
    (a mean occupation) vanishes."""
