"""Exception types shared across the package."""


class QBaxterError(Exception):
    """Base class for all package-specific errors."""


class ParameterDomainError(QBaxterError):
    """Parameters violate a convergence or validity condition."""


class ExclusionPointError(QBaxterError):
    """Spectral parameter lies on (or too close to) a pole of a traced series."""


class ConvergenceError(QBaxterError):
    """A truncated series failed its stopping rule."""


class TailCertificateError(QBaxterError):
    """The Fock-space trace could not certify its geometric tail at the configured cutoff."""


class OverflowGuardError(QBaxterError):
    """A log-bookkept operator was asked to materialize entries outside floating range."""
