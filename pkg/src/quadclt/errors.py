"""Exception hierarchy shared by the numerical modules."""


class QuadCLTError(Exception):
    """Base class for all errors raised by quadclt."""


class DomainError(QuadCLTError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NonConvergence(QuadCLTError, ArithmeticError):
    """A refinement loop was exhausted without meeting its tolerance."""


class DivergenceError(NonConvergence):
    """Panel contributions stop decaying toward a singular point: the integral diverges."""


class NegativeEmbedding(QuadCLTError, ArithmeticError):
    """The circulant embedding has negative eigenvalues beyond the clamp tolerance."""


class SizeError(QuadCLTError, ValueError):
    """A dense computation was requested above the configured size cap."""


class ConfigError(QuadCLTError, ValueError):
    """Malformed or schema-invalid experiment configuration."""
