"""Exception hierarchy shared by all modules."""


class PolyhamError(Exception):
    """Base class for library errors."""


class StructuralError(PolyhamError, ValueError):
    """Operands have incompatible dimension or grade."""


class ChartError(PolyhamError, ValueError):
    """Polyvector is not a graph over the worldsheet (volume coordinate vanishes)."""


class ConstraintError(PolyhamError, ValueError):
    """Input violates a Plücker (decomposability) constraint."""


class DegeneracyError(PolyhamError, ValueError):
    """Quadric form is degenerate; the numerical rank is attached."""

    def __init__(self, message, rank=None, size=None):
        super().__init__(message)
        self.rank = rank
        self.size = size


class MembershipError(PolyhamError, ValueError):
    """Point does not lie on the variety it was claimed to lie on."""


class UnsupportedKindError(PolyhamError, ValueError):
    """Operation is not implemented for this model or Lagrangian family."""


class ConfigurationError(PolyhamError, ValueError):
    """Invalid run configuration (CFL violation, bad tolerances, ...)."""
