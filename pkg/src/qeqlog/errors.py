"""Exception types shared across the package."""


class QeqlogError(Exception):
    """Base class for all errors raised by this package."""


class TrivialPair(QeqlogError):
    """Empty carrier and no constants: there are no terms at all."""


class UnknownVariable(QeqlogError):
    """A term mentions a variable outside the current assignment/substitution."""


class GridMismatch(QeqlogError):
    """A distance or epsilon does not lie on the declared grid."""


class SpecViolation(QeqlogError):
    """A space fails the Horn clauses of the spec it is used under."""


class BudgetExceeded(QeqlogError):
    """An enumeration exceeded its configured budget."""


class OutOfUniverse(QeqlogError):
    """A queried term is outside the bounded term universe."""


class UnknownFact(QeqlogError):
    """Trace requested for a fact the derivation database does not contain."""


class NotAModel(QeqlogError):
    """An algebra required to model the theory does not."""


class NotNonexpansive(QeqlogError):
    """A map required to be nonexpansive is not."""


class UnsupportedPreset(QeqlogError):
    """Discrete liftings exist only for the FREL/PMET/MET presets."""


class EMLawViolation(QeqlogError):
    """A candidate structure map fails the unit or multiplication law."""


class PreconditionViolation(QeqlogError):
    """A named hypothesis of an operation does not hold."""
