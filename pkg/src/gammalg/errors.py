"""Exception hierarchy shared by all modules."""


class GammalgError(Exception):
    """Base class; ``name`` is what the CLI reports."""

    @property
    def name(self) -> str:
        return type(self).__name__


class InvalidSpec(GammalgError):
    pass


class EmptyShift(GammalgError):
    pass


class WrongPresentation(GammalgError):
    pass


class AlphabetMismatch(GammalgError):
    pass


class BadLength(GammalgError):
    pass


class NotAnArrow(GammalgError):
    pass


class NotUnitModulus(GammalgError):
    pass


class NotCoreElement(GammalgError):
    pass


class LevelTooLow(GammalgError):
    pass


class InvalidPoint(GammalgError):
    pass


class BasisOverflow(GammalgError):
    pass


class ClassExplosion(GammalgError):
    pass


class NotApplicable(GammalgError):
    pass


class IdentityViolation(GammalgError):
    """A computed identity that must hold exactly failed to hold."""


class ExpressionError(GammalgError):
    pass
