"""Exception hierarchy for sdgkit."""


class SDGError(Exception):
    """Base class for all errors raised by this package."""


class OrderMismatchError(SDGError):
    pass


class NotNilpotentError(SDGError):
    pass


class NotSymmetricError(SDGError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class GeneratorMismatchError(SDGError):
    pass


class MixedAlgebraError(SDGError):
    pass


class DimensionError(SDGError):
    pass


class DistributionError(SDGError):
    pass


class ImproperMapError(DistributionError):
    """Pushforward of a non-compact distribution along a non-proper map."""


class FlowError(SDGError):
    pass


class ParseError(SDGError):
    def __init__(self, message, position=None, source=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position
        self.source = source
