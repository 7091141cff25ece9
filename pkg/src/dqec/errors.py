"""Exception hierarchy shared by every module."""


class DQECError(Exception):
    """Base class for all simulator errors."""


# qcore
class NotNormalized(DQECError, ValueError):
    pass


class DuplicateLabel(DQECError, ValueError):
    pass


class UnknownLabel(DQECError, KeyError):
    pass


class ArityMismatch(DQECError, ValueError):
    pass


class NotSeparable(DQECError, ValueError):
    """Raised when a qubit still carries entanglement and cannot be dropped."""


class BadDistribution(DQECError, ValueError):
    pass


class LabelMismatch(DQECError, ValueError):
    pass


class InvalidState(DQECError, ValueError):
    pass


class ImpossibleOutcome(DQECError, ValueError):
    """A forced measurement outcome has zero Born probability."""


# channels
class BadRates(DQECError, ValueError):
    pass


class BadProbability(DQECError, ValueError):
    pass


class NegativeRate(DQECError, ValueError):
    def __init__(self, message, value):
        super().__init__(message)
        self.value = value


# dqpu
class BadBudget(DQECError, ValueError):
    pass


class OutOfQubits(DQECError, RuntimeError):
    pass


class SameNode(DQECError, ValueError):
    pass


class LocalityViolation(DQECError, RuntimeError):
    pass


class WrongRecipient(DQECError, RuntimeError):
    pass


class LinkBroken(DQECError, RuntimeError):
    pass


# protocol / analysis
class NotEigenstate(DQECError, ValueError):
    pass


class InsufficientData(DQECError, ValueError):
    pass


class ConfigError(DQECError, ValueError):
    pass
