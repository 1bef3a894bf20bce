"""Exception hierarchy for blowup_lab."""


class BlowupLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpec(BlowupLabError, ValueError):
    pass


class NoCompatibleRoot(BlowupLabError, ValueError):
    """The boundary compatibility equation has no root in the search interval."""


class NonFiniteInput(BlowupLabError, ValueError):
    pass


class Overflow(BlowupLabError, OverflowError):
    """An exponential nonlinearity left the floating point range."""


class Underflow(BlowupLabError, ArithmeticError):
    """The admissible time step fell below the representable floor."""


class InvalidControl(BlowupLabError, ValueError):
    pass


class StoppedAtTmax(BlowupLabError):
    """No blow-up was observed before the time horizon (reported, not fatal)."""


class NonpositiveTime(BlowupLabError, ValueError):
    pass


class DomainError(BlowupLabError, ValueError):
    pass


class InsufficientSnapshots(BlowupLabError):
    pass


class InsufficientSamples(BlowupLabError):
    pass


class NonmonotoneTrace(BlowupLabError):
    pass


class NotApplicable(BlowupLabError):
    """A theorem gate whose hypotheses are not met by the configuration."""


class Cond14Violated(BlowupLabError):
    pass


class ConfigError(BlowupLabError, ValueError):
    pass


class UnknownSuite(BlowupLabError, KeyError):
    pass
