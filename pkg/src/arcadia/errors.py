"""Exception hierarchy shared by all arcadia modules."""


class ArcadiaError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(ArcadiaError):
    """A core or environment was configured with an unknown key or bad value."""


class UsageError(ArcadiaError):
    """An operation was called in a state that does not permit it."""


class UnknownCoreError(ArcadiaError):
    """Lookup of a core name that is not in the registry."""


class IncompatibleStateError(ArcadiaError):
    """A savestate was offered to a core of a different name or version."""


class ShapingError(ConfigurationError):
    """A reward-shaping mode was applied to state vars that lack a required key."""


class NormalizationError(ArcadiaError):
    """Score normalization with a degenerate human/random denominator."""


class NumericError(ArcadiaError):
    """A non-finite value reached a numeric update."""
