"""Exception types shared across the stack."""


class RingbotError(Exception):
    """Base class for all errors raised by ringbot."""


class ConfigError(RingbotError, ValueError):
    """A configuration value or file is invalid."""


class InvalidIntrinsicsError(ConfigError):
    """The camera matrix is singular or degenerate."""


class InvalidActionError(RingbotError, ValueError):
    """A policy produced an action that cannot be applied."""


class MalformedPacketError(RingbotError, ValueError):
    """A wire line does not match the packet grammar."""


class PolicyError(RingbotError):
    """A policy failed to produce an action (including remote timeouts)."""


class NoPathError(RingbotError):
    """The planner could not connect start and goal."""
