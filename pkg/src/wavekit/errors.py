"""Exception types used throughout wavekit."""


class WavekitError(Exception):
    """Base class for all wavekit errors."""


class InvalidInputError(WavekitError):
    """Raised when an argument violates a documented precondition."""


class ConfigError(WavekitError):
    """Raised when a run configuration file is missing, malformed, or invalid."""


class OutputError(WavekitError):
    """Raised when result files cannot be written."""
