"""Exception types shared across the toolkit."""


class PipelineError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(PipelineError):
    """Invalid configuration or command usage. CLI exit code 1."""


class DataError(PipelineError):
    """Malformed or inconsistent input data. CLI exit code 2."""
