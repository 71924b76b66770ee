"""Exception types shared across the package."""


class TraysimError(Exception):
    """Base class for all traysim failures."""


class ConfigError(TraysimError):
    """Invalid generation or evaluation configuration."""


class DataFormatError(TraysimError):
    """Malformed or inconsistent on-disk dataset / results files."""


class RenderError(TraysimError):
    """Scene cannot be rendered (e.g. degenerate camera)."""


class EvaluationError(TraysimError):
    """Ground truth and detections cannot be scored together."""
