"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid link statistics, scheme description or experiment config."""


class DiagnosticError(ValueError):
    """A post-processing step lacks the data it needs (e.g. too few points)."""
