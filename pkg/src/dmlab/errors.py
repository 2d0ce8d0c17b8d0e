"""Shared exception types."""


class ConfigurationError(ValueError):
    """An estimator, payoff, or config combination that is not supported."""


class OracleError(RuntimeError):
    """A reference-value computation failed to converge."""
