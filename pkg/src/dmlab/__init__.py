"""Differential machine learning lab for option pricing.

Trains small feedforward networks on Monte Carlo payoff labels augmented
with delta (and optionally gamma) labels from pathwise, smoothed-pathwise,
likelihood-ratio, and hybrid estimators, and benchmarks the fits against
closed-form prices.
"""

__version__ = "0.1.0"

from dmlab.errors import ConfigurationError, OracleError

__all__ = ["ConfigurationError", "OracleError", "__version__"]
