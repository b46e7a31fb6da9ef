"""fibrenorm: a numerical laboratory for the Fibonacci renormalization operator."""

__version__ = "0.1.0"
