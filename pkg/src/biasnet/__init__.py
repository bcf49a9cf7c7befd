"""biasnet - Biased net simulation and forest-based posterior inference."""

__version__ = "0.1.0"
