"""Configuration models, loading and validation."""

from biasnet.config.loader import ConfigLoader, parse_run_file
from biasnet.config.models import BiasnetConfig, RunConfig
from biasnet.config.validator import ConfigValidator

__all__ = ["BiasnetConfig", "ConfigLoader", "ConfigValidator", "RunConfig", "parse_run_file"]
