"""Run plumbing: logging setup and ordered batch execution."""

from biasnet.workflow.batch import run_batch
from biasnet.workflow.logging import level_for, setup_logging

__all__ = ["level_for", "run_batch", "setup_logging"]
