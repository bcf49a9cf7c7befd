"""Pre-flight validation of a run before any long computation starts."""

import os
from pathlib import Path

from rich.console import Console

from biasnet.config.models import BiasnetConfig, RunConfig
from biasnet.errors import InvalidArgumentError
from biasnet.experiment.runner import INTERVAL

console = Console(stderr=True)

# Burn-in multipliers below this rarely reach the stationary regime.
MIN_SENSIBLE_BURNIN = 100


class ConfigValidator:
    """Collects errors and warnings about a run."""

    def __init__(self):
        self.errors: list[str] = []
        self.warnings: list[str] = []

    def validate_run(self, run: RunConfig, config: BiasnetConfig) -> bool:
        """Validate a resolved run against the loaded configuration.

        Returns:
            bool: True if the run may start, False otherwise.
        """
        self.errors.clear()
        self.warnings.clear()

        self._validate_inputs(run.inputs)
        self._validate_output(run.output)
        self._validate_order(run, config)
        self._validate_quantiles(run, config)

        if run.burnin_multiplier < MIN_SENSIBLE_BURNIN:
            self.warnings.append(
                f"burn-in multiplier {run.burnin_multiplier} is small; chains may not reach equilibrium"
            )
        cpus = os.cpu_count() or 1
        if run.threads > cpus:
            self.warnings.append(f"{run.threads} workers requested but only {cpus} CPUs available")

        if self.warnings:
            for warning in self.warnings:
                console.print(f"[yellow]Warning: {warning}[/yellow]")

        if self.errors:
            for error in self.errors:
                console.print(f"[red]Error: {error}[/red]")
            return False

        return True

    def _validate_inputs(self, inputs: list[Path]) -> None:
        for path in inputs:
            if not path.exists():
                self.errors.append(f"Input does not exist: {path}")

    def _validate_output(self, output: Path | None) -> None:
        if output is None:
            return
        parent = output if output.is_dir() else output.parent
        while not parent.exists() and parent != parent.parent:
            parent = parent.parent
        if not os.access(parent, os.W_OK):
            self.errors.append(f"Output location is not writable: {output}")

    def _validate_quantiles(self, run: RunConfig, config: BiasnetConfig) -> None:
        if run.command != "experiment":
            return
        missing = [q for q in INTERVAL if q not in config.quantiles]
        if missing:
            self.errors.append(
                f"coverage needs quantile levels {list(INTERVAL)}; missing {missing}"
            )

    def _validate_order(self, run: RunConfig, config: BiasnetConfig) -> None:
        if run.n is None or run.command not in ("train", "experiment"):
            return
        try:
            config.prior.to_spec(run.n).d_slab()
        except InvalidArgumentError as e:
            self.errors.append(f"Prior is undefined at this graph order: {e}")
