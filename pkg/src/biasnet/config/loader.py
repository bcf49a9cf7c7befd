"""Configuration loading and management for biasnet."""

import os
from pathlib import Path
import sys
from typing import Any

from rich.console import Console

from biasnet.config.models import BiasnetConfig
from biasnet.errors import InvalidArgumentError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

console = Console(stderr=True)

THREADS_ENV = "BIASNET_THREADS"


def _parse_value(raw: str) -> Any:
    text = raw.strip()
    if "," in text:
        return [_parse_value(part) for part in text.split(",") if part.strip()]
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text.strip('"').strip("'")


def parse_run_file(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse the ``key = value`` run-file grammar into a nested dict.

    Dotted keys address sections (``prior.slab_a = 0.5``); values are ints,
    floats, ``true``/``false``, comma-separated lists or bare strings.

    Raises:
        InvalidArgumentError: On a line without ``=``, an empty key or a repeated key.
    """
    data: dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise InvalidArgumentError(f"{source}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        parts = key.split(".")
        if not all(parts):
            raise InvalidArgumentError(f"{source}:{number}: malformed key {key!r}")
        node = data
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise InvalidArgumentError(f"{source}:{number}: {part!r} is not a section")
            node = child
        if parts[-1] in node:
            raise InvalidArgumentError(f"{source}:{number}: duplicate key {key!r}")
        node[parts[-1]] = _parse_value(value)
    return data


def merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    """Recursive dict merge; ``update`` wins."""
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigLoader:
    """Loads and manages biasnet configuration."""

    def __init__(self, project_root: Path | None = None, run_file: Path | None = None):
        """Initialize config loader.

        Args:
            project_root: Directory whose pyproject.toml may hold ``[tool.biasnet]``.
                If None, uses current directory.
            run_file: Optional key=value run file layered above pyproject.toml.
        """
        self.project_root = project_root or Path.cwd()
        self.run_file = run_file
        self._config: BiasnetConfig | None = None

    def load_config(self) -> BiasnetConfig:
        """Merge defaults, pyproject.toml, the run file and environment overrides.

        Returns:
            BiasnetConfig: Validated configuration.
        """
        if self._config is not None:
            return self._config

        config_data: dict[str, Any] = {}

        pyproject_config = self._load_pyproject_config()
        if pyproject_config:
            config_data = merge(config_data, pyproject_config)

        if self.run_file is not None:
            config_data = merge(config_data, self._load_run_file(self.run_file))

        env_overrides = self._load_env_overrides()
        if env_overrides:
            config_data = merge(config_data, env_overrides)

        self._config = BiasnetConfig(**config_data)
        return self._config

    def _load_pyproject_config(self) -> dict[str, Any] | None:
        """Load the ``[tool.biasnet]`` table from pyproject.toml."""
        pyproject_path = self.project_root / "pyproject.toml"

        if not pyproject_path.exists():
            return None

        try:
            with open(pyproject_path, "rb") as f:
                pyproject_data = tomllib.load(f)
        except (OSError, tomllib.TOMLDecodeError) as e:
            console.print(f"[yellow]Warning: Could not load pyproject.toml: {e}[/yellow]")
            return None

        return pyproject_data.get("tool", {}).get("biasnet") or None

    def _load_run_file(self, path: Path) -> dict[str, Any]:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise InvalidArgumentError(f"cannot read config file {path}: {e}") from e
        return parse_run_file(text, source=str(path))

    def _load_env_overrides(self) -> dict[str, Any]:
        """Only the worker count may come from the environment."""
        overrides: dict[str, Any] = {}

        if threads := os.getenv(THREADS_ENV):
            try:
                value = int(threads)
                if value < 1:
                    raise ValueError(threads)
                overrides["threads"] = value
            except ValueError:
                console.print(f"[yellow]Warning: Invalid {THREADS_ENV} value: {threads}[/yellow]")

        return overrides

    def apply_cli_overrides(self, overrides: dict[str, Any]) -> BiasnetConfig:
        """Apply CLI flags (``None`` meaning "not given") on top of the loaded configuration.

        Keys may be dotted (``simulation.burnin_multiplier``).
        """
        config_dict = self.load_config().model_dump()
        for key, value in overrides.items():
            if value is None:
                continue
            node = config_dict
            *sections, leaf = key.split(".")
            for section in sections:
                node = node[section]
            node[leaf] = value
        return BiasnetConfig(**config_dict)
