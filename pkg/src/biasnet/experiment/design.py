"""Factorial grids of true parameter vectors."""

from itertools import product

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from biasnet.engine.models import PARAM_NAMES, ModelSpec, ParamVector

PI_LEVELS = (0.0, 0.25, 0.5, 0.75)
SIGMA_LEVELS = (0.0, 0.1, 0.2, 0.3)
RHO_LEVELS = (0.0, 0.25, 0.5)
MEAN_DEGREE_LEVELS = (1.0, 3.0, 6.0)
DELTA_LEVELS = (0.0, 0.1, 0.2)


class FactorialDesign(BaseModel):
    """Full crossing of per-parameter levels, each cell simulated ``replications`` times."""

    levels: dict[str, list[float]] = Field(description="Levels per parameter name")
    replications: int = Field(default=5, ge=1, description="Replicates per cell")
    model_specs: list[ModelSpec] = Field(min_length=1, description="Model classes to evaluate")

    model_config = ConfigDict(extra="forbid")

    @field_validator("levels")
    @classmethod
    def _check_levels(cls, v: dict[str, list[float]]) -> dict[str, list[float]]:
        if set(v) != set(PARAM_NAMES):
            raise ValueError(f"levels must name exactly {PARAM_NAMES}, got {sorted(v)}")
        for name, values in v.items():
            if not values:
                raise ValueError(f"no levels given for {name}")
            if any(not 0.0 <= x <= 1.0 for x in values):
                raise ValueError(f"levels for {name} must lie in [0, 1]")
        if any(x <= 0.0 for x in v["d"]):
            raise ValueError("d levels must be positive (d = 0 never leaves the empty graph)")
        return v

    @model_validator(mode="after")
    def _check_orders(self) -> "FactorialDesign":
        if len({spec.n for spec in self.model_specs}) != 1:
            raise ValueError("all model specs in a design must share one graph order")
        return self

    @property
    def n(self) -> int:
        return self.model_specs[0].n

    @property
    def n_cells(self) -> int:
        count = 1
        for name in PARAM_NAMES:
            count *= len(self.levels[name])
        return count

    def cells(self) -> list[ParamVector]:
        """Every level combination, varying the last parameter fastest."""
        grids = [self.levels[name] for name in PARAM_NAMES]
        return [ParamVector.from_array(list(combo)) for combo in product(*grids)]

    @classmethod
    def standard(
        cls, n: int, replications: int = 5, model_specs: list[ModelSpec] | None = None
    ) -> "FactorialDesign":
        """The 432-cell grid, with d set so that the mean degree is 1, 3 or 6."""
        if n - 1 <= max(MEAN_DEGREE_LEVELS):
            raise ValueError(f"the standard design needs N > {max(MEAN_DEGREE_LEVELS) + 1:g}, got {n}")
        return cls(
            levels={
                "pi": list(PI_LEVELS),
                "sigma": list(SIGMA_LEVELS),
                "rho": list(RHO_LEVELS),
                "d": [k / (n - 1) for k in MEAN_DEGREE_LEVELS],
                "delta": list(DELTA_LEVELS),
            },
            replications=replications,
            model_specs=model_specs or [ModelSpec(n=n)],
        )
