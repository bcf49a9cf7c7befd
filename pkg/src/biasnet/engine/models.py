"""Parameter and model-specification types for the biased net process."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

#: Parameter order used everywhere (training matrices, manifests, reports).
PARAM_NAMES: tuple[str, ...] = ("pi", "sigma", "rho", "d", "delta")


class ParamVector(BaseModel):
    """Formation probabilities (pi, sigma, rho, d) and the satiation probability delta."""

    pi: float = Field(default=0.0, ge=0.0, le=1.0, description="Parent (reciprocity) bias")
    sigma: float = Field(default=0.0, ge=0.0, le=1.0, description="Sibling (shared partner) bias")
    rho: float = Field(default=0.0, ge=0.0, le=1.0, description="Double-role bias")
    d: float = Field(default=0.0, ge=0.0, le=1.0, description="Baseline formation probability")
    delta: float = Field(default=0.0, ge=0.0, le=1.0, description="Satiation (inhibition) probability")

    model_config = ConfigDict(extra="forbid", frozen=True)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PARAM_NAMES], dtype=np.float64)

    @classmethod
    def from_array(cls, values: np.ndarray | list[float]) -> "ParamVector":
        return cls(**{name: float(v) for name, v in zip(PARAM_NAMES, values, strict=True)})


class ModelSpec(BaseModel):
    """Which bias events are active, whether closure is dichotomized, and the graph order."""

    n: int = Field(ge=2, description="Graph order N")
    dichotomized: bool = Field(default=False, description="Truncate closure statistics at 1")
    parent: bool = Field(default=True, description="Parent event active")
    sibling: bool = Field(default=True, description="Sibling event active")
    double_role: bool = Field(default=True, description="Double-role event active")
    satiation: bool = Field(default=True, description="Satiation (inhibitory) event active")

    model_config = ConfigDict(extra="forbid", frozen=True)

    @property
    def model_class(self) -> str:
        return "dichotomized" if self.dichotomized else "undichotomized"


class EventCounts(BaseModel):
    """Counts of potential bias events for one focal edge variable."""

    t_parent: int = Field(default=0, ge=0, description="Reciprocating edge present (0/1)")
    t_sibling: int = Field(default=0, ge=0, description="Incoming shared partners")
    t_droles: int = Field(default=0, ge=0, description="Double-role events")
    w_satiation: int = Field(default=0, ge=0, description="Other out-ties of ego")

    model_config = ConfigDict(extra="forbid", frozen=True)

    @property
    def t_const(self) -> int:
        return 1
