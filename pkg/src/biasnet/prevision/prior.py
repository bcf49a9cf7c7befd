"""Spike-and-slab prior over the biased net parameters."""

import hashlib

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from biasnet.engine.models import PARAM_NAMES, ParamVector
from biasnet.errors import InvalidArgumentError

#: Parameters drawn from the shared spike-and-slab; d gets its own slab and no spike.
SPIKED_PARAMS: tuple[str, ...] = ("pi", "sigma", "rho", "delta")


class ParameterPrior(BaseModel):
    """Mixture of a point mass at 0 (weight ``spike``) and a Beta(a, b) slab."""

    spike: float = Field(ge=0.0, le=1.0, description="Probability of an exact 0")
    a: float = Field(gt=0.0, description="Beta slab shape a")
    b: float = Field(gt=0.0, description="Beta slab shape b")

    model_config = ConfigDict(extra="forbid", frozen=True)

    @property
    def mean(self) -> float:
        return (1.0 - self.spike) * self.a / (self.a + self.b)


class PriorSpec(BaseModel):
    """Prior used to draw training parameters for graphs of order ``n``.

    The baseline d has a Beta(c * k / (n - 1), c * (1 - k / (n - 1))) slab,
    where k is the target mean degree and c the concentration, so its prior
    mean degree is k.
    """

    n: int = Field(ge=3, description="Graph order N")
    spike_probability: float = Field(
        default=0.5, ge=0.0, le=1.0, description="Spike weight for pi, sigma, rho, delta"
    )
    spike_overrides: dict[str, float] = Field(
        default_factory=dict, description="Per-parameter spike weights replacing the shared one"
    )
    slab_a: float = Field(default=0.5, gt=0.0, description="Slab Beta shape a")
    slab_b: float = Field(default=1.5, gt=0.0, description="Slab Beta shape b")
    target_mean_degree: float = Field(
        default=10.0, gt=0.0, description="Prior mean degree setting d's slab"
    )
    concentration: float = Field(default=5.0, gt=0.0, description="a + b of d's slab")

    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("spike_overrides")
    @classmethod
    def _check_overrides(cls, v: dict[str, float]) -> dict[str, float]:
        for name, weight in v.items():
            if name not in SPIKED_PARAMS:
                raise ValueError(f"spike override for unknown or unspiked parameter {name!r}")
            if not 0.0 <= weight <= 1.0:
                raise ValueError(f"spike weight for {name} must lie in [0, 1], got {weight}")
        return v

    def d_slab(self) -> tuple[float, float]:
        """Beta shapes for d.

        Raises:
            InvalidArgumentError: If the target mean degree is not below N - 1.
        """
        ratio = self.target_mean_degree / (self.n - 1)
        if not 0.0 < ratio < 1.0:
            raise InvalidArgumentError(
                f"target mean degree {self.target_mean_degree} needs N > {self.target_mean_degree + 1:g}, "
                f"got N={self.n}"
            )
        return self.concentration * ratio, self.concentration * (1.0 - ratio)

    def component(self, name: str) -> ParameterPrior:
        if name == "d":
            a, b = self.d_slab()
            return ParameterPrior(spike=0.0, a=a, b=b)
        if name not in SPIKED_PARAMS:
            raise InvalidArgumentError(f"unknown parameter {name!r}")
        spike = self.spike_overrides.get(name, self.spike_probability)
        return ParameterPrior(spike=spike, a=self.slab_a, b=self.slab_b)

    def components(self) -> dict[str, ParameterPrior]:
        return {name: self.component(name) for name in PARAM_NAMES}

    def fingerprint(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).hexdigest()[:16]


def sample_prior(spec: PriorSpec, rng: np.random.Generator) -> ParamVector:
    """One independent draw per parameter, in ``PARAM_NAMES`` order."""
    return ParamVector.from_array(sample_prior_matrix(spec, 1, rng)[0])


def sample_prior_matrix(spec: PriorSpec, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` prior draws as an (m, 5) matrix.

    Spike indicators for all cells are drawn first, then the slabs column by column.
    """
    if m < 0:
        raise InvalidArgumentError(f"draw count must be non-negative, got {m}")
    components = spec.components()
    spikes = rng.random((m, len(PARAM_NAMES)))
    out = np.empty((m, len(PARAM_NAMES)))
    for col, name in enumerate(PARAM_NAMES):
        prior = components[name]
        slab = rng.beta(prior.a, prior.b, size=m)
        out[:, col] = np.where(spikes[:, col] < prior.spike, 0.0, slab)
    return out
