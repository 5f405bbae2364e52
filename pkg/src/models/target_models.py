"""
Declarative descriptions of the built-in target distributions.
"""

from typing import Annotated, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class GaussianMixture1D(BaseModel):
    """Weighted sum of 1-dimension Gaussians; weights are normalized on use."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["gaussian_mixture"] = "gaussian_mixture"
    weights: Tuple[float, ...] = Field(min_length=1)
    centers: Tuple[float, ...] = Field(min_length=1)
    widths: Tuple[float, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_components(self):
        if not len(self.weights) == len(self.centers) == len(self.widths):
            raise ValueError("weights, centers and widths must have equal length")
        if any(w <= 0 for w in self.weights):
            raise ValueError("mixture weights must be positive")
        if any(s <= 0 for s in self.widths):
            raise ValueError("mixture widths must be positive")
        return self

    @property
    def ndim(self) -> int:
        return 1


class IslandComb(BaseModel):
    """
    Multimodal surrogate: isolated Gaussian islands along the comb dimensions.

    Mode k sits at first_center + k * spacing with weight weight_decay**k; the
    remaining dimensions are smooth Gaussian nuisance coordinates.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["island_comb"] = "island_comb"
    n_modes: int = Field(ge=1)
    spacing: float = Field(gt=0)
    mode_width: float = Field(gt=0)
    weight_decay: float = Field(gt=0)
    first_center: float = 0.0
    n_dims: int = Field(default=1, ge=1)
    comb_dims: Tuple[int, ...] = (0,)
    nuisance_center: float = 0.0
    nuisance_width: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _check_dims(self):
        if not self.comb_dims:
            raise ValueError("at least one comb dimension is required")
        if len(set(self.comb_dims)) != len(self.comb_dims):
            raise ValueError("comb_dims must be distinct")
        if any(d < 0 or d >= self.n_dims for d in self.comb_dims):
            raise ValueError("comb_dims must index existing dimensions")
        return self

    @property
    def ndim(self) -> int:
        return self.n_dims


class DiscreteLattice(BaseModel):
    """Explicit probability vector over equally spaced 1-dimension grid points."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["discrete_lattice"] = "discrete_lattice"
    points: Tuple[float, ...] = Field(min_length=2)
    probabilities: Tuple[float, ...] = Field(min_length=2)

    @model_validator(mode="after")
    def _check_lattice(self):
        if len(self.points) != len(self.probabilities):
            raise ValueError("points and probabilities must have equal length")
        if any(p < 0 for p in self.probabilities):
            raise ValueError("probabilities must be non-negative")
        if sum(self.probabilities) <= 0:
            raise ValueError("probabilities must not all be zero")
        steps = [b - a for a, b in zip(self.points, self.points[1:])]
        if any(s <= 0 for s in steps):
            raise ValueError("points must be strictly increasing")
        if max(steps) - min(steps) > 1e-9 * max(steps):
            raise ValueError("points must be equally spaced")
        return self

    @property
    def ndim(self) -> int:
        return 1

    @property
    def pitch(self) -> float:
        return self.points[1] - self.points[0]


TargetSpec = Annotated[
    Union[GaussianMixture1D, IslandComb, DiscreteLattice], Field(discriminator="kind")
]
