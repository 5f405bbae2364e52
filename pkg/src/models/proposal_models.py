"""
Data models for the 3-Gaussian delayed-rejection proposals.
"""

from enum import Enum
from typing import Annotated, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field


class ProposalRole(str, Enum):
    BIG_JUMP = "a"
    SMALL_STEP = "b"


class ThreeGaussianParams(BaseModel):
    """Symmetric mixture: central N(0, sigma1) plus side N(+-mu, sigma2)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sigma1: float = Field(gt=0)
    sigma2: float = Field(gt=0)
    mu: float = Field(ge=0)
    weight_center: float = Field(ge=0, le=1)


class ThreeGaussianDimension(BaseModel):
    """
    One coordinate proposed from the pair (q_a, q_b).

    Both members share sigma1, sigma2 and mu; they differ only in the weight of
    the central Gaussian (na at stage 1, nb at later stages).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["three_gaussian"] = "three_gaussian"
    sigma1: float = Field(gt=0)
    sigma2: float = Field(gt=0)
    mu: float = Field(ge=0)
    na: float = Field(ge=0, le=1)
    nb: float = Field(ge=0, le=1)

    @property
    def q_a(self) -> ThreeGaussianParams:
        return ThreeGaussianParams(
            sigma1=self.sigma1, sigma2=self.sigma2, mu=self.mu, weight_center=self.na
        )

    @property
    def q_b(self) -> ThreeGaussianParams:
        return ThreeGaussianParams(
            sigma1=self.sigma1, sigma2=self.sigma2, mu=self.mu, weight_center=self.nb
        )

    def params_for(self, role: ProposalRole) -> ThreeGaussianParams:
        return self.q_a if role == ProposalRole.BIG_JUMP else self.q_b


class SingleGaussianDimension(BaseModel):
    """One coordinate proposed from the same Gaussian at every stage."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["single_gaussian"] = "single_gaussian"
    sigma: float = Field(gt=0)

    def params_for(self, role: ProposalRole) -> ThreeGaussianParams:
        # A lone Gaussian is the mixture with all weight in the centre
        return ThreeGaussianParams(
            sigma1=self.sigma, sigma2=self.sigma, mu=0.0, weight_center=1.0
        )


DimensionSpec = Annotated[
    Union[ThreeGaussianDimension, SingleGaussianDimension], Field(discriminator="kind")
]


class ProposalSpec(BaseModel):
    """Per-dimension proposal description used by every DR stage."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dimensions: Tuple[DimensionSpec, ...] = Field(min_length=1)

    @property
    def ndim(self) -> int:
        return len(self.dimensions)

    @classmethod
    def three_gaussian(
        cls, sigma1: float, sigma2: float, mu: float, na: float, nb: float
    ) -> "ProposalSpec":
        """Convenience constructor for a 1-dimension 3-Gaussian spec."""
        return cls(
            dimensions=(
                ThreeGaussianDimension(
                    sigma1=sigma1, sigma2=sigma2, mu=mu, na=na, nb=nb
                ),
            )
        )

    @classmethod
    def single_gaussian(cls, *sigmas: float) -> "ProposalSpec":
        return cls(dimensions=tuple(SingleGaussianDimension(sigma=s) for s in sigmas))
