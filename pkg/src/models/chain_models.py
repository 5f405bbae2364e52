"""
Data models for sampler configuration and generated chains.
"""

from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PositiveFloat,
    model_validator,
)

from src.models.errors import DimensionMismatchError
from src.models.proposal_models import ProposalSpec
from src.models.target_models import TargetSpec

SEED_MAX = 2**64 - 1


class SamplerMode(str, Enum):
    BASELINE_RARE_JUMP = "baseline_rare_jump"
    BASELINE_FREQUENT_JUMP = "baseline_frequent_jump"
    DELAYED_REJECTION = "delayed_rejection"

    @property
    def label(self) -> str:
        return {
            SamplerMode.BASELINE_RARE_JUMP: "A",
            SamplerMode.BASELINE_FREQUENT_JUMP: "B",
            SamplerMode.DELAYED_REJECTION: "C",
        }[self]


class ProposalKind(str, Enum):
    INIT = "init"
    BASE = "base"
    BIG_JUMP = "big_jump"
    DR = "dr"


class ChainConfig(BaseModel):
    """Everything run_chain needs; validated before any compute."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    target: TargetSpec
    spec: ProposalSpec
    base_proposal: Tuple[PositiveFloat, ...] = Field(min_length=1)
    mode: SamplerMode = SamplerMode.DELAYED_REJECTION
    p_dr: float = Field(default=0.0, ge=0, le=1)
    p_bj: float = Field(default=0.0, ge=0, le=1)
    n_dr: int = Field(default=1, ge=1)
    n_iterations: int = Field(ge=1)
    seed: int = Field(default=0, ge=0, le=SEED_MAX)
    initial_state: Optional[Tuple[float, ...]] = None
    initial_box: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None

    @model_validator(mode="after")
    def _check_dimensions(self):
        ndim = self.target.ndim
        if self.spec.ndim != ndim:
            raise DimensionMismatchError(
                f"proposal spec has {self.spec.ndim} dimensions, target has {ndim}"
            )
        if len(self.base_proposal) != ndim:
            raise DimensionMismatchError(
                f"base_proposal has {len(self.base_proposal)} widths, target has {ndim}"
            )
        if (self.initial_state is None) == (self.initial_box is None):
            raise ValueError("exactly one of initial_state or initial_box is required")
        if self.initial_state is not None and len(self.initial_state) != ndim:
            raise DimensionMismatchError("initial_state dimension mismatch")
        if self.initial_box is not None:
            low, high = self.initial_box
            if len(low) != ndim or len(high) != ndim:
                raise DimensionMismatchError("initial_box dimension mismatch")
            if any(h < l for l, h in zip(low, high)):
                raise ValueError("initial_box upper corner below lower corner")
        return self

    @property
    def ndim(self) -> int:
        return self.target.ndim


class IterationRecord(BaseModel):
    accepted: bool
    dr_stage: Optional[int] = None
    target_evals: int
    proposal: ProposalKind


class Chain(BaseModel):
    """
    States (initial state first) plus per-iteration bookkeeping arrays.

    dr_stage holds 0 for iterations without an accepted DR stage.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    states: np.ndarray
    accepted: np.ndarray
    dr_stage: np.ndarray
    target_evals: np.ndarray
    proposal_kinds: np.ndarray

    @model_validator(mode="after")
    def _check_lengths(self):
        n = len(self.accepted)
        if self.states.ndim != 2 or len(self.states) != n + 1:
            raise ValueError("states must hold n_iterations + 1 rows")
        if not len(self.dr_stage) == len(self.target_evals) == len(self.proposal_kinds) == n:
            raise ValueError("per-iteration arrays must share a length")
        return self

    @property
    def n_iterations(self) -> int:
        return len(self.accepted)

    @property
    def ndim(self) -> int:
        return self.states.shape[1]

    @property
    def total_target_evals(self) -> int:
        return int(self.target_evals.sum())

    def record(self, i: int) -> IterationRecord:
        """Bookkeeping of iteration i (0-based, i.e. the transition to states[i + 1])."""
        stage = int(self.dr_stage[i])
        return IterationRecord(
            accepted=bool(self.accepted[i]),
            dr_stage=stage if stage > 0 else None,
            target_evals=int(self.target_evals[i]),
            proposal=ProposalKind(str(self.proposal_kinds[i])),
        )


class KindStats(BaseModel):
    proposed: int
    accepted: int
    rate: Optional[float] = None


class DrStats(BaseModel):
    entries: int
    acceptances: int
    mean_accepted_stage: Optional[float] = None
    target_evals: int


class ChainSummary(BaseModel):
    schema_version: int = 1
    config_hash: str
    seed: int
    mode: SamplerMode
    n_iterations: int
    total_target_evals: int
    acceptance_rates: dict
    dr: DrStats
    notes: List[str] = Field(default_factory=list)
