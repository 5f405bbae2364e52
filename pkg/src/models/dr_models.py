"""
Value types of the delayed-rejection acceptance table.
"""

import math
from typing import NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator


class ZeroAwareLog(NamedTuple):
    """exp(log_magnitude) * 0**zero_count; products add both fields."""

    log_magnitude: float
    zero_count: int = 0

    @classmethod
    def from_log(cls, value: float) -> "ZeroAwareLog":
        """Map a log-density to the zero-aware form; -inf becomes one exact zero."""
        if value == -math.inf:
            return cls(0.0, 1)
        return cls(float(value), 0)

    def times(self, other: "ZeroAwareLog") -> "ZeroAwareLog":
        return ZeroAwareLog(
            self.log_magnitude + other.log_magnitude, self.zero_count + other.zero_count
        )

    @property
    def is_zero(self) -> bool:
        return self.zero_count > 0


class TableEntry(BaseModel):
    """One cell of the triangular alpha table (sub-chain j..k)."""

    model_config = ConfigDict(frozen=True)

    log_num: ZeroAwareLog
    log_den: ZeroAwareLog
    log_alpha: float
    alpha_is_one: bool

    @property
    def alpha(self) -> float:
        return 1.0 if self.alpha_is_one else math.exp(self.log_alpha)

    @model_validator(mode="after")
    def _check_unity(self):
        if self.alpha_is_one and self.log_alpha != 0.0:
            raise ValueError("alpha_is_one requires log_alpha == 0")
        return self


class DrOutcome(BaseModel):
    """Result of one delayed-rejection excursion."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    accepted_state: Optional[np.ndarray] = None
    accepted_stage: Optional[int] = None
    log_target: Optional[float] = None
    n_target_evals: int
    n_proposal_evals: int
    stages_run: int

    @model_validator(mode="after")
    def _check_pairing(self):
        if (self.accepted_state is None) != (self.accepted_stage is None):
            raise ValueError("accepted_state present iff accepted_stage present")
        return self

    @property
    def accepted(self) -> bool:
        return self.accepted_stage is not None
