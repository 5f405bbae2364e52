"""
Data models for autocorrelation diagnostics.
"""

from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

CONSTANT_SERIES = "constant_series"
WINDOW_NOT_CONVERGED = "window_not_converged"
NON_EXPONENTIAL = "non_exponential"
NON_POSITIVE_RHO = "non_positive_rho"


class AcfResult(BaseModel):
    """Normalized autocorrelation rho(n) = C(n)/C(0) plus derived times."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    lags: np.ndarray
    rho: np.ndarray
    c0: float
    n_samples: int
    tau_int: Optional[float] = None
    tau_exp: Optional[float] = None
    window: Optional[int] = None
    flags: List[str] = Field(default_factory=list)

    @property
    def max_lag(self) -> int:
        return int(self.lags[-1])

    @property
    def is_constant(self) -> bool:
        return CONSTANT_SERIES in self.flags

    def with_flag(self, flag: str, **updates) -> "AcfResult":
        flags = list(self.flags)
        if flag not in flags:
            flags.append(flag)
        return self.model_copy(update={"flags": flags, **updates})


class VarianceGainEstimate(BaseModel):
    """Monte Carlo estimate of (var_A - var_B) / var_B."""

    mean: float
    stderr: float
    n_replicas: int
    closed_form: float


class DimensionDiagnostics(BaseModel):
    tau_int: Optional[float] = None
    tau_exp: Optional[float] = None
    window: Optional[int] = None
    c0: float
    variance_of_mean: Optional[float] = None
    effective_sample_size: Optional[float] = None
    flags: List[str] = Field(default_factory=list)


class ChainDiagnostics(BaseModel):
    schema_version: int = 1
    source: str
    discard: int
    n_samples: int
    max_lag: int
    dimensions: Dict[str, DimensionDiagnostics]
