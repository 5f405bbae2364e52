"""
Data models for proposal-loss calibration grids and recommendations.
"""

import itertools
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.chain_models import SEED_MAX

S1_AXIS = "s1_over_mu"
S2_AXIS = "s2_over_mu"
NA_AXIS = "na"
NB_AXIS = "nb"
NDR_AXIS = "n_dr"

DEFAULT_SIGMA_LADDER = (2.00, 0.54, 0.15, 0.04)


class LossKind(str, Enum):
    AP = "ap"
    CPE = "cpe"
    VALIDITY = "validity"

    @property
    def axes(self) -> Tuple[str, ...]:
        return {
            LossKind.AP: (S1_AXIS, S2_AXIS, NA_AXIS, NB_AXIS),
            LossKind.CPE: (S1_AXIS, S2_AXIS, NB_AXIS, NDR_AXIS),
            LossKind.VALIDITY: (S1_AXIS, S2_AXIS),
        }[self]


class LossGrid(BaseModel):
    """Expected log proposal-ratio values over a product of named axes."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: LossKind
    axes: Dict[str, Tuple[float, ...]]
    values: np.ndarray
    stderr: np.ndarray
    mc_samples: int

    @model_validator(mode="after")
    def _check_shape(self):
        shape = tuple(len(v) for v in self.axes.values())
        if self.values.shape != shape or self.stderr.shape != shape:
            raise ValueError(f"grid values must have shape {shape}")
        return self

    @property
    def axis_names(self) -> Tuple[str, ...]:
        return tuple(self.axes.keys())

    def axis(self, name: str) -> np.ndarray:
        return np.asarray(self.axes[name], dtype=float)

    def positivity_violations(self, n_sigma: float = 3.0) -> int:
        """Cells whose loss exceeds zero by more than n_sigma standard errors."""
        if self.kind == LossKind.VALIDITY:
            return 0
        return int(np.sum(self.values > n_sigma * np.nan_to_num(self.stderr)))

    def to_frame(self) -> pd.DataFrame:
        """Flat table: one column per axis, then value and stderr."""
        rows = list(itertools.product(*self.axes.values()))
        frame = pd.DataFrame(rows, columns=list(self.axes.keys()))
        frame["value"] = self.values.ravel()
        frame["stderr"] = self.stderr.ravel()
        return frame

    @classmethod
    def from_frame(
        cls, frame: pd.DataFrame, kind: LossKind, mc_samples: int
    ) -> "LossGrid":
        names = list(kind.axes)
        axes = {name: tuple(sorted(frame[name].unique().tolist())) for name in names}
        shape = tuple(len(v) for v in axes.values())
        ordered = frame.sort_values(names)
        if len(ordered) != int(np.prod(shape)):
            raise ValueError("loss-grid table is not a full product of its axes")
        return cls(
            kind=kind,
            axes=axes,
            values=ordered["value"].to_numpy(dtype=float).reshape(shape),
            stderr=ordered["stderr"].to_numpy(dtype=float).reshape(shape),
            mc_samples=mc_samples,
        )


class TargetStructure(BaseModel):
    """Typical mode spacing and widths of a target, in parameter units."""

    mode_spacing: float = Field(gt=0)
    mode_widths: Tuple[float, float]

    @model_validator(mode="after")
    def _check_widths(self):
        if min(self.mode_widths) <= 0:
            raise ValueError("mode widths must be positive")
        return self


class Recommendation(BaseModel):
    sigma1: float
    sigma2: float
    mu: float
    na: float
    nb: float
    n_dr: int
    grid_cell: Tuple[float, float]
    expected_ap_loss: float
    expected_cpe_loss: float


class CalibrationConfig(BaseModel):
    """Sweep definition read by the calibrate subcommand."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: LossKind
    s1_over_mu: Tuple[float, ...] = DEFAULT_SIGMA_LADDER
    s2_over_mu: Tuple[float, ...] = DEFAULT_SIGMA_LADDER
    na: Tuple[float, ...] = tuple(round(0.05 * i, 2) for i in range(1, 20))
    nb: Tuple[float, ...] = tuple(round(0.05 * i, 2) for i in range(1, 20))
    n_dr: Tuple[int, ...] = (3, 10, 100, 500)
    n_samples: int = Field(default=100_000, ge=10_000)
    excursion_length: int = Field(default=2, ge=2)
    batch_size: int = Field(default=2_000, ge=1)
    seed: int = Field(default=0, ge=0, le=SEED_MAX)
    name: Optional[str] = None

    @model_validator(mode="after")
    def _check_grid(self):
        for label, values in (("s1_over_mu", self.s1_over_mu), ("s2_over_mu", self.s2_over_mu)):
            if not values or min(values) <= 0:
                raise ValueError(f"{label} values must be positive")
        for label, values in (("na", self.na), ("nb", self.nb)):
            if not values or min(values) <= 0 or max(values) >= 1:
                raise ValueError(f"{label} values must lie strictly inside (0, 1)")
        if self.kind == LossKind.CPE and (not self.n_dr or min(self.n_dr) < 3):
            raise ValueError("n_dr values must be at least 3")
        return self
