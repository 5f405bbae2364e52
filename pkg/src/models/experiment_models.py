"""
Configuration-file schemas for the command-line front end.
"""

from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from src.models.chain_models import SEED_MAX, ChainConfig, SamplerMode
from src.models.errors import ConfigMismatchError
from src.models.proposal_models import DimensionSpec, ProposalSpec
from src.models.target_models import TargetSpec


class ProposalSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dimensions: Tuple[DimensionSpec, ...] = Field(min_length=1)
    base_widths: Tuple[PositiveFloat, ...] = Field(min_length=1)

    @property
    def spec(self) -> ProposalSpec:
        return ProposalSpec(dimensions=self.dimensions)


class StartSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    initial_state: Optional[Tuple[float, ...]] = None
    initial_box: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None


class RunSection(StartSection):
    mode: SamplerMode = SamplerMode.DELAYED_REJECTION
    n_iterations: int = Field(ge=1)
    p_dr: float = Field(default=0.0, ge=0, le=1)
    p_bj: float = Field(default=0.0, ge=0, le=1)
    n_dr: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, le=SEED_MAX)


class OutputSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    directory: str = "output"
    chain_file: str = "chain.csv"
    summary_file: str = "summary.json"


class ExperimentConfig(BaseModel):
    """Top-level document consumed by the sample subcommand."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    target: TargetSpec
    proposal: ProposalSection
    run: RunSection
    output: OutputSection = OutputSection()

    @model_validator(mode="after")
    def _check_consistency(self):
        # Builds (and so validates) the derived chain configuration
        self.to_chain_config()
        return self

    def to_chain_config(self, seed: Optional[int] = None) -> ChainConfig:
        return ChainConfig(
            target=self.target,
            spec=self.proposal.spec,
            base_proposal=self.proposal.base_widths,
            mode=self.run.mode,
            p_dr=self.run.p_dr,
            p_bj=self.run.p_bj,
            n_dr=self.run.n_dr,
            n_iterations=self.run.n_iterations,
            seed=self.run.seed if seed is None else seed,
            initial_state=self.run.initial_state,
            initial_box=self.run.initial_box,
        )


class CompareRun(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: SamplerMode
    p_dr: float = Field(default=0.0, ge=0, le=1)
    p_bj: float = Field(default=0.0, ge=0, le=1)
    n_dr: int = Field(default=1, ge=1)


class CompareConfig(BaseModel):
    """Modes A, B and C run on a shared target until a shared evaluation budget."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    target: TargetSpec
    proposal: ProposalSection
    start: StartSection
    runs: Tuple[CompareRun, ...] = Field(min_length=1)
    budget: int = Field(ge=1)
    seed: int = Field(default=0, ge=0, le=SEED_MAX)
    repeats: int = Field(default=1, ge=1)
    monitor_dim: int = Field(default=0, ge=0)
    dominant_half_width: Optional[PositiveFloat] = None
    output: OutputSection = OutputSection(summary_file="comparison.json")

    @model_validator(mode="after")
    def _check_runs(self):
        modes = [run.mode for run in self.runs]
        if len(set(modes)) != len(modes):
            raise ConfigMismatchError("each sampler mode may appear only once")
        if self.monitor_dim >= self.target.ndim:
            raise ValueError("monitor_dim must index a target dimension")
        for run in self.runs:
            self.chain_config(run, self.seed)
        return self

    def chain_config(self, run: CompareRun, seed: int) -> ChainConfig:
        # n_iterations is a placeholder; compare runs stop on the budget
        return ChainConfig(
            target=self.target,
            spec=self.proposal.spec,
            base_proposal=self.proposal.base_widths,
            mode=run.mode,
            p_dr=run.p_dr,
            p_bj=run.p_bj,
            n_dr=run.n_dr,
            n_iterations=1,
            seed=seed,
            initial_state=self.start.initial_state,
            initial_box=self.start.initial_box,
        )


class ComparisonRow(BaseModel):
    """One mode of one repeat in a fixed-budget comparison."""

    mode: SamplerMode
    repeat: int
    seed: int
    n_iterations: int
    total_target_evals: int
    first_passage: Optional[int] = None
    tau_int: Optional[float] = None
    mode_transitions: int

    @property
    def label(self) -> str:
        return self.mode.label


class ComparisonReport(BaseModel):
    schema_version: int = 1
    config_hash: str
    budget: int
    monitor_dim: int
    dominant_center: float
    dominant_half_width: float
    rows: Tuple[ComparisonRow, ...]
