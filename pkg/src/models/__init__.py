"""
Models package initialization.
"""

from src.models.calibration_models import (
    CalibrationConfig,
    LossGrid,
    LossKind,
    Recommendation,
    TargetStructure,
)
from src.models.chain_models import (
    Chain,
    ChainConfig,
    ChainSummary,
    IterationRecord,
    ProposalKind,
    SamplerMode,
)
from src.models.diagnostics_models import (
    AcfResult,
    ChainDiagnostics,
    DimensionDiagnostics,
    VarianceGainEstimate,
)
from src.models.dr_models import DrOutcome, TableEntry, ZeroAwareLog
from src.models.experiment_models import (
    CompareConfig,
    CompareRun,
    ComparisonReport,
    ComparisonRow,
    ExperimentConfig,
)
from src.models.proposal_models import (
    ProposalRole,
    ProposalSpec,
    SingleGaussianDimension,
    ThreeGaussianDimension,
    ThreeGaussianParams,
)
from src.models.target_models import (
    DiscreteLattice,
    GaussianMixture1D,
    IslandComb,
    TargetSpec,
)

__all__ = [
    'AcfResult',
    'CalibrationConfig',
    'Chain',
    'ChainConfig',
    'ChainDiagnostics',
    'ChainSummary',
    'CompareConfig',
    'CompareRun',
    'ComparisonReport',
    'ComparisonRow',
    'DimensionDiagnostics',
    'DiscreteLattice',
    'DrOutcome',
    'ExperimentConfig',
    'GaussianMixture1D',
    'IslandComb',
    'IterationRecord',
    'LossGrid',
    'LossKind',
    'ProposalKind',
    'ProposalRole',
    'ProposalSpec',
    'Recommendation',
    'SamplerMode',
    'SingleGaussianDimension',
    'TableEntry',
    'TargetSpec',
    'TargetStructure',
    'ThreeGaussianDimension',
    'ThreeGaussianParams',
    'VarianceGainEstimate',
    'ZeroAwareLog',
]
