"""Ensemble high-impact-weather indices and their verification.

Computes four ensemble summary indices (cpf, efi, sot, anf) from a
forecast distribution and a local climate distribution, and verifies them
as actionable forecasts: contingency tables, ROC/AUC, cost-loss economic
value, reliability, rank correlation, and block-bootstrap confidence
intervals. A seeded synthetic-data generator makes every experiment
reproducible at desk scale.
"""

from .climatology import (
    ClimateDistribution,
    ReforecastArchive,
    build_climate,
    day_of_year,
    return_period,
)
from .distributions import (
    PERCENTILE_LEVELS,
    EmpiricalDistribution,
    PercentileGrid,
    to_percentile_grid,
)
from .indices import (
    CrossingBranch,
    CrossingResult,
    IndexField,
    IndexKind,
    IndexValue,
    anf,
    compute_index_field,
    cpf,
    efi,
    index_value,
    sot,
)
from .synthgen import ScenarioConfig, SyntheticDataset, analytic_cpf_oracle, generate
from .verification import (
    ACTIONABLE_THRESHOLDS,
    ContingencyTable,
    PevCurve,
    ReliabilityDiagram,
    RocCurve,
    VerificationRecord,
    VerificationSample,
    actionable_thresholds,
    auc_skill_score,
    binarize,
    block_bootstrap_ci,
    build_verification_sample,
    conditional_filter,
    contingency,
    economic_value,
    index_histogram,
    kendall_tau,
    kendall_tau_arrays,
    kendall_tau_by_date,
    pev_curve,
    reliability_diagram,
    roc_curve,
    threshold_grid,
)

__version__ = "0.1.0"
