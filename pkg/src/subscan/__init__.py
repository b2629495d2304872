"""Distribution-free, size-adaptive submatrix detection.

Permutation-calibrated scan tests for a mean shift confined to an unknown
m x n submatrix, with Bonferroni aggregation over candidate sizes and a
binary-expansion size net that keeps the aggregation sweep small.
"""

from subscan._kernels import BACKEND as backend_name
from subscan.detect import (
    TestOutcome,
    bonferroni_full,
    bonferroni_net,
    single_size_test,
    upper_bound_single_pair,
)
from subscan.experiment import (
    ExperimentConfig,
    ResultRow,
    csv_text,
    read_rows,
    run_experiment,
    write_csv,
)
from subscan.model import (
    NoiseFamily,
    PlantedInstance,
    TiltedDistribution,
    generate_instance,
    log_mgf,
    sample_tilted,
)
from subscan.net import ApproxNet, build_net, default_k, k_binary_approx, neighbor
from subscan.perm import (
    MCConfig,
    PermutationKind,
    PValue,
    exact_pvalue_enum,
    mc_pvalue,
    permute,
)
from subscan.plotsvg import emit_plot
from subscan.stats import (
    BudgetExceededError,
    ScanResult,
    SubmatrixSupport,
    scan_exact,
    scan_las,
    submatrix_sum,
    sum_stat,
)
from subscan.theory import (
    RegimeReport,
    bernstein_log_tail,
    detection_ratios,
    log_binomial,
    log_pvalue_bound,
    theta_crit,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxNet",
    "BudgetExceededError",
    "ExperimentConfig",
    "MCConfig",
    "NoiseFamily",
    "PValue",
    "PermutationKind",
    "PlantedInstance",
    "RegimeReport",
    "ResultRow",
    "ScanResult",
    "SubmatrixSupport",
    "TestOutcome",
    "TiltedDistribution",
    "__version__",
    "backend_name",
    "bernstein_log_tail",
    "bonferroni_full",
    "bonferroni_net",
    "build_net",
    "csv_text",
    "default_k",
    "detection_ratios",
    "emit_plot",
    "exact_pvalue_enum",
    "generate_instance",
    "k_binary_approx",
    "log_binomial",
    "log_mgf",
    "log_pvalue_bound",
    "mc_pvalue",
    "neighbor",
    "permute",
    "read_rows",
    "run_experiment",
    "sample_tilted",
    "scan_exact",
    "scan_las",
    "single_size_test",
    "submatrix_sum",
    "sum_stat",
    "theta_crit",
    "upper_bound_single_pair",
    "write_csv",
]
