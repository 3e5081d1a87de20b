"""Nonlinear Granger causality via kernel ridge regression.

Directed links between simultaneously observed time-series are identified
by comparing out-of-sample prediction errors of a restricted (source-free)
and an unrestricted kernel ridge regression with a one-sided sign test.
A classical linear F-test baseline, six benchmark network generators, an
evaluation harness, and a CLI ship alongside.
"""

from .bench import (
    CombinationSummary,
    ExperimentPlan,
    ExperimentResult,
    RuntimeRecord,
    SetResult,
    run_experiment,
    summarize,
    write_outputs,
)
from .cao import CaoAnalysis, minimum_embedding_dimension, select_lag_cao
from .engine import (
    GcConfig,
    GcTestResult,
    PValueMatrix,
    gc_network,
    gc_test,
    gc_test_linear,
)
from .evaluation import (
    EdgeScores,
    NetworkEvalReport,
    ThresholdMetrics,
    auc,
    brier,
    edge_scores,
    evaluate_scores,
    gmean_optimal_threshold,
    threshold_metrics,
)
from .kernel_ridge import (
    KernelConfig,
    KrrModel,
    cross_kernel,
    gram_matrix,
    krr_fit,
    krr_predict,
    rbf_kernel,
)
from .panel import (
    LagDesign,
    SplitSpec,
    TimeSeriesPanel,
    build_lag_design,
    quantile_transform,
    quantile_transform_panel,
    read_panel_csv,
    split_train_test,
    write_panel_csv,
)
from .simnet import (
    GroundTruth,
    NetworkSpec,
    SimulationDivergedError,
    generate,
    network_truth,
    zachary1_truth,
    zachary2_truth,
)
from .stattests import (
    TestOutcome,
    UndecidableTestError,
    granger_f_test,
    sign_test,
    wilcoxon_signed_rank,
)

__version__ = "0.1.0"

__all__ = [
    "CaoAnalysis",
    "CombinationSummary",
    "EdgeScores",
    "ExperimentPlan",
    "ExperimentResult",
    "GcConfig",
    "GcTestResult",
    "GroundTruth",
    "KernelConfig",
    "KrrModel",
    "LagDesign",
    "NetworkEvalReport",
    "NetworkSpec",
    "PValueMatrix",
    "RuntimeRecord",
    "SetResult",
    "SimulationDivergedError",
    "SplitSpec",
    "TestOutcome",
    "ThresholdMetrics",
    "TimeSeriesPanel",
    "UndecidableTestError",
    "auc",
    "brier",
    "build_lag_design",
    "cross_kernel",
    "edge_scores",
    "evaluate_scores",
    "gc_network",
    "gc_test",
    "gc_test_linear",
    "generate",
    "gmean_optimal_threshold",
    "gram_matrix",
    "granger_f_test",
    "krr_fit",
    "krr_predict",
    "minimum_embedding_dimension",
    "network_truth",
    "quantile_transform",
    "quantile_transform_panel",
    "rbf_kernel",
    "read_panel_csv",
    "run_experiment",
    "select_lag_cao",
    "sign_test",
    "split_train_test",
    "summarize",
    "threshold_metrics",
    "wilcoxon_signed_rank",
    "write_outputs",
    "write_panel_csv",
    "zachary1_truth",
    "zachary2_truth",
]
