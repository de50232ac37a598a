"""Two-view image matching and fundamental-matrix estimation toolkit."""

from ._core import (
    Correspondence,
    EstimationResult,
    EstimatorConfig,
    EstimatorKind,
    FundamentalMatrix,
    ImageDims,
    RigKind,
    SceneConfig,
    SgdConfig,
    SyntheticPair,
    TwoViewError,
    compute_nsgd,
    compute_sgd,
    estimate,
    generate_pair,
    inlier_rate,
    load_fmatrix,
    nsgd,
    ratio_test_list,
    recall,
    save_fmatrix,
    solve_eight_point,
    solve_seven_point,
    sort_by_ratio,
)

__all__ = [
    "Correspondence",
    "EstimationResult",
    "EstimatorConfig",
    "EstimatorKind",
    "FundamentalMatrix",
    "ImageDims",
    "RigKind",
    "SceneConfig",
    "SgdConfig",
    "SyntheticPair",
    "TwoViewError",
    "compute_nsgd",
    "compute_sgd",
    "estimate",
    "generate_pair",
    "inlier_rate",
    "load_fmatrix",
    "nsgd",
    "ratio_test_list",
    "recall",
    "save_fmatrix",
    "solve_eight_point",
    "solve_seven_point",
    "sort_by_ratio",
]
