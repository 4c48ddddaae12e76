"""Heterogeneous transfer distance metric learning.

Thin Python surface over the C++ core: weak pair supervision in the target
domain, knowledge fragments distilled from a source metric on unlabeled
cross-domain correspondences, and a manifold regularizer, optimized by a
smoothed projected-gradient solver with an optional gradient-boosted
nonlinear refinement.
"""

from htdml._core import (
    BenchParams,
    BenchReport,
    BoostedMap,
    CorrespondenceSet,
    DataError,
    EvalReport,
    FragmentKind,
    FragmentMatrix,
    FundamentalElements,
    HyperParams,
    LabeledPairSet,
    LabeledPointSet,
    LinearMap,
    ModelMeta,
    NeighborGraph,
    NumericError,
    RegressionTree,
    SynthConfig,
    SynthData,
    TrainTrace,
    accuracy,
    boost_train,
    build_fragment_matrix,
    build_neighbor_graph,
    decompose_metric,
    default_bandwidth,
    evaluate,
    fd_gradient,
    fit_tree,
    fragment_matrix_from_table,
    generate_synthetic,
    gradient_smoothed,
    knn_classify,
    load_correspondences,
    load_fragment_matrix,
    load_model,
    load_pair_dataset,
    load_point_set,
    load_samples,
    macro_f1,
    mean_average_precision,
    manifold_value_grad,
    normalized_source_metric,
    objective_smoothed,
    pairwise_distance,
    pgm_train,
    project_nonneg,
    rbf_kernel,
    run_benchmark,
    save_fragment_matrix,
    save_model,
    save_samples,
    smoothed_abs,
    smoothed_hinge,
    smoothed_loss_oracle_abs,
    smoothed_loss_oracle_hinge,
    train_source_metric,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
