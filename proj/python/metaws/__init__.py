"""Meta-learning workbench: complexity meta-features, landmarker evaluation,
targeted synthetic dataset generation, and augmentation analysis."""

from ._core import (
    algorithm_names,
    build_dataset,
    canonical_set,
    cell_of,
    compute_meta_features,
    evaluate_xy,
    grid_cells,
    hamming_loss,
    kfold,
    margin_distance,
    monte_carlo_frequencies,
    nemenyi_cd,
    paired_t_test,
    pearson,
    r2_score,
    run_generation,
    sample_pool,
    selection_probs,
    spearman,
    subset_accuracy,
    tscv,
)

__all__ = [
    "algorithm_names",
    "build_dataset",
    "canonical_set",
    "cell_of",
    "compute_meta_features",
    "evaluate_xy",
    "grid_cells",
    "hamming_loss",
    "kfold",
    "margin_distance",
    "monte_carlo_frequencies",
    "nemenyi_cd",
    "paired_t_test",
    "pearson",
    "r2_score",
    "run_generation",
    "sample_pool",
    "selection_probs",
    "spearman",
    "subset_accuracy",
    "tscv",
]
