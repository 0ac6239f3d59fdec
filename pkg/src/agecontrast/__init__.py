"""Kernel-weighted contrastive learning for regression on continuous labels.

The package implements four contrastive losses whose positive/negative
structure is softened by a kernel on label differences, together with an
L1 regression baseline, a small MLP encoder trained with Adam, a synthetic
multi-site cohort generator, and an evaluation pipeline covering age
prediction error, site-information probing, brain-age-gap statistics, and
a combined challenge score.
"""

from .errors import (
    CohortParseError,
    DegenerateBatchError,
    DegenerateInputError,
    IllConditionedError,
    InvalidArgumentError,
    InvalidFoldError,
    TrainingDivergedError,
    UndefinedMetricError,
)
from .kernels import KernelSpec, kernel_eval, weights_for_anchor
from .similarity import (
    SimilarityConfig,
    normalize_rows,
    similarity_matrix,
    validate_embeddings,
)
from .losses import (
    CONTRASTIVE_KINDS,
    KERNEL_KINDS,
    LOSS_KINDS,
    LossConfig,
    LossResult,
    NormalizerCapWarning,
    batch_loss,
    exp_loss,
    infonce_loss,
    l1_regression_loss,
    loss_config_to_dict,
    loss_config_from_dict,
    loss_gradient_check,
    threshold_loss,
    yaware_loss,
)
from .encoder import (
    EncoderParams,
    checkpoint_dict,
    encoder_forward,
    init_encoder,
    load_checkpoint,
    params_from_checkpoint_dict,
    save_checkpoint,
)
from .training import (
    AdamState,
    TrainConfig,
    TrainHistory,
    adam_step,
    fit_encoder,
    lr_at_epoch,
    train_config_from_dict,
    train_config_to_dict,
)
from .cohort import (
    Cohort,
    GROUPS,
    SyntheticSpec,
    external_sites,
    generate_cohort,
    read_cohort_csv,
    stratified_subject_folds,
    synthetic_spec_from_dict,
    synthetic_spec_to_dict,
    write_cohort_csv,
)
from .metrics import (
    BagRecord,
    DegenerateScoreWarning,
    RidgeReadout,
    bag_records,
    balanced_accuracy,
    challenge_score,
    finetune_classifier,
    fit_ridge_readout,
    group_bag_stats,
    longitudinal_bag_slopes,
    mae,
    mae_accuracy_correlation,
    predict_age,
    r_squared,
    roc_auc,
    site_probe_bacc,
)
from .evaluation import (
    EvalConfig,
    EvalReport,
    ExperimentResult,
    SplitIndices,
    compute_split,
    embed_cohort,
    eval_config_from_dict,
    eval_config_to_dict,
    evaluate_params,
    history_to_dict,
    read_json,
    run_experiment,
    write_json,
)
from .sweep import (
    SWEEP_AXES,
    SweepSpec,
    run_sweep,
    summarize,
    sweep_spec_from_dict,
    sweep_spec_to_dict,
    write_trend_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "BagRecord",
    "CONTRASTIVE_KINDS",
    "Cohort",
    "CohortParseError",
    "DegenerateBatchError",
    "DegenerateInputError",
    "DegenerateScoreWarning",
    "EncoderParams",
    "EvalConfig",
    "EvalReport",
    "ExperimentResult",
    "GROUPS",
    "IllConditionedError",
    "InvalidArgumentError",
    "InvalidFoldError",
    "KERNEL_KINDS",
    "KernelSpec",
    "LOSS_KINDS",
    "LossConfig",
    "LossResult",
    "NormalizerCapWarning",
    "RidgeReadout",
    "SWEEP_AXES",
    "SimilarityConfig",
    "SplitIndices",
    "SweepSpec",
    "SyntheticSpec",
    "TrainConfig",
    "TrainHistory",
    "TrainingDivergedError",
    "UndefinedMetricError",
    "adam_step",
    "bag_records",
    "balanced_accuracy",
    "batch_loss",
    "challenge_score",
    "checkpoint_dict",
    "compute_split",
    "embed_cohort",
    "encoder_forward",
    "eval_config_from_dict",
    "eval_config_to_dict",
    "evaluate_params",
    "exp_loss",
    "external_sites",
    "finetune_classifier",
    "fit_encoder",
    "fit_ridge_readout",
    "generate_cohort",
    "group_bag_stats",
    "history_to_dict",
    "infonce_loss",
    "init_encoder",
    "kernel_eval",
    "l1_regression_loss",
    "load_checkpoint",
    "longitudinal_bag_slopes",
    "loss_config_from_dict",
    "loss_config_to_dict",
    "loss_gradient_check",
    "lr_at_epoch",
    "mae",
    "mae_accuracy_correlation",
    "normalize_rows",
    "params_from_checkpoint_dict",
    "predict_age",
    "r_squared",
    "read_cohort_csv",
    "read_json",
    "roc_auc",
    "run_experiment",
    "run_sweep",
    "save_checkpoint",
    "similarity_matrix",
    "site_probe_bacc",
    "stratified_subject_folds",
    "summarize",
    "sweep_spec_from_dict",
    "sweep_spec_to_dict",
    "synthetic_spec_from_dict",
    "synthetic_spec_to_dict",
    "threshold_loss",
    "train_config_from_dict",
    "train_config_to_dict",
    "validate_embeddings",
    "weights_for_anchor",
    "write_cohort_csv",
    "write_json",
    "write_trend_csv",
    "yaware_loss",
]
