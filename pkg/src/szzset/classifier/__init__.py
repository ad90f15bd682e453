"""Commit classifier: features, labels, training, and SZZ input filtering."""

from .diagnostics import feature_importance, pca, spearman, spearman_matrix
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    extract_features,
    feature_matrix,
    features_to_csv,
)
from .filtering import (
    FilteredRun,
    filtered_evaluation,
    filtered_to_dict,
    filtered_to_json,
    filtered_to_table,
    make_input_filter,
    oracle_filter_bound,
)
from .labeling import (
    BAD,
    EXCLUDED,
    GOOD,
    SCHEME_ALL_VARIANTS,
    SCHEME_SINGLE,
    LabelMap,
    label_all_variants,
    label_commits,
    label_single,
    training_rows,
)
from .models import (
    MODEL_BAYES,
    MODEL_BOOSTING,
    MODEL_FOREST,
    MODEL_KINDS,
    MODEL_LOGISTIC,
    MODEL_SVM,
    MODEL_TREE,
    Scaler,
    TrainedModel,
    load_model,
    model_from_json,
    model_to_json,
    save_model,
    train,
)
from .sampling import (
    SAMPLER_KINDS,
    SAMPLER_NONE,
    SAMPLER_OVER,
    SAMPLER_SMOTE,
    SAMPLER_UNDER,
    SamplerSpec,
    resample,
)
from .validation import (
    CV_K_FOLD,
    CV_KINDS,
    CV_REPEATED_K_FOLD,
    CV_SHUFFLE_SPLIT,
    CvReport,
    CvSpec,
    SplitMetrics,
    auc_score,
    cross_validate,
    holdout_evaluate,
    split_metrics,
)

__all__ = [
    "FEATURE_NAMES",
    "FeatureVector",
    "extract_features",
    "feature_matrix",
    "features_to_csv",
    "GOOD",
    "BAD",
    "EXCLUDED",
    "SCHEME_SINGLE",
    "SCHEME_ALL_VARIANTS",
    "LabelMap",
    "label_single",
    "label_all_variants",
    "label_commits",
    "training_rows",
    "SAMPLER_NONE",
    "SAMPLER_OVER",
    "SAMPLER_UNDER",
    "SAMPLER_SMOTE",
    "SAMPLER_KINDS",
    "SamplerSpec",
    "resample",
    "MODEL_KINDS",
    "MODEL_LOGISTIC",
    "MODEL_TREE",
    "MODEL_FOREST",
    "MODEL_BOOSTING",
    "MODEL_BAYES",
    "MODEL_SVM",
    "Scaler",
    "TrainedModel",
    "train",
    "save_model",
    "load_model",
    "model_to_json",
    "model_from_json",
    "CV_KINDS",
    "CV_SHUFFLE_SPLIT",
    "CV_K_FOLD",
    "CV_REPEATED_K_FOLD",
    "CvSpec",
    "CvReport",
    "SplitMetrics",
    "auc_score",
    "split_metrics",
    "cross_validate",
    "holdout_evaluate",
    "spearman",
    "spearman_matrix",
    "pca",
    "feature_importance",
    "FilteredRun",
    "make_input_filter",
    "filtered_evaluation",
    "oracle_filter_bound",
    "filtered_to_dict",
    "filtered_to_json",
    "filtered_to_table",
]
