"""Cost/accuracy Pareto assignment of query batches to priced LLM candidates."""

from ._version import __version__
from ._accel import NUMBA_ENABLED
from .core import (
    CostMatrix,
    LabelMatrix,
    LLMCandidate,
    ObjectivePoint,
    Query,
    Solution,
    SolutionArchive,
    compute_cost_matrix,
    dominates,
    evaluate,
    make_solution,
    pareto_filter,
)
from .data import (
    Dataset,
    SplitSpec,
    load_dataset,
    load_dataset_dir,
    save_dataset_dir,
    split_dataset,
    synth_instance,
    export_archive,
    load_archive,
    export_front,
    load_front,
)
from .errors import (
    DegenerateEnsembleError,
    IncompleteInputError,
    InstanceTooLargeError,
    InvalidSplitError,
    ShapeError,
    ValidationError,
)
from .featurize import DEFAULT_DIM, featurize
from .forest import ForestConfig
from .metrics import delta_spread, igd
from .nsga2 import GAConfig, non_dominated_sort, nsga2
from .optimizer import (
    Move,
    SearchConfig,
    destruct,
    init_extremes,
    optimize,
    prediction_only_assignment,
    reconstruct,
    score_moves,
)
from .oracle import ReferenceFront, brute_force_front, incremental_front
from .prediction import (
    EnsembleModel,
    PredictionMatrix,
    aggregate,
    build_prediction_matrix,
    load_model,
    predict_robust,
    save_model,
    train_ensemble,
)

__all__ = [
    "__version__",
    "NUMBA_ENABLED",
    "CostMatrix",
    "LabelMatrix",
    "LLMCandidate",
    "ObjectivePoint",
    "Query",
    "Solution",
    "SolutionArchive",
    "compute_cost_matrix",
    "dominates",
    "evaluate",
    "make_solution",
    "pareto_filter",
    "Dataset",
    "SplitSpec",
    "load_dataset",
    "load_dataset_dir",
    "save_dataset_dir",
    "split_dataset",
    "synth_instance",
    "export_archive",
    "load_archive",
    "export_front",
    "load_front",
    "DegenerateEnsembleError",
    "IncompleteInputError",
    "InstanceTooLargeError",
    "InvalidSplitError",
    "ShapeError",
    "ValidationError",
    "DEFAULT_DIM",
    "featurize",
    "ForestConfig",
    "delta_spread",
    "igd",
    "GAConfig",
    "non_dominated_sort",
    "nsga2",
    "Move",
    "SearchConfig",
    "destruct",
    "init_extremes",
    "optimize",
    "prediction_only_assignment",
    "reconstruct",
    "score_moves",
    "EnsembleModel",
    "PredictionMatrix",
    "aggregate",
    "build_prediction_matrix",
    "load_model",
    "predict_robust",
    "save_model",
    "train_ensemble",
    "ReferenceFront",
    "brute_force_front",
    "incremental_front",
]
