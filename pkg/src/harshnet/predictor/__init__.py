"""Throughput predictor: three-branch 1-D CNN trained with Adam on MSE."""

from .network import (
    PAPER_SPEC,
    ForwardCache,
    NetworkParams,
    NetworkSpec,
    backward,
    backward_from_output,
    forward,
    squared_error,
    xavier_bound,
    xavier_init,
)
from .persistence import load_model, save_model
from .training import (
    AdamState,
    Hyper,
    Metrics,
    Model,
    batches_per_epoch,
    evaluate,
    predict,
    predict_batch,
    regression_metrics,
    train,
)

__all__ = [
    "PAPER_SPEC", "ForwardCache", "NetworkParams", "NetworkSpec", "backward", "backward_from_output",
    "forward", "squared_error", "xavier_bound", "xavier_init", "load_model", "save_model",
    "AdamState", "Hyper", "Metrics", "Model", "batches_per_epoch", "evaluate", "predict",
    "predict_batch", "regression_metrics", "train",
]
