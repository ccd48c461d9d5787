from .estimators import (
    DEEP_FAMILIES,
    FAMILIES,
    DeepForecaster,
    KNNForecaster,
    LSTMForecaster,
    PersistenceForecaster,
    TransformerForecaster,
    XLSTMForecaster,
    make_forecaster,
    persistence_forecast,
    pretrain_finetune,
    train,
)
from .networks import build_network
from .presets import PRESETS, SIZE_CLASSES, ModelPreset, count_params, get_preset, size_target
from .training import TrainConfig, TrainingError
from .transfer import synthetic_pretraining_set

__all__ = [
    "DEEP_FAMILIES",
    "FAMILIES",
    "PRESETS",
    "SIZE_CLASSES",
    "DeepForecaster",
    "KNNForecaster",
    "LSTMForecaster",
    "ModelPreset",
    "PersistenceForecaster",
    "TrainConfig",
    "TrainingError",
    "TransformerForecaster",
    "XLSTMForecaster",
    "build_network",
    "count_params",
    "get_preset",
    "make_forecaster",
    "persistence_forecast",
    "pretrain_finetune",
    "size_target",
    "synthetic_pretraining_set",
    "train",
]
