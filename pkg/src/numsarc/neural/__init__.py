"""Minimal reverse-mode autodiff core and the three tweet classifiers."""

from .autodiff import Tensor, no_grad
from .models import (
    CnnFf,
    CnnFfConfig,
    CnnLstmFf,
    CnnLstmFfConfig,
    LstmCell,
    LstmFf,
    LstmFfConfig,
    PAD_INDEX,
    UNK_INDEX,
    SEQUENCE_LENGTH,
    bce_loss,
    build_model,
    build_vocab,
    pad_and_index,
)
from .training import TrainingConfig, TrainResult, grad_check, train

__all__ = [
    "Tensor",
    "no_grad",
    "CnnFf",
    "CnnFfConfig",
    "CnnLstmFf",
    "CnnLstmFfConfig",
    "LstmCell",
    "LstmFf",
    "LstmFfConfig",
    "PAD_INDEX",
    "UNK_INDEX",
    "SEQUENCE_LENGTH",
    "bce_loss",
    "build_model",
    "build_vocab",
    "pad_and_index",
    "TrainingConfig",
    "TrainResult",
    "grad_check",
    "train",
]
