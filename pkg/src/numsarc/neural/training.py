"""Mini-batch training loop, optimizers and the finite-difference gradient check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DataError, DivergenceError
from .autodiff import no_grad
from .models import bce_loss

__all__ = ["TrainingConfig", "TrainResult", "train", "grad_check", "Sgd", "Adagrad"]


@dataclass(frozen=True)
class TrainingConfig:
    batch_size: int = 64
    optimizer: str = "sgd"  # sgd | adagrad
    learning_rate: float = 0.1
    epochs: int = 25
    seed: int = 0
    val_fraction: float = 0.0
    early_stop_patience: int | None = None

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise DataError("TrainingConfig: batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise DataError("TrainingConfig: learning_rate must be positive")
        if not 0.0 <= self.val_fraction < 1.0:
            raise DataError("TrainingConfig: val_fraction must lie in [0, 1)")
        if self.optimizer not in ("sgd", "adagrad"):
            raise DataError(f"TrainingConfig: unknown optimizer {self.optimizer!r}")


class Sgd:
    def __init__(self, learning_rate: float):
        self.lr = learning_rate

    def step(self, params) -> None:
        for _, tensor, mask in params:
            if tensor.grad is None:
                continue
            g = tensor.grad if mask is None else tensor.grad * mask
            tensor.data -= self.lr * g


class Adagrad:
    """Per-parameter accumulated squared gradients, eps = 1e-8."""

    def __init__(self, learning_rate: float, eps: float = 1e-8):
        self.lr = learning_rate
        self.eps = eps
        self._acc: dict[str, np.ndarray] = {}

    def step(self, params) -> None:
        for name, tensor, mask in params:
            if tensor.grad is None:
                continue
            g = tensor.grad if mask is None else tensor.grad * mask
            acc = self._acc.get(name)
            if acc is None:
                acc = np.zeros_like(tensor.data)
                self._acc[name] = acc
            acc += g * g
            tensor.data -= self.lr * g / (np.sqrt(acc) + self.eps)


@dataclass
class TrainResult:
    epochs: list[int] = field(default_factory=list)
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float | None] = field(default_factory=list)
    stopped_early: bool = False

    def curve_rows(self) -> list[tuple[int, float, float | None]]:
        return list(zip(self.epochs, self.train_losses, self.val_losses))


def _eval_loss(model, X: np.ndarray, y: np.ndarray, batch_size: int) -> float:
    total = 0.0
    with no_grad():
        for start in range(0, len(X), batch_size):
            sl = slice(start, start + batch_size)
            loss = bce_loss(model.forward(X[sl], train=False), y[sl])
            total += float(loss.data) * (min(len(X), start + batch_size) - start)
    return total / len(X)


def train(model, X: np.ndarray, y: np.ndarray, config: TrainingConfig) -> TrainResult:
    """Train in place; returns the per-epoch loss curve.

    Deterministic given the seed: a single generator drives the optional
    validation split, the per-epoch shuffles and every dropout mask, in a
    fixed order. A non-finite batch loss aborts with DivergenceError.
    """
    X = np.asarray(X, dtype=np.int64)
    y = np.asarray(y, dtype=np.float64)
    if len(X) == 0:
        raise DataError("train: empty dataset")
    if len(X) != len(y):
        raise DataError("train: X and y length mismatch")

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(X))
    n_val = int(round(config.val_fraction * len(X)))
    val_idx, train_idx = order[:n_val], order[n_val:]
    if len(train_idx) == 0:
        raise DataError("train: validation split leaves no training data")
    X_train, y_train = X[train_idx], y[train_idx]
    X_val, y_val = X[val_idx], y[val_idx]

    opt = (
        Sgd(config.learning_rate)
        if config.optimizer == "sgd"
        else Adagrad(config.learning_rate)
    )
    params = model.parameters()
    result = TrainResult()
    best_val = math.inf
    stale = 0
    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(len(X_train))
        total = 0.0
        for start in range(0, len(perm), config.batch_size):
            batch = perm[start : start + config.batch_size]
            model.zero_grads()
            yhat = model.forward(X_train[batch], train=True, rng=rng)
            loss = bce_loss(yhat, y_train[batch])
            value = float(loss.data)
            if not math.isfinite(value):
                raise DivergenceError(
                    f"training diverged at epoch {epoch}: batch loss is {value}"
                )
            loss.backward()
            opt.step(params)
            total += value * len(batch)
        train_loss = total / len(X_train)
        val_loss = _eval_loss(model, X_val, y_val, config.batch_size) if n_val else None
        result.epochs.append(epoch)
        result.train_losses.append(train_loss)
        result.val_losses.append(val_loss)
        if config.early_stop_patience is not None and val_loss is not None:
            if val_loss < best_val - 1e-12:
                best_val = val_loss
                stale = 0
            else:
                stale += 1
                if stale >= config.early_stop_patience:
                    result.stopped_early = True
                    break
    return result


def predict_proba(model, X: np.ndarray, batch_size: int = 256) -> np.ndarray:
    X = np.asarray(X, dtype=np.int64)
    out = np.zeros(len(X))
    with no_grad():
        for start in range(0, len(X), batch_size):
            sl = slice(start, start + batch_size)
            out[sl] = model.forward(X[sl], train=False).data
    return out


def grad_check(
    model,
    idx: np.ndarray,
    targets: Sequence[float],
    eps: float = 1e-4,
) -> float:
    """Worst relative error between reverse-mode and central-difference grads.

    Dropout is off (eval-mode forward); frozen parameter entries (the PAD
    embedding row) are skipped. Relative error uses |a - b| / max(|a|+|b|, 1e-6).
    """
    idx = np.asarray(idx, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.float64)
    model.zero_grads()
    loss = bce_loss(model.forward(idx, train=False), targets)
    loss.backward()

    def loss_value() -> float:
        with no_grad():
            return float(bce_loss(model.forward(idx, train=False), targets).data)

    worst = 0.0
    for _, tensor, mask in model.parameters():
        grad = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        flat = tensor.data.reshape(-1)
        gflat = grad.reshape(-1)
        mflat = mask.reshape(-1) if mask is not None else None
        for j in range(flat.size):
            if mflat is not None and mflat[j] == 0.0:
                continue
            orig = flat[j]
            flat[j] = orig + eps
            up = loss_value()
            flat[j] = orig - eps
            down = loss_value()
            flat[j] = orig
            fd = (up - down) / (2.0 * eps)
            rel = abs(fd - gflat[j]) / max(abs(fd) + abs(gflat[j]), 1e-6)
            worst = max(worst, rel)
    return worst
