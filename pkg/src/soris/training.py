"""Shared mini-batch SGD loop and finite-difference gradient verification.

A trainable model exposes a `params` dict of float arrays and a
`loss_and_grads(x, targets)` method returning the scalar MSE loss plus a
gradient dict of matching shapes.  Training is plain SGD, deterministic given
the config seed.
"""

from dataclasses import dataclass

import numpy as np

from .errors import TrainingDivergedError
from .rng import substream


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning rate must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be >= 1")


def sgd_train(model, inputs: np.ndarray, targets: np.ndarray,
              config: TrainConfig):
    """Train in place; returns the per-epoch mean training loss."""
    if len(inputs) == 0:
        raise ValueError("training dataset is empty")
    rng = substream(config.seed, "shuffle")
    n = len(inputs)
    losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for lo in range(0, n, config.batch_size):
            batch = order[lo:lo + config.batch_size]
            loss, grads = model.loss_and_grads(inputs[batch], targets[batch])
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch)
            if config.learning_rate > 0:
                for name, grad in grads.items():
                    model.params[name] -= config.learning_rate * grad
            epoch_loss += loss * len(batch)
        losses.append(epoch_loss / n)
    return losses


def gradient_check(model, inputs: np.ndarray, targets: np.ndarray,
                   epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients."""
    _, grads = model.loss_and_grads(inputs, targets)
    worst = 0.0
    for name, param in model.params.items():
        flat = param.ravel()
        analytic = grads[name].ravel()
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + epsilon
            plus, _ = model.loss_and_grads(inputs, targets)
            flat[i] = saved - epsilon
            minus, _ = model.loss_and_grads(inputs, targets)
            flat[i] = saved
            numeric = (plus - minus) / (2.0 * epsilon)
            denom = max(abs(analytic[i]), abs(numeric), 1e-12)
            worst = max(worst, abs(analytic[i] - numeric) / denom)
    return worst
