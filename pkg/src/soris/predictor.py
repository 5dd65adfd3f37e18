"""Channel extrapolation from the transmit-element estimates to the full grid.

The measured estimates are turned into a space-stamped sequence (one step per
transmit element, features = stamped magnitude and stamped phase) and fed to a
simple recurrent network whose final hidden state drives two dense layers
producing magnitude and phase for every element.  Training is plain SGD on
the joint MSE; gradients are exact backpropagation through time.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import GridSpec
from .rng import substream
from .selection import ActiveSet
from .training import TrainConfig, sgd_train


def wrap_phase(phi):
    """Wrap to (-pi, pi]; the +pi branch keeps wrap(pi) == wrap(-pi) == pi."""
    w = np.mod(phi, 2.0 * np.pi)
    return np.where(w > np.pi, w - 2.0 * np.pi, w)


@dataclass(frozen=True)
class AugmentedInput:
    sequence: np.ndarray  # (S, 2): stamped magnitude, stamped phase
    stamps: np.ndarray    # (S,) flat-index / N, in (0, 1]


def preprocess(values: np.ndarray, active_set: ActiveSet,
               grid: GridSpec) -> AugmentedInput:
    """Space-stamped magnitude/phase sequence for the measured estimates."""
    values = np.asarray(values)
    if len(values) != len(active_set):
        raise ValueError(
            f"{len(values)} estimates for {len(active_set)} active elements")
    stamps = active_set.flat_indices() / grid.n
    mags = np.abs(values)
    phases = wrap_phase(np.angle(values))
    return AugmentedInput(np.column_stack([mags * stamps, phases * stamps]), stamps)


@dataclass(frozen=True)
class FullSurfacePrediction:
    magnitudes: np.ndarray  # (N,), >= 0
    phases: np.ndarray      # (N,), wrapped to (-pi, pi]

    @property
    def complex_view(self) -> np.ndarray:
        return self.magnitudes * np.exp(1j * self.phases)


def _raw_to_prediction(raw: np.ndarray, n: int) -> FullSurfacePrediction:
    mags = np.clip(raw[:n], 0.0, None)
    phases = wrap_phase(raw[n:] * np.pi)
    return FullSurfacePrediction(mags, phases)


def targets_from_channel(channel_vector: np.ndarray) -> np.ndarray:
    """2N training target: magnitudes then wrapped phases normalized by pi."""
    return np.concatenate([np.abs(channel_vector),
                           wrap_phase(np.angle(channel_vector)) / np.pi])


class RnnModel:
    """tanh recurrence over the element sequence, ReLU dense, linear output."""

    kind = "rnn"

    def __init__(self, params: dict, n: int):
        self.params = params
        self.n = n

    @property
    def hidden_size(self) -> int:
        return self.params["w_rec"].shape[0]

    @property
    def dense_size(self) -> int:
        return self.params["w_d1"].shape[1]

    @classmethod
    def initialize(cls, n: int, hidden: int = 64, dense: int = 128,
                   seed: int = 0) -> "RnnModel":
        rng = substream(seed, "init:rnn")
        def glorot(shape):
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            return rng.uniform(-limit, limit, shape)
        params = {
            "w_in": glorot((2, hidden)),
            "w_rec": glorot((hidden, hidden)),
            "b_h": np.zeros(hidden),
            "w_d1": glorot((hidden, dense)),
            "b_d1": np.zeros(dense),
            "w_d2": glorot((dense, 2 * n)),
            "b_d2": np.zeros(2 * n),
        }
        return cls(params, n)

    def prepare_input(self, values, active_set, grid) -> np.ndarray:
        return preprocess(values, active_set, grid).sequence

    def forward_batch(self, x: np.ndarray, with_cache: bool = False):
        """x: (B, S, 2) -> raw outputs (B, 2N)."""
        p = self.params
        batch, steps, _ = x.shape
        state = np.zeros((batch, self.hidden_size))
        states = [state]
        for t in range(steps):
            state = np.tanh(x[:, t, :] @ p["w_in"] + state @ p["w_rec"] + p["b_h"])
            states.append(state)
        d1 = np.maximum(state @ p["w_d1"] + p["b_d1"], 0.0)
        out = d1 @ p["w_d2"] + p["b_d2"]
        if with_cache:
            return out, {"x": x, "states": states, "d1": d1}
        return out

    def loss_and_grads(self, x: np.ndarray, targets: np.ndarray):
        p = self.params
        out, cache = self.forward_batch(x, with_cache=True)
        diff = out - targets
        loss = float(np.mean(diff ** 2))
        dout = 2.0 * diff / diff.size

        d1, states = cache["d1"], cache["states"]
        grads = {
            "w_d2": d1.T @ dout,
            "b_d2": dout.sum(axis=0),
        }
        dd1 = (dout @ p["w_d2"].T) * (d1 > 0)
        grads["w_d1"] = states[-1].T @ dd1
        grads["b_d1"] = dd1.sum(axis=0)

        dstate = dd1 @ p["w_d1"].T
        grads["w_in"] = np.zeros_like(p["w_in"])
        grads["w_rec"] = np.zeros_like(p["w_rec"])
        grads["b_h"] = np.zeros_like(p["b_h"])
        for t in range(x.shape[1] - 1, -1, -1):
            dpre = dstate * (1.0 - states[t + 1] ** 2)
            grads["w_in"] += x[:, t, :].T @ dpre
            grads["w_rec"] += states[t].T @ dpre
            grads["b_h"] += dpre.sum(axis=0)
            dstate = dpre @ p["w_rec"].T
        return loss, grads


def build_training_set(model, channels, link: str, active_set: ActiveSet,
                       grid: GridSpec):
    """Stack model inputs and 2N targets from a list of channel realizations.

    Training inputs are the true channel values at the transmit elements (the
    noiseless-estimation limit); targets cover the whole surface.
    """
    flats = active_set.flat_indices() - 1
    inputs, targets = [], []
    for realization in channels:
        vec = getattr(realization, link)
        inputs.append(model.prepare_input(vec[flats], active_set, grid))
        targets.append(targets_from_channel(vec))
    return np.array(inputs), np.array(targets)


def train(model, inputs, targets, config: TrainConfig):
    """Plain SGD; returns the per-epoch loss trace (model updated in place)."""
    return sgd_train(model, inputs, targets, config)


def predict_full(model, values: np.ndarray, active_set: ActiveSet,
                 grid: GridSpec) -> FullSurfacePrediction:
    """Network prediction with the measured values overwritten at the
    transmit positions (the controller already holds those estimates)."""
    x = model.prepare_input(values, active_set, grid)
    raw = model.forward_batch(x[None])[0]
    pred = _raw_to_prediction(raw, grid.n)
    flats = active_set.flat_indices() - 1
    mags = pred.magnitudes.copy()
    phases = pred.phases.copy()
    mags[flats] = np.abs(values)
    phases[flats] = wrap_phase(np.angle(values))
    return FullSurfacePrediction(mags, phases)
