"""Reference predictors: inverse-distance interpolation and a small CNN."""

import numpy as np

from .geometry import GridSpec, positions
from .predictor import FullSurfacePrediction, wrap_phase
from .rng import substream
from .selection import ActiveSet


def li_baseline(values: np.ndarray, active_set: ActiveSet,
                grid: GridSpec) -> FullSurfacePrediction:
    """Inverse-distance-weighted (power 2) interpolation of the complex
    estimates over the grid; exact passthrough at the transmit positions."""
    values = np.asarray(values, dtype=complex)
    pos = positions(grid)
    flats = active_set.flat_indices() - 1
    src = pos[flats]
    dist = np.hypot(pos[:, 0][:, None] - src[:, 0][None, :],
                    pos[:, 1][:, None] - src[:, 1][None, :])
    field = np.empty(grid.n, dtype=complex)
    exact = dist.min(axis=1) == 0
    nearest = dist.argmin(axis=1)
    field[exact] = values[nearest[exact]]
    if not exact.all():
        w = 1.0 / dist[~exact] ** 2
        field[~exact] = (w @ values) / w.sum(axis=1)
    return FullSurfacePrediction(np.abs(field), wrap_phase(np.angle(field)))


def _im2col(x: np.ndarray):
    """3x3 neighborhoods with zero padding; (B,C,H,W) -> (B, H*W, C*9)."""
    b, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    cols = np.empty((b, c, 9, h, w))
    for di in range(3):
        for dj in range(3):
            cols[:, :, di * 3 + dj] = xp[:, :, di:di + h, dj:dj + w]
    return cols.transpose(0, 3, 4, 1, 2).reshape(b, h * w, c * 9)


def _col2im(dcols: np.ndarray, shape):
    b, c, h, w = shape
    dcols = dcols.reshape(b, h, w, c, 9).transpose(0, 3, 4, 1, 2)
    dxp = np.zeros((b, c, h + 2, w + 2))
    for di in range(3):
        for dj in range(3):
            dxp[:, :, di:di + h, dj:dj + w] += dcols[:, :, di * 3 + dj]
    return dxp[:, :, 1:-1, 1:-1]


class CnnModel:
    """Two 3x3 convolutions (8 then 16 channels, ReLU, zero padding) over the
    2-channel magnitude/phase image, followed by a dense layer to 2N."""

    kind = "cnn"

    def __init__(self, params: dict, rows: int, cols: int):
        self.params = params
        self.rows = rows
        self.cols = cols
        self.n = rows * cols

    @classmethod
    def initialize(cls, rows: int, cols: int, channels=(8, 16),
                   seed: int = 0) -> "CnnModel":
        rng = substream(seed, "init:cnn")
        c1, c2 = channels
        n = rows * cols
        def glorot(shape, fan_in, fan_out):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-limit, limit, shape)
        params = {
            "k1": glorot((c1, 2, 3, 3), 2 * 9, c1 * 9),
            "b1": np.zeros(c1),
            "k2": glorot((c2, c1, 3, 3), c1 * 9, c2 * 9),
            "b2": np.zeros(c2),
            "w_d": glorot((c2 * n, 2 * n), c2 * n, 2 * n),
            "b_d": np.zeros(2 * n),
        }
        return cls(params, rows, cols)

    def prepare_input(self, values, active_set, grid) -> np.ndarray:
        """Magnitude/phase image, zero at the non-transmit positions."""
        image = np.zeros((2, self.rows, self.cols))
        values = np.asarray(values, dtype=complex)
        for value, (row, col) in zip(values, active_set.elements):
            image[0, row - 1, col - 1] = np.abs(value)
            image[1, row - 1, col - 1] = wrap_phase(np.angle(value))
        return image

    def _conv(self, x, kernel, bias):
        b = x.shape[0]
        f = kernel.shape[0]
        cols = _im2col(x)
        out = cols @ kernel.reshape(f, -1).T + bias
        return out.transpose(0, 2, 1).reshape(b, f, self.rows, self.cols), cols

    def forward_batch(self, x: np.ndarray, with_cache: bool = False):
        p = self.params
        a1, cols1 = self._conv(x, p["k1"], p["b1"])
        r1 = np.maximum(a1, 0.0)
        a2, cols2 = self._conv(r1, p["k2"], p["b2"])
        r2 = np.maximum(a2, 0.0)
        flat = r2.reshape(x.shape[0], -1)
        out = flat @ p["w_d"] + p["b_d"]
        if with_cache:
            return out, {"x": x, "cols1": cols1, "z1": a1, "r1": r1,
                         "cols2": cols2, "z2": a2, "r2": r2, "flat": flat}
        return out

    def loss_and_grads(self, x: np.ndarray, targets: np.ndarray):
        p = self.params
        out, cache = self.forward_batch(x, with_cache=True)
        diff = out - targets
        loss = float(np.mean(diff ** 2))
        dout = 2.0 * diff / diff.size

        grads = {
            "w_d": cache["flat"].T @ dout,
            "b_d": dout.sum(axis=0),
        }
        dr2 = (dout @ p["w_d"].T).reshape(cache["r2"].shape) * (cache["r2"] > 0)
        grads["k2"], grads["b2"], dr1 = self._conv_backward(
            dr2, cache["cols2"], p["k2"], cache["r1"].shape)
        dr1 *= cache["r1"] > 0
        grads["k1"], grads["b1"], _ = self._conv_backward(
            dr1, cache["cols1"], p["k1"], x.shape)
        return loss, grads

    def _conv_backward(self, dout, cols, kernel, input_shape):
        b, f = dout.shape[0], kernel.shape[0]
        dout_flat = dout.reshape(b, f, -1).transpose(0, 2, 1)
        dbias = dout.sum(axis=(0, 2, 3))
        dkernel = np.einsum("bpf,bpc->fc", dout_flat, cols).reshape(kernel.shape)
        dcols = dout_flat @ kernel.reshape(f, -1)
        return dkernel, dbias, _col2im(dcols, input_shape)
