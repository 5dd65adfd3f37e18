"""Deterministic random-stream management.

Every stochastic component draws from a substream derived from a master seed
and a stable string label (e.g. "train", "eval", "trial:17").  Substreams are
independent of the order in which they are materialized, so parallel or
partial evaluation cannot change results.
"""

import numpy as np


def substream(master_seed: int, *labels: str) -> np.random.Generator:
    """Return a generator for (master_seed, labels), independent of call order."""
    entropy = [int(master_seed)]
    for label in labels:
        raw = label.encode("utf-8")
        # length prefix keeps label boundaries unambiguous, so ("a", "b")
        # and ("ab",) map to different streams
        entropy.append(len(raw))
        for i in range(0, len(raw), 4):
            entropy.append(int.from_bytes(raw[i:i + 4], "big"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def complex_normal(rng: np.random.Generator, size, variance: float = 1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return rng.normal(0.0, scale, size) + 1j * rng.normal(0.0, scale, size)
