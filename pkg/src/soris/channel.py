"""Spatially correlated Rician channel generation for both surface links.

Each element sees a scalar channel per link: the beamformed source-to-element
path collapses to one complex coefficient.  A realization carries the
downlink (BS to surface) and uplink (UE to surface) vectors; by reciprocity
the uplink vector also serves as the surface-to-UE channel downstream.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .geometry import CorrelationModel, GridSpec, positions
from .rng import complex_normal, substream


@dataclass(frozen=True)
class RicianConfig:
    """Rician factor in dB plus the line-of-sight arrival direction."""

    kappa_db: float = 8.0
    los_azimuth: float = 0.0
    los_elevation: float = 0.0

    @property
    def kappa(self) -> float:
        return 10.0 ** (self.kappa_db / 10.0)


@dataclass(frozen=True)
class ChannelRealization:
    downlink: np.ndarray  # complex N-vector, BS -> element
    uplink: np.ndarray    # complex N-vector, UE -> element (reciprocal)


def los_component(grid: GridSpec, config: RicianConfig) -> np.ndarray:
    """Deterministic plane-wave component; all-ones at broadside."""
    pos = positions(grid)
    k = 2.0 * np.pi / grid.wavelength
    az, el = config.los_azimuth, config.los_elevation
    phase = k * (pos[:, 0] * np.sin(az) * np.cos(el) + pos[:, 1] * np.sin(el))
    return np.exp(1j * phase)


def _mix(los, nlos_white, corr: CorrelationModel, kappa: float) -> np.ndarray:
    scattered = corr.sqrt_factor @ nlos_white
    return np.sqrt(kappa / (kappa + 1.0)) * los + np.sqrt(1.0 / (kappa + 1.0)) * scattered


def sample_channel(rng: np.random.Generator, corr: CorrelationModel,
                   grid: GridSpec, config: RicianConfig) -> ChannelRealization:
    """One realization; downlink and uplink use independent scattered parts."""
    if corr.n != grid.n:
        raise ConfigError(f"correlation matrix is {corr.n}x{corr.n}, grid has N={grid.n}")
    los = los_component(grid, config)
    kappa = config.kappa
    down = _mix(los, complex_normal(rng, grid.n), corr, kappa)
    up = _mix(los, complex_normal(rng, grid.n), corr, kappa)
    return ChannelRealization(downlink=down, uplink=up)


def channel_dataset(seed: int, corr: CorrelationModel, grid: GridSpec,
                    config: RicianConfig, count: int, label: str = "sample"):
    """`count` independent realizations, reproducible per (seed, index)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return [sample_channel(substream(seed, f"{label}:{i}"), corr, grid, config)
            for i in range(count)]
