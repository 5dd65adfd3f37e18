"""Pilot-based estimation of the per-element channels at the microcontroller.

For each transmitting element the controller receives L pilot samples through
the cascade channel (source -> element -> controller), least-squares estimates
the cascade, and divides out the known element response and controller gain to
recover the source-to-element coefficient.  The downlink and uplink sub-phases
run sequentially, one element transmitting at a time.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .errors import ConfigError
from .rng import complex_normal


@dataclass(frozen=True)
class PilotConfig:
    pilots_down: int = 10          # L
    pilots_up: int = 10            # L_u
    pilot_power: float = 1.0
    noise_variance: float = 0.0
    symbol_period: float = 1e-6    # seconds

    def __post_init__(self):
        if self.pilots_down < 1 or self.pilots_up < 1:
            raise ValueError("pilot counts must be >= 1")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be >= 0")
        if self.symbol_period <= 0:
            raise ValueError("symbol period must be positive")

    def pilot_sequence(self, count: int) -> np.ndarray:
        """Constant unit-energy pilot symbols scaled to the configured power."""
        return np.full(count, np.sqrt(self.pilot_power), dtype=complex)


@dataclass(frozen=True)
class ElementLink:
    """Known element response and element-to-controller gain."""

    response: complex = 1.0 + 0.0j       # R_s
    controller_gain: complex = 1.0 + 0.0j  # g_s

    def __post_init__(self):
        if abs(self.response) == 0 or abs(self.controller_gain) == 0:
            raise ConfigError("element response and controller gain must be nonzero")


@dataclass(frozen=True)
class EstimatedCsi:
    """Per-element channel estimates aligned with the active-set order."""

    values: np.ndarray
    link: str  # "downlink" | "uplink"


def simulate_received(rng, h_s: complex, link: ElementLink,
                      pilots: np.ndarray, noise_var: float) -> np.ndarray:
    """Received pilot samples through the cascade, plus AWGN."""
    pilots = np.asarray(pilots, dtype=complex)
    if pilots.size == 0:
        raise ValueError("pilot vector must be nonempty")
    cascade = h_s * link.response * link.controller_gain
    noise = complex_normal(rng, pilots.shape, noise_var) if noise_var > 0 else 0.0
    return cascade * pilots + noise


def ls_estimate_cascade(received: np.ndarray, pilots: np.ndarray) -> complex:
    """Least-squares estimate of the scalar cascade from the pilot samples."""
    pilots = np.asarray(pilots, dtype=complex)
    energy = np.sum(np.abs(pilots) ** 2)
    if energy == 0:
        raise ValueError("degenerate pilots: zero total energy")
    return complex(np.sum(np.conj(pilots) * np.asarray(received)) / energy)


def recover_element_channel(cascade: complex, link: ElementLink) -> complex:
    """Divide the known response and controller gain out of the cascade."""
    return cascade / (link.response * link.controller_gain)


def estimate_active_set(rng, channel: ChannelRealization, active_set,
                        links, config: PilotConfig):
    """Run both pilot sub-phases over the active set.

    `links` maps each active element (row, col) to its ElementLink; it may be
    None for all-identity links.  Returns (downlink EstimatedCsi, uplink
    EstimatedCsi) in active-set order.
    """
    grid = active_set.grid
    down, up = [], []
    for element in active_set.elements:
        flat = grid.flat_index(element)
        link = links[element] if links else ElementLink()
        for estimates, h, count in (
                (down, channel.downlink[flat - 1], config.pilots_down),
                (up, channel.uplink[flat - 1], config.pilots_up)):
            pilots = config.pilot_sequence(count)
            received = simulate_received(rng, h, link, pilots, config.noise_variance)
            cascade = ls_estimate_cascade(received, pilots)
            estimates.append(recover_element_channel(cascade, link))
    return (EstimatedCsi(np.array(down), "downlink"),
            EstimatedCsi(np.array(up), "uplink"))


def inject_estimator_error(rng, values: np.ndarray, sigma: float) -> np.ndarray:
    """Add i.i.d. circularly symmetric Gaussian error of variance sigma^2."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    values = np.asarray(values, dtype=complex)
    if sigma == 0:
        return values.copy()
    return values + complex_normal(rng, values.shape, sigma ** 2)


def csi_latency(n_f: int, pilots: int, symbol_period: float) -> float:
    """CSI acquisition latency: both sub-phases over all transmit elements."""
    if n_f <= 0 or pilots <= 0 or symbol_period <= 0:
        raise ValueError("latency inputs must be positive")
    return 2.0 * n_f * pilots * symbol_period
