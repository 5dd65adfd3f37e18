"""Metrics and Monte Carlo experiments: magnitude/phase AMSE, BER with the
surface configured from predicted CSI, wiring/control-signaling budget, and
operation-count reports."""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .baselines import li_baseline
from .channel import RicianConfig, sample_channel
from .estimation import PilotConfig, estimate_active_set, inject_estimator_error
from .geometry import CorrelationModel, GridSpec
from .predictor import FullSurfacePrediction, predict_full, wrap_phase
from .rng import complex_normal, substream
from .selection import ActiveSet


def mse_magnitude(truth: np.ndarray, pred: FullSurfacePrediction) -> float:
    truth = np.asarray(truth)
    if truth.shape != pred.magnitudes.shape:
        raise ValueError("truth/prediction length mismatch")
    return float(np.mean((np.abs(truth) - pred.magnitudes) ** 2))


def mse_phase(truth: np.ndarray, pred: FullSurfacePrediction) -> float:
    """Literal phase metric: squared difference of absolute wrapped phases.

    Insensitive to phase sign flips by construction; see mse_phase_wrapped for
    the wrapped-difference diagnostic.
    """
    truth = np.asarray(truth)
    if truth.shape != pred.phases.shape:
        raise ValueError("truth/prediction length mismatch")
    theta = wrap_phase(np.angle(truth))
    return float(np.mean((np.abs(theta) - np.abs(pred.phases)) ** 2))


def mse_phase_wrapped(truth: np.ndarray, pred: FullSurfacePrediction) -> float:
    """Wrapped-difference phase metric (diagnostic companion to mse_phase)."""
    theta = wrap_phase(np.angle(np.asarray(truth)))
    return float(np.mean(wrap_phase(theta - pred.phases) ** 2))


@dataclass(frozen=True)
class EvalScenario:
    grid: GridSpec
    corr: CorrelationModel
    rician: RicianConfig
    active_set: ActiveSet
    pilots: PilotConfig = field(default_factory=PilotConfig)
    sigma: float = 0.0   # estimator-error std injected into the estimates
    links: dict | None = None


def predict_with(predictor, values, active_set, grid, truth=None):
    """Dispatch over predictor kinds: 'ideal', 'li', or a trained model."""
    if predictor == "ideal":
        truth = np.asarray(truth)
        return FullSurfacePrediction(np.abs(truth), wrap_phase(np.angle(truth)))
    if predictor == "li":
        return li_baseline(values, active_set, grid)
    return predict_full(predictor, values, active_set, grid)


def _estimate_links(scenario: EvalScenario, channel, rng, err_unit_down, err_unit_up):
    est_down, est_up = estimate_active_set(
        rng, channel, scenario.active_set, scenario.links, scenario.pilots)
    down = est_down.values + scenario.sigma * err_unit_down
    up = est_up.values + scenario.sigma * err_unit_up
    return down, up


@dataclass(frozen=True)
class AmseReport:
    e_h_mean: float
    e_theta_mean: float
    e_theta_wrapped_mean: float
    trials: int
    std_err_h: float
    std_err_theta: float


def _report(e_h, e_theta, e_theta_w) -> AmseReport:
    trials = len(e_h)
    def stderr(xs):
        return float(np.std(xs, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return AmseReport(float(np.mean(e_h)), float(np.mean(e_theta)),
                      float(np.mean(e_theta_w)), trials,
                      stderr(e_h), stderr(e_theta))


def amse_monte_carlo(scenario: EvalScenario, predictor, trials: int,
                     seed: int) -> dict:
    """Fresh channel -> estimation -> prediction per trial; AMSE per link.

    The injected estimator error is a fixed unit draw per trial scaled by
    sigma, so sweeps over sigma with the same seed share channels and error
    directions (common random numbers).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    per_link = {"downlink": ([], [], []), "uplink": ([], [], [])}
    s = len(scenario.active_set)
    for t in range(trials):
        rng = substream(seed, f"trial:{t}")
        channel = sample_channel(rng, scenario.corr, scenario.grid, scenario.rician)
        err_rng = substream(seed, f"err:{t}")
        unit_down = complex_normal(err_rng, s)
        unit_up = complex_normal(err_rng, s)
        est_down, est_up = _estimate_links(scenario, channel, rng,
                                           unit_down, unit_up)
        for link, est in (("downlink", est_down), ("uplink", est_up)):
            truth = getattr(channel, link)
            pred = predict_with(predictor, est, scenario.active_set,
                                scenario.grid, truth=truth)
            e_h, e_t, e_w = per_link[link]
            e_h.append(mse_magnitude(truth, pred))
            e_t.append(mse_phase(truth, pred))
            e_w.append(mse_phase_wrapped(truth, pred))
    return {link: _report(*acc) for link, acc in per_link.items()}


def configure_phases(pred_down: FullSurfacePrediction,
                     pred_up: FullSurfacePrediction) -> np.ndarray:
    """Unit-modulus element responses aligning every cascade term's phase."""
    if pred_down.phases.shape != pred_up.phases.shape:
        raise ValueError("prediction length mismatch")
    return np.exp(-1j * (pred_down.phases + pred_up.phases))


@dataclass(frozen=True)
class BerReport:
    ber: float
    std_err: float
    bits: int
    blocks: int


def ber_simulation(scenario: EvalScenario, predictor, snr_db: float,
                   bits: int, seed: int, bits_per_block: int = 1000) -> BerReport:
    """BPSK over the phase-configured cascade, one channel draw per block."""
    if bits < 1000:
        raise ValueError("need at least 10^3 bits")
    snr = 10.0 ** (snr_db / 10.0)
    blocks = int(np.ceil(bits / bits_per_block))
    s = len(scenario.active_set)
    block_rates = []
    total_bits = 0
    total_errors = 0
    for b in range(blocks):
        rng = substream(seed, f"block:{b}")
        channel = sample_channel(rng, scenario.corr, scenario.grid, scenario.rician)
        if predictor == "ideal":
            pred_down = predict_with("ideal", None, scenario.active_set,
                                     scenario.grid, truth=channel.downlink)
            pred_up = predict_with("ideal", None, scenario.active_set,
                                   scenario.grid, truth=channel.uplink)
        else:
            err_rng = substream(seed, f"block-err:{b}")
            est_down, est_up = _estimate_links(
                scenario, channel, rng,
                complex_normal(err_rng, s), complex_normal(err_rng, s))
            pred_down = predict_with(predictor, est_down, scenario.active_set,
                                     scenario.grid)
            pred_up = predict_with(predictor, est_up, scenario.active_set,
                                   scenario.grid)
        responses = configure_phases(pred_down, pred_up)
        gain = np.sum(channel.downlink * responses * channel.uplink)

        nbits = min(bits_per_block, bits - total_bits)
        symbols = np.where(rng.random(nbits) < 0.5, -1.0, 1.0)
        received = np.sqrt(snr) * gain * symbols + complex_normal(rng, nbits)
        # coherent detection with the effective gain known at the receiver
        decisions = np.sign(np.real(received * np.conj(gain)))
        errors = int(np.count_nonzero(decisions != symbols))
        block_rates.append(errors / nbits)
        total_errors += errors
        total_bits += nbits
    ber = total_errors / total_bits
    std_err = (float(np.std(block_rates, ddof=1) / np.sqrt(len(block_rates)))
               if len(block_rates) > 1 else 0.0)
    return BerReport(ber, std_err, total_bits, blocks)


@dataclass(frozen=True)
class WiringReport:
    total_wires: int
    signaling_overhead: Fraction  # seconds
    control_latency: float        # seconds
    inputs: dict


def wiring_report(n: int, n_f: int, b_p: int, b_m: int, bus_rate: int,
                  switch_latency: float = 0.0) -> WiringReport:
    """W_t = N*B_p + N_f*B_m, T_s = W_t/R_b, T_c = max(T_s, T_w)."""
    if min(n, n_f) <= 0 or min(b_p, b_m) < 0 or bus_rate <= 0:
        raise ValueError("wiring inputs must be positive (bits may be zero)")
    total = n * b_p + n_f * b_m
    t_s = Fraction(total, bus_rate)
    t_c = max(float(t_s), switch_latency)
    return WiringReport(total, t_s, t_c,
                        {"N": n, "N_f": n_f, "B_p": b_p, "B_m": b_m,
                         "R_b": bus_rate, "T_w": switch_latency})


@dataclass(frozen=True)
class ComplexityReport:
    runtime_order: str
    training_order: str
    space_order: str
    runtime_terms: dict
    dominant_runtime: str
    training_count: int
    inference_count: int
    space_count: int


def complexity_report(n: int, n_f: int, pilots_down: int, pilots_up: int,
                      epochs: int, samples: int, hidden: int) -> ComplexityReport:
    """Concrete evaluations of the runtime, training and space order terms."""
    if min(n, pilots_down, pilots_up, epochs, samples, hidden) <= 0 or n_f < 0:
        raise ValueError("complexity parameters must be positive (n_f may be 0)")
    runtime_terms = {
        "N^2": n ** 2,
        "N_f(L+L_u+1)": n_f * (pilots_down + pilots_up + 1),
    }
    dominant = max(runtime_terms, key=runtime_terms.get)
    return ComplexityReport(
        runtime_order="O(N^2 + N_f(L + L_u + 1))",
        training_order="O(N_e N_s N L_H^2)",
        space_order="O(max(N^2, N R_h + R_h^2))",
        runtime_terms=runtime_terms,
        dominant_runtime=dominant,
        training_count=epochs * samples * n * hidden ** 2,
        inference_count=n * hidden,
        space_count=max(n ** 2, n * hidden + hidden ** 2),
    )
