import math
from fractions import Fraction

import numpy as np
import pytest

from soris.channel import RicianConfig, sample_channel
from soris.estimation import PilotConfig
from soris.evaluation import (EvalScenario, amse_monte_carlo, ber_simulation,
                              complexity_report, configure_phases,
                              mse_magnitude, mse_phase, mse_phase_wrapped,
                              wiring_report)
from soris.geometry import GridSpec, correlation_matrix
from soris.predictor import FullSurfacePrediction, wrap_phase
from soris.rng import substream
from soris.selection import ActiveSet


@pytest.fixture(scope="module")
def grid():
    return GridSpec.from_spacing_frac(8, 8, 0.125)


@pytest.fixture(scope="module")
def corr(grid):
    return correlation_matrix(grid)


def _scenario(grid, corr, active=((1, 1), (3, 6), (6, 3), (8, 8)), sigma=0.0,
              kappa_db=8.0):
    return EvalScenario(grid, corr, RicianConfig(kappa_db=kappa_db),
                        ActiveSet(active, grid), PilotConfig(), sigma=sigma)


class TestMseMetrics:
    def test_exact_prediction_zero(self):
        truth = np.array([1 + 1j, -2j])
        pred = FullSurfacePrediction(np.abs(truth),
                                     wrap_phase(np.angle(truth)))
        assert mse_magnitude(truth, pred) == 0.0
        assert mse_phase(truth, pred) == 0.0
        assert mse_phase_wrapped(truth, pred) == 0.0

    def test_hand_arithmetic_magnitude(self):
        truth = np.array([1.0 + 0j, 1.0 + 0j])
        pred = FullSurfacePrediction(np.array([0.9, 1.1]), np.zeros(2))
        assert mse_magnitude(truth, pred) == pytest.approx(0.01)

    def test_magnitude_quadratic_scaling(self):
        truth = np.array([1.0 + 0j, 1.0 + 0j])
        small = FullSurfacePrediction(np.array([1.1, 0.9]), np.zeros(2))
        large = FullSurfacePrediction(np.array([1.2, 0.8]), np.zeros(2))
        assert mse_magnitude(truth, large) == pytest.approx(
            4 * mse_magnitude(truth, small))

    def test_phase_literal_sign_flip_quirk(self):
        # |theta| vs |theta_hat|: a sign flip is invisible to the literal
        # metric but maximal for the wrapped-difference diagnostic
        truth = np.array([np.exp(1j * np.pi / 2)])
        pred = FullSurfacePrediction(np.ones(1), np.array([-np.pi / 2]))
        assert mse_phase(truth, pred) == pytest.approx(0.0)
        assert mse_phase_wrapped(truth, pred) == pytest.approx(np.pi ** 2)

    def test_phase_hand_arithmetic(self):
        truth = np.array([np.exp(0.1j), np.exp(-0.2j)])
        pred = FullSurfacePrediction(np.ones(2), np.array([0.2, -0.1]))
        assert mse_phase(truth, pred) == pytest.approx(0.01)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mse_magnitude(np.ones(3), FullSurfacePrediction(np.ones(2),
                                                            np.zeros(2)))


class TestAmseMonteCarlo:
    def test_ideal_predictor_zero_error(self, grid, corr):
        reports = amse_monte_carlo(_scenario(grid, corr), "ideal", 5, 0)
        for rep in reports.values():
            assert rep.e_h_mean == 0.0
            assert rep.e_theta_mean == 0.0

    def test_li_on_pure_los_exact(self, grid, corr):
        scenario = _scenario(grid, corr, kappa_db=300.0)
        reports = amse_monte_carlo(scenario, "li", 5, 0)
        assert reports["downlink"].e_h_mean < 1e-20

    def test_single_trial_zero_stderr(self, grid, corr):
        rep = amse_monte_carlo(_scenario(grid, corr), "li", 1, 0)["downlink"]
        assert rep.trials == 1
        assert rep.std_err_h == 0.0

    def test_trials_validated(self, grid, corr):
        with pytest.raises(ValueError):
            amse_monte_carlo(_scenario(grid, corr), "li", 0, 0)

    def test_determinism(self, grid, corr):
        a = amse_monte_carlo(_scenario(grid, corr), "li", 10, 3)
        b = amse_monte_carlo(_scenario(grid, corr), "li", 10, 3)
        assert a["downlink"].e_h_mean == b["downlink"].e_h_mean
        assert a["uplink"].e_theta_mean == b["uplink"].e_theta_mean

    def test_stderr_shrinks_as_sqrt_trials(self, grid, corr):
        s = _scenario(grid, corr)
        small = amse_monte_carlo(s, "li", 100, 4)["downlink"].std_err_h
        large = amse_monte_carlo(s, "li", 400, 4)["downlink"].std_err_h
        # the ratio concentrates around 1/2 but both estimates are noisy
        assert 0.35 < large / small < 0.65

    def test_sigma_zero_matches_no_injection(self, grid, corr):
        a = amse_monte_carlo(_scenario(grid, corr, sigma=0.0), "li", 10, 5)
        b = amse_monte_carlo(_scenario(grid, corr), "li", 10, 5)
        assert a["downlink"].e_h_mean == b["downlink"].e_h_mean


class TestConfigurePhases:
    def test_unit_modulus(self):
        down = FullSurfacePrediction(np.ones(4), np.array([0.1, -1.0, 3.0, 0.0]))
        up = FullSurfacePrediction(np.ones(4), np.array([0.5, 0.5, -2.0, 0.0]))
        assert np.allclose(np.abs(configure_phases(down, up)), 1.0)

    def test_zero_phases_all_ones(self):
        pred = FullSurfacePrediction(np.ones(3), np.zeros(3))
        assert np.allclose(configure_phases(pred, pred), 1.0)

    def test_perfect_alignment_real_maximal(self, grid, corr):
        rng = substream(0, "cfg")
        channel = sample_channel(rng, corr, grid, RicianConfig())
        down = FullSurfacePrediction(np.abs(channel.downlink),
                                     wrap_phase(np.angle(channel.downlink)))
        up = FullSurfacePrediction(np.abs(channel.uplink),
                                   wrap_phase(np.angle(channel.uplink)))
        responses = configure_phases(down, up)
        gain = np.sum(channel.downlink * responses * channel.uplink)
        expected = np.sum(np.abs(channel.downlink) * np.abs(channel.uplink))
        assert gain.imag == pytest.approx(0.0, abs=1e-9)
        assert gain.real == pytest.approx(expected)

    def test_optimal_against_random_configurations(self, grid, corr):
        rng = substream(1, "cfg")
        channel = sample_channel(rng, corr, grid, RicianConfig())
        down = FullSurfacePrediction(np.abs(channel.downlink),
                                     wrap_phase(np.angle(channel.downlink)))
        up = FullSurfacePrediction(np.abs(channel.uplink),
                                   wrap_phase(np.angle(channel.uplink)))
        best = np.abs(np.sum(channel.downlink * configure_phases(down, up)
                             * channel.uplink))
        for _ in range(1000):
            random_resp = np.exp(1j * rng.uniform(-np.pi, np.pi, grid.n))
            other = np.abs(np.sum(channel.downlink * random_resp
                                  * channel.uplink))
            assert other <= best + 1e-9


class TestBerSimulation:
    def test_minimum_bits(self, grid, corr):
        with pytest.raises(ValueError):
            ber_simulation(_scenario(grid, corr), "ideal", 0.0, 100, 0)

    def test_high_snr_zero_errors(self, grid, corr):
        rep = ber_simulation(_scenario(grid, corr), "ideal", 30.0, 2000, 0)
        assert rep.ber == 0.0

    def test_q_function_oracle_single_element(self):
        # 1x2 grid with a single active element; coherent BPSK over the
        # aligned cascade should match the averaged Q(sqrt(2 snr) |G|)
        grid = GridSpec.from_spacing_frac(1, 2, 0.5)
        corr = correlation_matrix(grid)
        scenario = EvalScenario(grid, corr, RicianConfig(),
                                ActiveSet(((1, 1),), grid), PilotConfig())
        snr_db = -20.0
        rep = ber_simulation(scenario, "ideal", snr_db, 200000, 1)
        snr = 10 ** (snr_db / 10)
        qvals = []
        for b in range(10000):
            rng = substream(1, f"block:{b}")
            ch = sample_channel(rng, corr, grid, RicianConfig())
            gain = np.sum(np.abs(ch.downlink) * np.abs(ch.uplink))
            qvals.append(0.5 * math.erfc(np.sqrt(snr) * gain))
        expected = np.mean(qvals)
        assert abs(rep.ber - expected) < 3 * rep.std_err + 1e-4

    def test_ber_monotone_in_snr(self, grid, corr):
        scenario = _scenario(grid, corr)
        previous = None
        for snr_db in (-40.0, -35.0, -30.0, -25.0):
            rep = ber_simulation(scenario, "ideal", snr_db, 20000, 2)
            if previous is not None:
                assert rep.ber <= previous.ber + 3 * (rep.std_err
                                                      + previous.std_err)
            previous = rep

    def test_determinism(self, grid, corr):
        a = ber_simulation(_scenario(grid, corr), "ideal", -30.0, 5000, 3)
        b = ber_simulation(_scenario(grid, corr), "ideal", -30.0, 5000, 3)
        assert a.ber == b.ber


class TestWiring:
    def test_worked_example_256(self):
        rep = wiring_report(256, 8, 2, 1, 10 ** 9)
        assert rep.total_wires == 520
        assert rep.signaling_overhead == Fraction(520, 10 ** 9)
        assert float(rep.signaling_overhead) == pytest.approx(0.52e-6)

    def test_worked_example_1024(self):
        rep = wiring_report(1024, 4, 2, 1, 10 ** 9)
        assert rep.total_wires == 2052
        assert rep.signaling_overhead == Fraction(2052, 10 ** 9)

    def test_degenerate_zero_bits(self):
        rep = wiring_report(64, 4, 0, 0, 10 ** 9, switch_latency=1e-6)
        assert rep.total_wires == 0
        assert rep.signaling_overhead == 0
        assert rep.control_latency == 1e-6

    def test_control_latency_max(self):
        rep = wiring_report(256, 8, 2, 1, 10 ** 9, switch_latency=1e-9)
        assert rep.control_latency == pytest.approx(0.52e-6)

    def test_validation(self):
        with pytest.raises(ValueError):
            wiring_report(0, 8, 2, 1, 10 ** 9)
        with pytest.raises(ValueError):
            wiring_report(64, 8, 2, 1, 0)


class TestComplexity:
    def test_dominant_term_64(self):
        rep = complexity_report(64, 4, 10, 10, 100, 1000, 64)
        assert rep.runtime_terms["N^2"] == 4096
        assert rep.runtime_terms["N_f(L+L_u+1)"] == 84
        assert rep.dominant_runtime == "N^2"

    def test_nf_zero_degenerate(self):
        rep = complexity_report(64, 0, 10, 10, 100, 1000, 64)
        assert rep.runtime_terms["N_f(L+L_u+1)"] == 0
        assert rep.dominant_runtime == "N^2"

    def test_space_model_dominates(self):
        rep = complexity_report(64, 4, 10, 10, 100, 1000, 64)
        assert rep.space_count == 8192

    def test_training_count(self):
        rep = complexity_report(64, 4, 10, 10, 100, 1000, 64)
        assert rep.training_count == 100 * 1000 * 64 * 64 ** 2
        assert rep.inference_count == 64 * 64
