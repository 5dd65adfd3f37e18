"""Link-level simulator for self-organized reconfigurable intelligent
surfaces: spatially correlated Rician channels, pilot-based estimation on a
sparse active-element set, learned extrapolation to the full surface, and
Monte Carlo evaluation (AMSE, BER, wiring, complexity)."""

from .baselines import CnnModel, li_baseline
from .channel import ChannelRealization, RicianConfig, channel_dataset, sample_channel
from .errors import (ConfigError, SelectionInfeasibleError, SorisError,
                     TrainingDivergedError)
from .estimation import (ElementLink, EstimatedCsi, PilotConfig, csi_latency,
                         estimate_active_set, ls_estimate_cascade)
from .evaluation import (AmseReport, BerReport, ComplexityReport, EvalScenario,
                         WiringReport, amse_monte_carlo, ber_simulation,
                         complexity_report, configure_phases, mse_magnitude,
                         mse_phase, mse_phase_wrapped, wiring_report)
from .geometry import (CorrelationModel, GridSpec, correlation,
                       correlation_matrix, pairwise_distance)
from .predictor import (FullSurfacePrediction, RnnModel, predict_full,
                        preprocess, wrap_phase)
from .rng import complex_normal, substream
from .selection import (ActiveSet, preset_set, select_diagonal,
                        select_min_correlation)
from .training import TrainConfig, gradient_check, sgd_train

__version__ = "0.1.0"
