"""Command-line entry points.

Exit codes: 0 success, 1 validation failure, 2 runtime failure.
"""

import json
import sys
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from . import io
from .channel import RicianConfig, channel_dataset
from .errors import SorisError
from .estimation import PilotConfig, csi_latency, estimate_active_set
from .evaluation import (amse_monte_carlo, ber_simulation, complexity_report,
                         wiring_report)
from .experiments import (ExperimentConfig, FIG12_SNR_DB, FIGURE_IDS,
                          make_active_set, make_grid, make_scenario,
                          replicate_figure, run_pipeline, train_predictor,
                          validate_config)
from .geometry import GridSpec, correlation_matrix
from .predictor import predict_full
from .selection import ActiveSet, preset_set, select_diagonal, select_min_correlation


def _fail(message, code=2):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(config_path, overrides):
    raw = io.read_json(config_path) if config_path else {}
    raw.update({k: v for k, v in overrides.items() if v is not None})
    cfg, errors, notes = validate_config(raw)
    if errors:
        for err in errors:
            click.echo(f"invalid config: {err}", err=True)
        sys.exit(1)
    return cfg, notes


def _grid_options(fn):
    for opt in (
        click.option("--rows", type=int, default=8, show_default=True),
        click.option("--cols", type=int, default=8, show_default=True),
        click.option("--spacing-frac", type=float, default=0.5, show_default=True,
                     help="element spacing as a fraction of the wavelength"),
        click.option("--wavelength", type=float, default=0.01, show_default=True),
    ):
        fn = opt(fn)
    return fn


def _make_grid(rows, cols, spacing_frac, wavelength):
    return GridSpec.from_spacing_frac(rows, cols, spacing_frac, wavelength)


def _parse_set_spec(spec, grid):
    """Set-spec: preset:<id> | min-corr:<n> | diagonal:<n> | JSON list of pairs."""
    if spec.startswith("preset:"):
        return preset_set(spec.split(":", 1)[1], grid)
    if spec.startswith(("min-corr:", "diagonal:")):
        method, count = spec.split(":", 1)
        corr = correlation_matrix(grid)
        if method == "min-corr":
            return select_min_correlation(corr, int(count))
        return select_diagonal(grid, corr, int(count))
    elements = json.loads(Path(spec).read_text() if Path(spec).exists() else spec)
    if isinstance(elements, dict):
        elements = elements["elements"]
    return ActiveSet(tuple(tuple(e) for e in elements), grid)


@click.group()
def main():
    """Link-level simulator for self-organized RIS channel acquisition."""


@main.command()
@_grid_options
@click.option("--out", required=True, type=click.Path())
def correlation(rows, cols, spacing_frac, wavelength, out):
    """Write the N x N spatial correlation matrix as headerless CSV."""
    corr = correlation_matrix(_make_grid(rows, cols, spacing_frac, wavelength))
    io.write_matrix_csv(out, corr.matrix)
    click.echo(f"wrote {out}")


@main.command()
@_grid_options
@click.option("--method", required=True,
              help="preset:<id> | min-corr | diagonal")
@click.option("--count", type=int, default=4, show_default=True)
@click.option("--out", type=click.Path())
def select(rows, cols, spacing_frac, wavelength, method, count, out):
    """Select the transmit-element set and emit it as JSON."""
    grid = _make_grid(rows, cols, spacing_frac, wavelength)
    spec = method if method.startswith("preset:") else f"{method}:{count}"
    active_set = _parse_set_spec(spec, grid)
    payload = {"method": method, "count": len(active_set),
               "elements": [list(e) for e in active_set.elements]}
    if out:
        io.write_json(out, payload)
        click.echo(f"wrote {out}")
    else:
        click.echo(json.dumps(payload))


@main.command("gen-dataset")
@_grid_options
@click.option("--samples", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--kappa-db", type=float, default=8.0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def gen_dataset(rows, cols, spacing_frac, wavelength, samples, seed,
                kappa_db, out):
    """Generate a channel dataset directory (CSV per link + manifest)."""
    grid = _make_grid(rows, cols, spacing_frac, wavelength)
    corr = correlation_matrix(grid)
    channels = channel_dataset(seed, corr, grid, RicianConfig(kappa_db=kappa_db),
                               samples)
    io.write_dataset(out, channels, grid, kappa_db, seed)
    click.echo(f"wrote {samples} samples to {out}")


@main.command()
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--set", "set_spec", required=True)
@click.option("--pilots", type=int, default=10, show_default=True)
@click.option("--noise-var", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def estimate(dataset_dir, set_spec, pilots, noise_var, seed, out):
    """Pilot-estimate the active-set channels for every dataset sample."""
    from .rng import substream
    channels, manifest = io.read_dataset(dataset_dir)
    grid = io.grid_from_manifest(manifest)
    active_set = _parse_set_spec(set_spec, grid)
    config = PilotConfig(pilots, pilots, noise_variance=noise_var)
    down_rows, up_rows = [], []
    for i, channel in enumerate(channels):
        est_down, est_up = estimate_active_set(
            substream(seed, f"estimate:{i}"), channel, active_set, None, config)
        down_rows.append(io._interleave([est_down.values])[0])
        up_rows.append(io._interleave([est_up.values])[0])
    out = Path(out)
    io.write_matrix_csv(out / "downlink.csv", np.array(down_rows))
    io.write_matrix_csv(out / "uplink.csv", np.array(up_rows))
    io.write_json(out / "manifest.json", {
        "schema_version": io.SCHEMA_VERSION,
        "source": str(dataset_dir),
        "elements": [list(e) for e in active_set.elements],
        "pilots": pilots, "noise_variance": noise_var, "seed": seed,
        "csi_latency_s": csi_latency(len(active_set), pilots,
                                     config.symbol_period),
    })
    click.echo(f"wrote estimates for {len(channels)} samples to {out}")


@main.command()
@click.option("--model", "kind", type=click.Choice(["rnn", "cnn"]), default="rnn",
              show_default=True)
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--set", "set_spec", required=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def train(kind, dataset_dir, set_spec, config_path, out):
    """Train a predictor on a dataset directory and save it as JSON."""
    channels, manifest = io.read_dataset(dataset_dir)
    grid = io.grid_from_manifest(manifest)
    active_set = _parse_set_spec(set_spec, grid)
    # the element set comes from --set; neutralize the config's set fields so
    # they cannot fail validation on non-8x8 grids
    overrides = {"predictor": kind, "rows": grid.rows, "cols": grid.cols,
                 "spacing_frac": grid.spacing_frac,
                 "train_samples": len(channels),
                 "set_method": "min-corr",
                 "set_count": min(len(active_set), grid.n - 1)}
    cfg, _ = _load_config(config_path, overrides)
    from .baselines import CnnModel
    from .predictor import RnnModel, build_training_set
    from .training import TrainConfig, sgd_train
    if kind == "rnn":
        model = RnnModel.initialize(grid.n, cfg.hidden, cfg.dense,
                                    seed=cfg.seed_train)
        stages = cfg.lr_stages or ((cfg.learning_rate, cfg.epochs),)
    else:
        model = CnnModel.initialize(grid.rows, grid.cols, seed=cfg.seed_train)
        stages = ((cfg.cnn_learning_rate, cfg.epochs),)
    inputs, targets = build_training_set(model, channels, "downlink",
                                         active_set, grid)
    losses = []
    for i, (lr, epochs) in enumerate(stages):
        losses.extend(sgd_train(model, inputs, targets,
                                TrainConfig(lr, epochs, cfg.batch_size,
                                            seed=100 * cfg.seed_train + i)))
    io.save_model(out, model, {"schedule": [list(s) for s in stages],
                               "batch": cfg.batch_size, "seed": cfg.seed_train,
                               "final_loss": losses[-1]})
    click.echo(f"final training loss {losses[-1]:.6g}; wrote {out}")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--csi", "csi_dir", required=True, type=click.Path(exists=True),
              help="directory written by `soris estimate`")
@click.option("--out", required=True, type=click.Path())
@_grid_options
def predict(model_path, csi_dir, out, rows, cols, spacing_frac, wavelength):
    """Extrapolate estimated CSI to the full surface for every sample."""
    grid = _make_grid(rows, cols, spacing_frac, wavelength)
    model = io.load_model(model_path)
    manifest = io.read_json(Path(csi_dir) / "manifest.json")
    active_set = ActiveSet(tuple(tuple(e) for e in manifest["elements"]), grid)
    out = Path(out)
    for name in ("downlink", "uplink"):
        table = io.read_matrix_csv(Path(csi_dir) / f"{name}.csv")
        values = table[:, 0::2] + 1j * table[:, 1::2]
        preds = [predict_full(model, v, active_set, grid).complex_view
                 for v in values]
        io.write_matrix_csv(out / f"{name}.csv", io._interleave(preds))
    click.echo(f"wrote predictions to {out}")


@main.command()
@click.argument("metric", type=click.Choice(["amse", "ber"]))
@click.option("--scenario", "config_path", type=click.Path(exists=True),
              help="experiment config JSON")
@click.option("--model", "model_spec", default="rnn", show_default=True,
              help="rnn | cnn | li | ideal | path to model.json")
@click.option("--trials", type=int)
@click.option("--seed", type=int)
@click.option("--sigma", type=float, default=0.0, show_default=True)
@click.option("--snr-db", type=float, default=FIG12_SNR_DB, show_default=True)
@click.option("--bits", type=int, default=100000, show_default=True)
@click.option("--out", required=True, type=click.Path())
def evaluate(metric, config_path, model_spec, trials, seed, sigma, snr_db,
             bits, out):
    """Monte Carlo AMSE or BER evaluation for one scenario."""
    overrides = {"trials": trials, "seed_eval": seed}
    if model_spec in ("rnn", "cnn", "li", "ideal"):
        overrides["predictor"] = model_spec
    cfg, _ = _load_config(config_path, overrides)
    grid = make_grid(cfg)
    corr = correlation_matrix(grid)
    active_set = make_active_set(cfg, grid, corr)
    if model_spec not in ("rnn", "cnn", "li", "ideal"):
        model = io.load_model(model_spec)
    else:
        model, _ = train_predictor(cfg, grid, corr, active_set)
    scenario = make_scenario(cfg, grid, corr, active_set, sigma)
    try:
        if metric == "amse":
            reports = amse_monte_carlo(scenario, model, cfg.trials, cfg.seed_eval)
            rows = [{"link": link, "spacing_frac": cfg.spacing_frac,
                     "n_f": len(active_set), "sigma": sigma,
                     "e_h": rep.e_h_mean, "e_theta": rep.e_theta_mean,
                     "stderr": rep.std_err_h}
                    for link, rep in reports.items()]
            io.write_rows_csv(out, ["link", "spacing_frac", "n_f", "sigma",
                                    "e_h", "e_theta", "stderr"], rows)
        else:
            rep = ber_simulation(scenario, model, snr_db, bits, cfg.seed_eval)
            io.write_rows_csv(out, ["n", "n_f", "sigma", "snr_db", "ber",
                                    "stderr"],
                              [{"n": grid.n, "n_f": len(active_set),
                                "sigma": sigma, "snr_db": snr_db,
                                "ber": rep.ber, "stderr": rep.std_err}])
    except SorisError as exc:
        _fail(str(exc))
    click.echo(f"wrote {out}")


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--nf", type=int, required=True)
@click.option("--bp", type=int, default=2, show_default=True)
@click.option("--bm", type=int, default=1, show_default=True)
@click.option("--rate", type=int, default=10 ** 9, show_default=True,
              help="digital bus rate in bits/s")
@click.option("--switch-latency", type=float, default=0.0, show_default=True)
@click.option("--out", type=click.Path())
def wiring(n, nf, bp, bm, rate, switch_latency, out):
    """Wiring density and control-signaling budget."""
    rep = wiring_report(n, nf, bp, bm, rate, switch_latency)
    payload = {"total_wires": rep.total_wires,
               "signaling_overhead_s": float(rep.signaling_overhead),
               "signaling_overhead_exact": [rep.signaling_overhead.numerator,
                                            rep.signaling_overhead.denominator],
               "control_latency_s": rep.control_latency,
               "inputs": rep.inputs}
    if out:
        io.write_json(out, payload)
        click.echo(f"wrote {out}")
    else:
        click.echo(json.dumps(payload))


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--nf", type=int, required=True)
@click.option("--pilots-down", type=int, default=10, show_default=True)
@click.option("--pilots-up", type=int, default=10, show_default=True)
@click.option("--epochs", type=int, default=100, show_default=True)
@click.option("--samples", type=int, default=10000, show_default=True)
@click.option("--hidden", type=int, default=64, show_default=True)
def complexity(n, nf, pilots_down, pilots_up, epochs, samples, hidden):
    """Operation-count report for the acquisition and training stages."""
    rep = complexity_report(n, nf, pilots_down, pilots_up, epochs, samples,
                            hidden)
    click.echo(json.dumps(asdict(rep) if hasattr(rep, "__dict__") else {
        "runtime_order": rep.runtime_order,
        "training_order": rep.training_order,
        "space_order": rep.space_order,
        "runtime_terms": rep.runtime_terms,
        "dominant_runtime": rep.dominant_runtime,
        "training_count": rep.training_count,
        "inference_count": rep.inference_count,
        "space_count": rep.space_count,
    }))


@main.command()
@click.argument("figure_id", type=click.Choice(FIGURE_IDS))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--plot/--no-plot", default=True, show_default=True,
              help="also render the figure as PNG")
@click.option("--trials", type=int)
@click.option("--epochs", type=int)
@click.option("--train-samples", type=int)
def replicate(figure_id, config_path, out, plot, trials, epochs, train_samples):
    """Run one figure-replication recipe; emits CSV (and PNG) tables."""
    cfg, _ = _load_config(config_path, {"trials": trials, "epochs": epochs,
                                        "train_samples": train_samples})
    try:
        csv_path, _ = replicate_figure(figure_id, cfg, out, plot=plot)
    except SorisError as exc:
        _fail(str(exc))
    click.echo(f"wrote {csv_path}")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
def validate(config_path):
    """Validate an experiment config; lists every violation."""
    raw = io.read_json(config_path)
    cfg, errors, notes = validate_config(raw)
    for note in notes:
        click.echo(f"note: {note}")
    for err in errors:
        click.echo(f"violation: {err}", err=True)
    if errors:
        sys.exit(1)
    click.echo("config ok")


@main.command("run")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
def run(config_path):
    """Run the full pipeline described by an experiment config."""
    cfg, _ = _load_config(config_path, {})
    try:
        manifest = run_pipeline(cfg)
    except SorisError as exc:
        _fail(str(exc))
    click.echo(f"pipeline ok; {len(manifest['artifacts'])} artifacts in "
               f"{cfg.out_dir}")


if __name__ == "__main__":
    main()
