"""File formats: CSV tables, dataset directories, model documents, manifests.

All numeric CSV bodies are '.'-decimal, newline-delimited, full double
precision.  Dataset files carry one realization per row with interleaved
real/imag columns per element in flat order.
"""

import hashlib
import json
import time
from pathlib import Path

import numpy as np

from .baselines import CnnModel
from .channel import ChannelRealization
from .geometry import GridSpec
from .predictor import RnnModel

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"


def write_matrix_csv(path, matrix, header=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in np.atleast_2d(matrix):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix_csv(path, header=False):
    return np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)


def write_rows_csv(path, header, rows):
    """Table rows are dicts keyed by the header columns."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(row.get(col)) for col in header) + "\n")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _interleave(vectors):
    vectors = np.asarray(vectors)
    out = np.empty((vectors.shape[0], 2 * vectors.shape[1]))
    out[:, 0::2] = vectors.real
    out[:, 1::2] = vectors.imag
    return out


def _deinterleave(table):
    return table[:, 0::2] + 1j * table[:, 1::2]


def write_dataset(out_dir, channels, grid: GridSpec, kappa_db, seed):
    """Write downlink.csv / uplink.csv plus the dataset manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in ("downlink", "uplink"):
        vectors = [getattr(c, name) for c in channels]
        write_matrix_csv(out_dir / f"{name}.csv", _interleave(vectors))
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "grid": {"rows": grid.rows, "cols": grid.cols,
                 "spacing_frac": grid.spacing_frac, "wavelength": grid.wavelength},
        "kappa_db": kappa_db,
        "seed": seed,
        "samples": len(channels),
    }
    write_json(out_dir / "manifest.json", manifest)
    return manifest


def read_dataset(in_dir):
    """Returns (channels, manifest)."""
    in_dir = Path(in_dir)
    manifest = read_json(in_dir / "manifest.json")
    down = _deinterleave(read_matrix_csv(in_dir / "downlink.csv"))
    up = _deinterleave(read_matrix_csv(in_dir / "uplink.csv"))
    channels = [ChannelRealization(d, u) for d, u in zip(down, up)]
    return channels, manifest


def grid_from_manifest(manifest) -> GridSpec:
    g = manifest["grid"]
    return GridSpec.from_spacing_frac(g["rows"], g["cols"], g["spacing_frac"],
                                      g["wavelength"])


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def save_model(path, model, training_meta=None):
    if model.kind == "rnn":
        architecture = {"kind": "rnn", "n": model.n,
                        "r_h": model.hidden_size, "r_d1": model.dense_size}
    else:
        architecture = {"kind": "cnn", "rows": model.rows, "cols": model.cols}
    doc = {
        "schema_version": SCHEMA_VERSION,
        "architecture": architecture,
        "weights": {name: arr.tolist() for name, arr in model.params.items()},
        "training": training_meta or {},
    }
    write_json(path, doc)


def load_model(path):
    doc = read_json(path)
    arch = doc["architecture"]
    params = {name: np.array(vals) for name, vals in doc["weights"].items()}
    if arch["kind"] == "rnn":
        return RnnModel(params, arch["n"])
    return CnnModel(params, arch["rows"], arch["cols"])


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(config_snapshot, artifact_paths, started, status="ok",
                   extra=None):
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
        "status": status,
        "config": config_snapshot,
        "wall_clock_s": time.time() - started,
        "artifacts": [{"path": str(p), "sha256": file_sha256(p)}
                      for p in artifact_paths],
    }
    if extra:
        manifest.update(extra)
    return manifest
