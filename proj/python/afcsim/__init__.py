"""Python bindings of the afcsim C++ core."""

import json
import os
from pathlib import Path

import numpy as np

# wheels ship the golden tables next to the module
if (Path(__file__).parent / "fixtures").is_dir():
    os.environ.setdefault("AFCSIM_FIXTURES", str(Path(__file__).parent / "fixtures"))

from ._core import (
    ConfigError,
    DataError,
    Error,
    FitError,
    InvalidArgument,
    afc_efficiency,
    analytic_S,
    analyze_golden,
    default_fixture_dir,
    fidelity,
    load_density_matrix,
    metrics,
    normalize_config,
    project_pair,
    reconstruct_counts_csv,
    storage_time_ns,
)
from . import _core

__all__ = [
    "ConfigError", "DataError", "Error", "FitError", "InvalidArgument",
    "afc_efficiency", "analytic_S", "analyze_golden", "default_fixture_dir", "fidelity",
    "load_density_matrix", "metrics", "normalize_config", "project_pair", "reconstruct_counts_csv",
    "storage_time_ns", "predict", "simulate", "joint_table",
]


def _config_text(config):
    if isinstance(config, (str, Path)) and Path(config).is_file():
        return Path(config).read_text()
    if isinstance(config, dict):
        return json.dumps(config)
    return str(config)


def joint_table(rho, alpha, beta):
    """Joint cell probabilities as a 6x6 array (idler cell, signal cell)."""
    return np.asarray(project_pair(rho, alpha, beta)).reshape(6, 6)


def predict(config, channel=0, stage="after", alpha=0.0, beta=0.0, wall_s=500.0):
    out = _core.predict(_config_text(config), channel, stage, alpha, beta, wall_s)
    out["cells"] = np.asarray(out["cells"]).reshape(6, 6)
    return out


def simulate(config, channel=0, stage="after", alpha=0.0, beta=0.0, wall_s=10.0, seed=1):
    out = _core.simulate(_config_text(config), channel, stage, alpha, beta, wall_s, seed)
    out["cells"] = np.asarray(out["cells"]).reshape(6, 6)
    return out
