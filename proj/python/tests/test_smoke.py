import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import afcsim

CONFIGS = Path(os.environ.get("AFCSIM_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))


def bell():
    v = np.array([1, 0, 0, 1]) / math.sqrt(2)
    return np.outer(v, v).astype(complex)


def test_memory_formulas():
    assert afcsim.afc_efficiency(1.5, 2.0, 1.7) == pytest.approx(0.008435011961518711, rel=1e-12)
    assert afcsim.storage_time_ns(6.58) == pytest.approx(151.9756838905775)


def test_bell_state():
    m = afcsim.metrics(bell())
    assert m["fidelity"] == pytest.approx(1.0)
    assert m["concurrence"] == pytest.approx(1.0)
    assert afcsim.analytic_S(bell()) == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    t = afcsim.joint_table(bell(), 0.3, 0.5)
    assert t.shape == (6, 6)
    assert t.sum() == pytest.approx(1.0)


def test_golden_matrices():
    d = Path(afcsim.default_fixture_dir())
    before = afcsim.load_density_matrix(d / "table4_before.txt")
    assert afcsim.metrics(before)["fidelity"] == pytest.approx(0.9134134134134134, rel=1e-9)
    rho = afcsim.reconstruct_counts_csv(d / "table3.csv")
    after = afcsim.load_density_matrix(d / "table4_after.txt")
    assert afcsim.fidelity(rho, after) == pytest.approx(0.99446, abs=1e-4)
    assert afcsim.analyze_golden("table4")["pass"]


def test_errors_are_typed():
    with pytest.raises(afcsim.ConfigError):
        afcsim.normalize_config('{"sed": 1}')
    with pytest.raises(afcsim.DataError):
        afcsim.metrics(np.diag([1.2, -0.2, 0, 0]).astype(complex))
    assert issubclass(afcsim.ConfigError, afcsim.Error)


def test_prediction_and_simulation():
    cfg = CONFIGS / "calibrated.json"
    p = afcsim.predict(cfg, wall_s=500.0)
    assert p["g2"] == pytest.approx(20.17398700762458, rel=1e-7)
    a = afcsim.simulate(cfg, stage="before", wall_s=2.0, seed=4)
    b = afcsim.simulate(cfg, stage="before", wall_s=2.0, seed=4)
    assert np.array_equal(a["cells"], b["cells"])
    expected = afcsim.predict(cfg, stage="before", wall_s=2.0)["cells"][1, 1]
    assert abs(a["cells"][1, 1] - expected) < 5 * math.sqrt(expected)
    defaults = json.loads(afcsim.normalize_config("{}"))
    assert defaults["seed"] == 1
