import math

import numpy as np
import pytest

import fdgm


def test_presets_listed():
    names = [name for name, _ in fdgm.list_presets()]
    assert "fig1a" in names and "gossip-demo" in names
    assert len(names) == 10


def test_conjugate_argmax_scalar():
    x = fdgm.conjugate_argmax(
        np.eye(1), np.zeros(1), 0.5, -np.ones(1), np.ones(1), np.ones(1)
    )
    assert x[0] == pytest.approx(0.25, abs=1e-9)


def test_run_preset_is_deterministic(tmp_path):
    a = fdgm.run_preset("gossip-demo", seed=3, horizon=90, record_every=9, out=tmp_path / "a")
    b = fdgm.run_preset("gossip-demo", seed=3, horizon=90, record_every=9, out=tmp_path / "b")
    assert a["algorithms"]["fdgm_metropolis"]["primal_err"] == b["algorithms"]["fdgm_metropolis"]["primal_err"]
    assert (tmp_path / "a" / "fdgm_metropolis.csv").read_bytes() == (
        tmp_path / "b" / "fdgm_metropolis.csv"
    ).read_bytes()
    errs = a["algorithms"]["fdgm_metropolis"]["primal_err"]
    assert errs[-1] < errs[0]


def test_certified_run():
    out = fdgm.run_preset("gossip-demo", horizon=180, certify=True)
    assert out["certification_passed"]
    assert all(out["algorithms"]["fdgm_metropolis"]["certification"].values())


def test_baseline_rows_have_no_dual_value():
    out = fdgm.run_preset("fig1a", horizon=20, record_every=10)
    assert math.isnan(out["algorithms"]["subgrad"]["D"][0])


def test_invalid_config_raises():
    text = fdgm.preset_config("fig1a").replace("B = 10", "B = 0")
    with pytest.raises(fdgm.InvalidConfig, match="graph.B"):
        fdgm.run_config(text)


def test_sequence_generation():
    seq = fdgm.generate_sequence("gossip", 4, 3, 6, 1)
    assert len(seq) == 6
    assert all(len(edges) == 1 for edges in seq)
