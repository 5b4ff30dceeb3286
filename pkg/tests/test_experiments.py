import json
import math

import pytest

from reactmix import experiments as ex
from reactmix.config import ExperimentConfig, from_dict
from reactmix.errors import ValidationError
from reactmix.flows import make_shear


def cfg_of(**kw):
    return from_dict(ExperimentConfig, kw).validate()


def test_resolution_rule():
    flow = make_shear(1, power=1)
    # dx <= sqrt(nu / max|grad u|) / 4
    assert ex.resolved(256, 1e-2, flow)
    assert not ex.resolved(32, 1e-4, flow)


def test_ed_time_scaling():
    assert math.isclose(ex.ed_time(1e-4, 1, 1.0), 100.0)
    assert math.isclose(ex.ed_time(1e-4, 3, 2.0), 2.0 * 1e-4 ** (-4 / 6))


def test_simulate_writes_outputs(tmp_path):
    cfg = cfg_of(kind="simulate", n=16, nu=0.05, eps=0.5, t_end=0.2, samples=10,
                 initial={"preset": "separated-blobs", "sigma": 0.15})
    code, manifest = ex.run_campaign(cfg, tmp_path)
    assert code == 0 and manifest["status"] == "ok"
    assert {"summary.csv", "cells/simulate.csv"} <= set(manifest["outputs"])
    on_disk = json.loads((tmp_path / "manifest.json").read_text())
    assert on_disk["config"]["n"] == 16
    assert on_disk["campaign_hash"] == manifest["campaign_hash"]


def test_sweep_with_one_nu_has_one_row(tmp_path):
    cfg = cfg_of(kind="ed-rate-sweep", n=32, nu_list=[1e-2], t_scale=0.2)
    code, _ = ex.run_campaign(cfg, tmp_path)
    lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert code == 0 and len(lines) == 2


def test_failing_cell_is_reported_not_raised(tmp_path):
    # a coarse localized blob undershoots below zero and aborts
    cfg = cfg_of(kind="simulate", n=16, nu=1e-3, eps=0.5, t_end=1.0, flow={"kind": "static-shear-x"},
                 initial={"preset": "separated-blobs", "sigma": 0.03})
    code, manifest = ex.run_campaign(cfg, tmp_path)
    assert code == 2 and manifest["status"] == "partial"
    assert manifest["failures"] and "simulate" in manifest["failures"][0]


def test_cells_are_isolated_and_deterministic(tmp_path):
    cfg = cfg_of(kind="halflife-sweep", n=16, nu=5e-2, eps_list=[1.0, 0.5], flow={"kind": "static-shear-x"},
                 initial={"preset": "offset-gaussians", "sigma": 0.2}, t_cap=20)
    ex.run_campaign(cfg, tmp_path / "a")
    single = cfg_of(kind="halflife-sweep", n=16, nu=5e-2, eps_list=[0.5], flow={"kind": "static-shear-x"},
                    initial={"preset": "offset-gaussians", "sigma": 0.2}, t_cap=20)
    ex.run_campaign(single, tmp_path / "b")
    rows_a = (tmp_path / "a" / "summary.csv").read_text().splitlines()
    rows_b = (tmp_path / "b" / "summary.csv").read_text().splitlines()
    # the eps=0.5 cell is identical whether or not other cells ran beside it
    assert rows_b[1] in rows_a


def test_parallel_matches_serial(tmp_path):
    base = dict(kind="ed-rate-sweep", n=16, nu_list=[5e-2, 2e-2], t_scale=0.2)
    ex.run_campaign(cfg_of(**base), tmp_path / "s")
    ex.run_campaign(cfg_of(**base, jobs=2), tmp_path / "p")
    assert (tmp_path / "s" / "summary.csv").read_bytes() == (tmp_path / "p" / "summary.csv").read_bytes()


def test_alternating_halving_stops_at_first_pass(tmp_path):
    cfg = cfg_of(kind="alternating-halving", n=16, nu=5e-2, K_list=[0.5, 1.0], periods=2, control=True,
                 initial={"preset": "random-smooth", "species": 1, "kmax": 2})
    code, manifest = ex.run_campaign(cfg, tmp_path)
    text = (tmp_path / "summary.csv").read_text()
    fits = (tmp_path / "fits.csv").read_text()
    assert code == 0
    assert "halving-off" in text
    assert fits.splitlines()[1].startswith("halving,0.5")


def test_multispecies_identity(tmp_path):
    cfg = cfg_of(kind="multispecies", n=16, nu=5e-2, t_end=0.5,
                 eps_matrix=[[0, 0.5, 0.2], [0.5, 0, 0.3], [0.2, 0.3, 0]],
                 initial={"preset": "random-smooth", "species": 3, "mean": 4, "kmax": 2})
    ex.run_campaign(cfg, tmp_path)
    header, row = (tmp_path / "summary.csv").read_text().splitlines()
    rec = dict(zip(header.split(","), row.split(",")))
    assert float(rec["identity_residual"]) < 1e-10


def test_verify_kind_is_not_a_campaign(tmp_path):
    with pytest.raises(ValidationError):
        ex.run_campaign(cfg_of(kind="verify-suite"), tmp_path)
