import math

import numpy as np
import pytest

import porous


def test_thresholds_and_alpha():
    assert porous.max_stable_pe(3) == pytest.approx(2.322185, abs=1e-5)
    assert porous.min_degree_for_pe(5.0) == 9
    assert porous.alpha_p(2, 1.0) < 1.0
    assert porous.bar_gamma_p(3, 2.0) == pytest.approx(porous.bar_gamma_p_numeric(3, 2.0), rel=1e-10)


def test_bvp_oscillation():
    low = porous.solve_bvp(2.0, 0.02, 10, 1)
    high = porous.solve_bvp(2.0, 0.02, 10, 7)
    assert porous.oscillation_measure(low["nodal"]) > 0.0
    x = np.array(high["x"])
    exact = np.array([porous.analytic_solution(2.0, 0.02, xi) for xi in x])
    assert np.max(np.abs(np.array(high["nodal"]) - exact)) < 1e-3


def test_darcy_errors_decrease():
    e16 = porous.darcy_manufactured_errors(16)
    e32 = porous.darcy_manufactured_errors(32)
    assert e32[0] < e16[0] and e32[1] < e16[1]


def test_gradient_vanishes_at_reference():
    q_ref = porous.default_reference_parameters(8)
    assert np.all((q_ref >= 1.0) & (q_ref <= 10.0))
    value, grad = porous.reduced_gradient(8, 2, q_ref, q_ref)
    assert value == pytest.approx(0.0, abs=1e-20)
    assert np.linalg.norm(grad) < 1e-8


def test_packs():
    hexp = porous.hexagonal_pack(2e-3)
    assert len(hexp.centers) == 8
    assert hexp.analytic_porosity() == pytest.approx(1 - math.pi / (3 * math.sqrt(2)))
    rnd = porous.random_pack([8e-3] * 3, 2e-3, 5)
    assert porous.count_overlaps(rnd) == 0
    flow = porous.pack_flow(hexp, 10)
    assert flow["permeability"] > 0.0
    assert porous.blake_kozeny(2e-3, 0.36) == pytest.approx(3.0366e-9, rel=1e-4)


def test_config_strictness_and_run(tmp_path):
    cfg = porous.normalize_config({"kind": "pfem-sweep", "params": {"points": 10}})
    assert cfg["params"]["points"] == 10
    assert porous.normalize_config(cfg) == cfg
    with pytest.raises(porous.InvalidArgument):
        porous.normalize_config({"kind": "pfem-sweep", "params": {"pointz": 10}})
    cfg["output_dir"] = str(tmp_path / "a")
    a = porous.run(cfg)
    cfg["output_dir"] = str(tmp_path / "b")
    b = porous.run(cfg, threads=3)
    assert a["manifest_sha256"] == b["manifest_sha256"]
    assert "sweep.csv" in a["artifacts"]
    assert "tab1-analog" in porous.figure_ids()
