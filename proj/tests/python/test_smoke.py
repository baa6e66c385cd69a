import json
import math

import numpy as np
import pytest

import mppctl


def test_d1_closed_form():
    model = mppctl.instance_d1(10)
    times, values = mppctl.hjb_march(model)
    expect = 0.5 * (1.0 - np.asarray(times))
    assert np.max(np.abs(values - expect[:, None])) <= 1e-12


def test_model_json_round_trip():
    model = mppctl.instance_d2(4)
    back = mppctl.ModelSpec.from_json(model.to_json())
    assert back.time_grid == model.time_grid
    assert json.loads(model.to_json())["schema"] == "mpp-control/model/v1"


def test_bad_model_raises():
    doc = json.loads(mppctl.instance_d2(2).to_json())
    doc["mark_dist"][0] = [0.6, 0.6]
    with pytest.raises(mppctl.MppctlError):
        mppctl.ModelSpec.from_json(json.dumps(doc))


def test_thresholds():
    beta = mppctl.beta_thresholds(mppctl.instance_d2(2))
    assert beta["beta_bsde"] == 2.0
    assert beta["beta_girsanov"] == 19.0


def test_normalization_and_routes():
    model = mppctl.instance_d2(2)
    policy = mppctl.Policy.constant(model, 1)
    est, se = mppctl.verify_normalization(model, policy, 20000, 3)
    assert abs(est - 1.0) <= 3 * se
    d = mppctl.mc_cost_direct(model, policy, 0.0, 0, 20000, 4)
    r = mppctl.mc_cost_reweighted(model, policy, 0.0, 0, 20000, 4)
    assert abs(d["estimate"] - r["estimate"]) <= 3 * math.hypot(d["std_error"], r["std_error"])


def test_oracle_and_picard():
    res = mppctl.brute_force_value(mppctl.instance_d2(2), 2)
    assert res["n_policies"] == 16
    fine = mppctl.instance_d2(200)
    _, v = mppctl.hjb_march(fine)
    _, vp, rep = mppctl.hjb_picard(fine, mppctl.beta_thresholds(fine)["beta_hjb"])
    assert np.max(np.abs(v - vp)) <= 1e-3
    assert rep["ratio"] <= 1.1 * rep["theoretical_ratio"]
    assert min(res["min_cost"]) >= -1e-12


def test_simulation_and_identities():
    model = mppctl.instance_d2(10)
    traj = mppctl.simulate_reference(model, 0.0, 1, 5, 9)
    assert all(0.0 < t <= 1.0 for t, _ in traj.jumps)
    p, s, jumps = mppctl.ito_check(model, 5, 9)
    assert max(p, s) <= 1e-9 * (1 + jumps)
    assert mppctl.bsde_residual(mppctl.instance_d1(10), mppctl.simulate_reference(mppctl.instance_d1(10), 0.0, 0, 1)) <= 1e-10


def test_cli_entry():
    code, out, err = mppctl.run_cli(["solve", "--model", "missing.json"])
    assert code == 2
    assert "missing.json" in err
