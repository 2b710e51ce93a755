import math
import os

import numpy as np
import pytest

import msbranch

DATA = os.path.join(os.path.dirname(__file__), os.pardir, "data")

@pytest.fixture(scope="module")
def mech():
    return msbranch.mechanism(os.path.join(DATA, "mech0.json"))


def test_phi_at_origin(mech):
    b, _ = mech
    assert msbranch.phi(b, (0.0, 0.0)) == (0.0, 0.0)


def test_mean_state_matches_expm(mech):
    b, _ = mech
    h = np.array(msbranch.moment_matrix(b))
    w, v = np.linalg.eig(h.T)
    expm = (v @ np.diag(np.exp(w)) @ np.linalg.inv(v)).real
    assert np.allclose(msbranch.mean_state(b, (2.0, 1), 1.0), expm @ [2.0, 1.0], atol=1e-10)


def test_solve_v_shapes(mech):
    b, _ = mech
    t, v = msbranch.solve_v(b, (1.0, 1.0), 1.0, 1e-3)
    assert t.shape == (1001,) and v.shape == (1001, 2)
    assert np.all(v >= 0.0)


def test_laplace_matches_simulation(mech):
    b, _ = mech
    exact = msbranch.transition_laplace(b, (1.0, 1), (1.0, 1.0), 0.5)
    rows = msbranch.ensemble(b, None, (1.0, 1), 0.5, replicas=20000, seed=7)
    vals = np.exp(-rows @ [1.0, 1.0])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - exact) < 4 * se


def test_ensemble_is_reproducible(mech):
    b, i = mech
    a = msbranch.ensemble(b, i, (0.0, 0), 0.3, replicas=200, seed=3, threads=1)
    c = msbranch.ensemble(b, i, (0.0, 0), 0.3, replicas=200, seed=3, threads=4)
    assert np.array_equal(a, c)


def test_wasserstein_identity():
    a = np.random.default_rng(0).normal(size=(50, 2))
    assert msbranch.wasserstein1(a, a) == pytest.approx(0.0, abs=1e-12)
    assert msbranch.wasserstein1(a, a + [1.0, 0.0]) == pytest.approx(1.0)


def test_bad_metric_raises():
    a = np.zeros((3, 2))
    with pytest.raises(ValueError):
        msbranch.wasserstein1(a, a, "chebyshev")


def test_bad_mechanism_raises():
    with pytest.raises(ValueError):
        msbranch.mechanism({"branching": {"a11": 1.0, "bogus": 2}})


def test_stationary_laplace(mech):
    b, i = mech
    s = msbranch.stationary_laplace(b, i, (1.0, 1.0))
    assert 0.0 < s["value"] < 1.0
    assert s["tail_bound"] <= 1e-10 * (1 + 1e-12)


def test_run_config(tmp_path):
    code, _ = msbranch.run_config(os.path.join(DATA, "validate.json"), str(tmp_path))
    assert code == 0
    assert (tmp_path / "meta.json").exists()
