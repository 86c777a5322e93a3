import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import anisolab

CONFIG_DIR = Path(os.environ.get("ANISOLAB_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))

MODEL = """\
mode = solve
problem.p = 1.5,1.8
problem.n = 16
phi.m = 3
b.F = 1
b.psi = bounded
"""


def test_version():
    assert anisolab.__version__ == "0.1.0"


def test_exponent_validation():
    assert anisolab.validate_exponents([1.5, 1.8]) == (True, "")
    ok, why = anisolab.validate_exponents([2.0, 2.0])
    assert not ok and "p<N fails" in why
    d = anisolab.derive_exponents([1.2, 1.5, 2.0])
    assert d["p"] == pytest.approx(1.5)
    assert d["pstar"] == pytest.approx(3.0)


def test_young_constant_am_gm():
    assert anisolab.young_constant([2.0], 0.5) == pytest.approx(0.5)
    assert anisolab.young_constant([2.0], 0.125) == pytest.approx(2.0)


def test_config_round_trip_and_errors():
    cfg = anisolab.Config.parse(MODEL)
    assert cfg.mode == "solve"
    assert cfg.p == [1.5, 1.8]
    assert anisolab.Config.parse(cfg.serialize()) == cfg
    with pytest.raises(anisolab.ConfigError, match="line 7"):
        anisolab.Config.parse(MODEL + "problem.n = 8\n")
    with pytest.raises(anisolab.ConfigError, match="unknown key"):
        anisolab.Config.parse(MODEL + "problem.colour = red\n")


def test_model_solve():
    cfg = anisolab.Config.parse(MODEL)
    prob = anisolab.Problem(cfg)
    assert prob.shape == [16, 16]
    u, rep = prob.solve()
    assert rep["converged"]
    assert rep["residual"] <= 1e-8
    assert u.shape == (16, 16)
    assert np.all(np.isfinite(u))
    assert u.max() > 0.0
    assert prob.dual_norm(prob.residual(u)) == pytest.approx(rep["residual"], rel=1e-12)
    assert prob.energy_residual(u) <= 1e-8 * prob.w_norm(u)
    merits = [(h["merit_before"], h["merit_after"]) for h in rep["history"] if h["accepted"]]
    assert all(after <= before for before, after in merits)


def test_zero_problem_stays_at_zero():
    cfg = anisolab.Config.parse("problem.p = 1.5,1.8\nproblem.n = 8\nb.psi = zero\n")
    u, rep = anisolab.Problem(cfg).solve()
    assert rep["converged"] and rep["iterations"] == 0
    assert not u.any()


def test_residual_rejects_wrong_shape():
    prob = anisolab.Problem(anisolab.Config.parse(MODEL))
    with pytest.raises(ValueError):
        prob.residual(np.zeros((15, 16)))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10.0), st.integers(0, 2**32 - 1))
def test_truncation_is_idempotent_and_bounded(k, seed):
    u = np.random.default_rng(seed).normal(scale=5.0, size=(6, 6))
    t = anisolab.truncate(u, k)
    assert np.all(np.abs(t) <= k)
    np.testing.assert_array_equal(anisolab.truncate(t, k), t)
    inside = np.abs(u) <= k
    np.testing.assert_array_equal(t[inside], u[inside])
    np.testing.assert_array_equal(np.sign(t), np.sign(u))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 20.0), st.floats(0.1, 5.0), st.floats(-30.0, 30.0))
def test_bea_margin_positive_for_chosen_lambda(zeta, nu0, t):
    lam = anisolab.lambda_for(zeta, nu0)
    assert lam == pytest.approx(1.25 * zeta**2 / (4 * nu0**2))
    assert anisolab.bea_margin(t, lam, zeta, nu0) > 0.0


def test_check_mode_writes_artifacts(tmp_path):
    cfg = anisolab.Config.parse(MODEL.replace("mode = solve", "mode = check") + "check.samples = 2000\n")
    cfg.out_dir = str(tmp_path / "out")
    code, log = anisolab.run(cfg)
    assert code == 0, log
    out = tmp_path / "out"
    assert (out / "manifest.txt").read_text().startswith("anisolab 0.1.0")
    header = (out / "report.csv").read_text().splitlines()[0]
    assert header == "check,passed,statistic,samples,witness"
    rows = anisolab.run_checks(cfg)
    assert rows and all(r["passed"] for r in rows)


def test_zero_data_ladder():
    cfg = anisolab.Config.load(str(CONFIG_DIR / "zero_data.cfg"))
    rep = anisolab.run_ladder(cfg, str(CONFIG_DIR))
    assert rep["complete"] and rep["passed"]
    assert all(level["w_norm"] == 0.0 for level in rep["levels"])
    assert not rep["U"].any()
