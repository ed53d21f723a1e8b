"""Smoke test for the compiled `stefan` extension."""

import json
import math

import stefan


def test_vapor_root():
    alpha0, ambiguous = stefan.vapor_root(3.0, -4.0)
    assert alpha0 == 1.0
    assert not ambiguous


def test_flux_front_matches_shooting():
    kw = dict(qstar=1.0, m=0.5)
    front = stefan.solve_front(1.0, 0.5, 0.5, **kw)
    shot = stefan.shoot(1.0, 0.5, 0.5, **kw)
    assert front["xi"] > 0.5
    assert abs(front["xi"] - shot["xi"]) < 1e-8
    assert front["eta"][0] == 0.5
    assert front["eta"][-1] == front["xi"]
    assert front["u"][-1] == 0.0


def test_linear_convective_front():
    front = stefan.solve_front(1.0, 0.5, 0.5, pstar=1.0, ste=2.0, alpha=0.1, beta=0.1)
    assert front["admissible"]
    assert all(math.isfinite(v) for v in front["u"])


def test_run_scenario_verify():
    cfg = {
        "schema_version": 1,
        "mode": "verify",
        "dimensionless": {"a": 1.0, "alpha0": 0.5, "nu": 0.5, "qstar": 1.0, "m": 0.5},
    }
    out = stefan.run_scenario(json.dumps(cfg))
    assert out["summary"]["verified"] is True
    assert len(out["profile"]["eta"]) == len(out["profile"]["theta"])
    assert [row["method"] for row in out["comparison"]][:2] == ["pipeline", "oracle"]


def test_errors():
    bad = {"schema_version": 1, "mode": "solve_flux",
           "dimensionless": {"a": 1.0, "alpha0": 0.5, "nu": 1.5, "qstar": 1.0, "m": 0.5}}
    try:
        stefan.run_scenario(json.dumps(bad))
    except stefan.ConfigError as e:
        assert "nu" in str(e)
    else:
        raise AssertionError("expected ConfigError")
    try:
        stefan.solve_front(0.5, 1.0, 0.5, pstar=0.5, ste=0.5)
    except stefan.SolverError:
        pass
    else:
        raise AssertionError("expected SolverError")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok  {name}")
