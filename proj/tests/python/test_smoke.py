import math

import pytest

import stratshrink as ss


def test_node_rates():
    rates = ss.node_rates([2, 2], [1, 2, 3, 4])
    assert rates[0] == [10]
    assert rates[1] == [3, 7]


def test_basic_rules():
    assert ss.estimate_basic([2, 3], 5, "flat") == pytest.approx([11 / 6, 11 / 4])
    assert ss.estimate_basic([2, 3], 5, "shrink") == pytest.approx([5 / 3, 5 / 2])


def test_priors():
    assert ss.jeffreys_exponents([2, 3]) == pytest.approx([3, 1.5, 0.5])
    assert ss.a_family([2, 3], 1, 0) == pytest.approx([1.5, 1.5, 0.5])


def test_exact_and_mc():
    ex = ss.exact_risk_basic("flat", 1, 1.0)
    assert ex["value"] == pytest.approx(0.5 + 0.5 * math.exp(-1), abs=1e-9)
    r = ss.mc_risk_basic("flat", [0.4 * 3, 0.6 * 3], 100000, 1)
    assert abs(r.mean - ss.exact_risk_basic("flat", 2, 3.0)["value"]) < 4 * r.std_error


def test_errors():
    with pytest.raises(ValueError):
        ss.node_rates([2], [1, -1])
    with pytest.raises(ValueError):
        ss.run_experiment("blyth", {"schema": 2})


def test_experiment():
    out = ss.run_experiment("hudson", {"schema": 1})
    assert out["passed"]
    assert "hudson" in out["csv"].splitlines()[2]
    refused = ss.run_experiment("hierarchy", {"schema": 1, "chains": ["prior"], "reps": 1000})
    assert refused["refused"]
