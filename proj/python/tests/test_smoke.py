import csv
import io
import math

import pytest

import avlab

ZERO = {
    "scenario": {"name": "zero"},
    "beam": {"nodes_per_axis": 5},
    "ladders": {"alpha": [0.2, 0.1, 0.05], "rapidity": [3.0], "time": [0.5, 1.0], "time_unit": "lab"},
    "reference": {"alpha": 0.1, "rapidity": 3.0, "time": 0.5},
    "fluid": {"curve_time": 0.2},
}


def test_scenarios_listed():
    names = {s["name"] for s in avlab.list_scenarios()}
    assert {"zero", "uniform_b", "uniform_e", "b_gradient"} <= names


def test_spray_identity():
    F = [[0, 1.0, 0.5, 0], [-1.0, 0, 2.0, 0], [-0.5, -2.0, 0, 0.3], [0, 0, -0.3, 0]]
    y = [math.cosh(1.0), math.sinh(1.0), 0.0, 0.0]
    G = avlab.lorentz_coeffs(F, y)
    contracted = [sum(G[i][j][k] * y[j] * y[k] for j in range(4) for k in range(4)) for i in range(4)]
    spray = avlab.lorentz_spray(F, y)
    assert contracted == pytest.approx(spray, abs=1e-12)


def test_beam_calibration():
    st = avlab.beam_stats(3.0, [1, 0, 0], 0.1, skew=0.3)
    assert st["alpha"] == pytest.approx(0.1, rel=0.02)
    assert st["max_delta"] <= 1.5 * st["alpha"]
    m = avlab.beam_moments(0.0, [1, 0, 0], 0.2)
    assert max(abs(v) for v in m["first"][1:]) < 1e-12


def test_fit_scaling():
    x = [0.4, 0.2, 0.1, 0.05]
    fit = avlab.fit_scaling(x, [7 * v * v for v in x])
    assert fit["valid"]
    assert fit["exponent"] == pytest.approx(2.0)
    assert not avlab.fit_scaling([1, 2], [1, 2])["valid"]


def test_unknown_config_key_rejected():
    with pytest.raises(Exception, match="unknown config key"):
        avlab.parse_config('{"colour": 1}')


def test_zero_field_scan():
    out = avlab.run_scan(ZERO)
    m = out["manifest"]
    assert m["schema_version"] == avlab.SCHEMA_VERSION
    assert out["exit_code"] == 0
    assert all(c["status"] != "fail" for c in m["checks"])
    rows = list(csv.DictReader(io.StringIO(out["comparison_csv"])))
    assert len(rows) == m["tables"]["comparison"]["rows"]
    assert list(rows[0].keys()) == avlab.comparison_columns()
    assert all(float(r["position_gap"]) == 0.0 for r in rows)
    again = avlab.run_scan(ZERO)
    assert again["comparison_csv"] == out["comparison_csv"]
    assert again["fluid_csv"] == out["fluid_csv"]
