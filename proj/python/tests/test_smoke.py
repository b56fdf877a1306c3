import json
import math

import numpy as np
import pytest

import sfio


def test_wave_speeds_default_material():
    c_l, c_s = sfio.wave_speeds(70.0, 0.35)
    assert c_l == pytest.approx(0.6450543445734879, abs=1e-12)
    assert c_s == pytest.approx(0.30987408390150945, abs=1e-12)


def test_exp_autocov_at_one_length():
    assert sfio.exp_autocov(3.0, 3.5, 3.0) == pytest.approx(12.25 / math.e, rel=1e-12)


def test_config_round_trip_and_hash():
    text = sfio.reference_config_json()
    doc = json.loads(text)
    assert doc["material"]["E_gpa"] == 70.0
    assert sfio.config_hash(text) == sfio.config_hash(json.dumps(doc))
    doc["material"]["E_gpa"] = 60.0
    assert sfio.config_hash(text) != sfio.config_hash(json.dumps(doc))


def test_invalid_config_raises_value_error():
    with pytest.raises(ValueError, match="material.nu"):
        sfio.config_hash('{"material": {"nu": 0.7}}')


def test_fio_solution_shape_and_symmetry():
    s = sfio.solve_fio()
    assert s["t"].shape == (140,)
    assert s["ux"].shape == (8, 140)
    assert list(s["sensor_ids"]) == list(range(1, 9))
    # Sensors 1 and 3 mirror about the y axis.
    peak = np.abs(s["uy"]).max()
    np.testing.assert_allclose(s["ux"][0], -s["ux"][2], atol=1e-9 * peak)
    np.testing.assert_allclose(s["uy"][0], s["uy"][2], atol=1e-9 * peak)


def test_stochastic_solve_is_reproducible():
    a = sfio.solve_fio_stochastic(11)
    b = sfio.solve_fio_stochastic(11)
    np.testing.assert_array_equal(a["uy"], b["uy"])


def test_self_consistent_estimate():
    r = sfio.estimate_nominal(sfio.solve_fio(70.0, 0.35))
    assert r["E_gpa"] == pytest.approx(70.0, rel=0.005)
    assert r["nu"] == pytest.approx(0.35, rel=0.01)
    assert r["converged"]


def test_reference_bias_correction():
    L, s = sfio.correct_bias(4.7385, 2.3275, (1.8415, 0.2132), (2.7503, 0.5790), 3.5)
    assert L == pytest.approx(2.5588791097054195, abs=1e-10)
    assert s == pytest.approx(3.6206771408856615, abs=1e-10)


def test_power_curve_and_p_value():
    L = [0.5, 1.0, 2.0, 4.0]
    c0, c1 = sfio.fit_power_curve(L, [2.0 * x**0.5 for x in L])
    assert (c0, c1) == (pytest.approx(2.0), pytest.approx(0.5))
    assert sfio.p_value(95.0, list(range(1, 101)), "right") == pytest.approx(7 / 101)
    with pytest.raises(ValueError):
        sfio.p_value(0.0, [1.0], "up")
