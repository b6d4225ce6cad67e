import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from mcmsurvey.sensor import (
    SensorParams,
    detection_rate,
    detection_rate_and_grad,
    horizontal_gate_of,
    range_probability,
    range_probability_of,
    relative_bearing,
    vertical_gate,
    vertical_gate_of,
)

P = SensorParams()
ORIGIN = np.array([0.0, 0.0, 0.0])


def test_table_defaults():
    d = P.to_degrees()
    assert (d["lam"], d["fom"], d["a"], d["sigma"], d["h"]) == (20, 72, 5.2, 9, 20)
    assert d["alpha_fov"] == pytest.approx(120) and d["eps_fov"] == pytest.approx(5)
    assert d["eps_de"] == pytest.approx(-6)
    assert (d["p_alpha"], d["p_eps"]) == (25, 400)


def test_invalid_params():
    for kw in ({"lam": 0}, {"sigma": -1}, {"alpha_fov": -10}, {"h": 0}, {"p_eps": 0}):
        with pytest.raises(ValueError):
            SensorParams.from_degrees(**kw)
    with pytest.raises(ValueError):
        SensorParams(range_norm="max")


def test_range_probability_values():
    rho_half = 10 ** (72 / 20) / 6.2
    assert range_probability_of(rho_half, P) == pytest.approx(0.5, abs=1e-12)
    expected = norm.cdf((72 - 20 * math.log10(620)) / 9)
    assert range_probability(ORIGIN, (100.0, 0.0), P) == pytest.approx(expected, rel=1e-12)
    assert range_probability_of(1e9, P) < 1e-12
    assert range_probability_of(0.0, P) == pytest.approx(1.0)


def test_l1_range_norm():
    p1 = SensorParams(range_norm="l1")
    expected = norm.cdf((72 - 20 * math.log10(6.2 * 70)) / 9)
    assert range_probability(ORIGIN, (30.0, -40.0), p1) == pytest.approx(expected, rel=1e-12)


def test_bearing_convention():
    assert relative_bearing(ORIGIN, (10.0, 0.0)) == 0.0
    assert relative_bearing(ORIGIN, (0.0, 10.0)) == pytest.approx(math.pi / 2)
    assert relative_bearing(np.array([0, 0, math.pi / 2]), (0.0, 10.0)) == pytest.approx(0.0, abs=1e-15)


def test_horizontal_gate_values():
    assert horizontal_gate_of(0.0, P) >= 1 - 1e-6
    assert horizontal_gate_of(P.alpha_fov / 2, P) == pytest.approx(0.5, abs=1e-6)
    assert horizontal_gate_of(-P.alpha_fov / 2, P) == pytest.approx(0.5, abs=1e-6)
    assert horizontal_gate_of(math.pi, P) < 1e-6


def test_vertical_gate_values():
    rho_de = 20 / math.tan(math.radians(6))
    assert rho_de == pytest.approx(190.29, abs=0.01)
    assert vertical_gate_of(rho_de, P) > 1 - 1e-6
    lo, hi = P.elevation_band()
    for edge in (lo, hi):
        rho = P.h / math.tan(-edge)
        assert vertical_gate_of(rho, P) == pytest.approx(0.5, abs=1e-6)
    assert vertical_gate_of(1e7, P) < 1e-6
    assert 0 <= vertical_gate(ORIGIN, (0.0, 0.0), P) <= 1


def test_detection_rate_examples():
    behind = detection_rate(ORIGIN, (-200.0, 0.0), P)
    assert behind < P.lam * 1e-6
    wide = SensorParams.from_degrees(alpha_fov=359.9, p_alpha=1e4, eps_fov=179.0, eps_de=-45.0,
                                     p_eps=1e4, fom=1e4)
    assert detection_rate(ORIGIN, (50.0, 0.0), wide) == pytest.approx(20.0, rel=1e-9)
    rho = 190.29
    pr = norm.cdf((72 - 20 * math.log10(rho * 6.2)) / 9)
    s = lambda z: 1 / (1 + math.exp(-z))  # noqa: E731
    fa = s(25 * (0 + math.pi / 3)) - s(25 * (0 - math.pi / 3))
    eps = math.atan2(-20, rho)
    fe = s(400 * (eps - math.radians(-8.5))) - s(400 * (eps - math.radians(-3.5)))
    assert detection_rate(ORIGIN, (rho, 0.0), P) == pytest.approx(20 * pr * fa * fe, rel=1e-12)


def test_vectorization_shapes():
    poses = np.zeros((7, 1, 3))
    poses[:, 0, 2] = np.linspace(0, 1, 7)
    targets = np.random.default_rng(0).uniform(-300, 300, (11, 2))
    assert detection_rate(poses, targets, P).shape == (7, 11)


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(1)
    for _ in range(20):
        pose = np.array([*rng.uniform(-50, 50, 2), rng.uniform(-math.pi, math.pi)])
        tgt = pose[:2] + rng.uniform(-350, 350, 2)
        _, grads = detection_rate_and_grad(pose, tgt, P)
        for k in range(3):
            h = 1e-5 if k == 2 else 1e-4
            e = np.zeros(3)
            e[k] = h
            fd = (detection_rate(pose + e, tgt, P) - detection_rate(pose - e, tgt, P)) / (2 * h)
            assert grads[k] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_range_probability_decreasing_on_ordered_samples():
    rho = np.linspace(0.1, 5000, 1000)
    assert np.all(np.diff(range_probability_of(rho, P)) < 0)


finite = st.floats(-2000, 2000, allow_nan=False)
angle = st.floats(-10, 10, allow_nan=False)


@given(finite, finite, angle, finite, finite)
@settings(max_examples=200, deadline=None)
def test_rate_bounds(x, y, psi, ox, oy):
    g = detection_rate(np.array([x, y, psi]), (ox, oy), P)
    assert 0 <= g <= P.lam


@given(st.floats(-math.pi, math.pi))
@settings(max_examples=100, deadline=None)
def test_horizontal_gate_even(b):
    assert horizontal_gate_of(b, P) == pytest.approx(horizontal_gate_of(-b, P), abs=1e-15)


@given(finite, finite, angle, st.floats(-math.pi, math.pi))
@settings(max_examples=100, deadline=None)
def test_rotational_invariance(ox, oy, psi, theta):
    c, s = math.cos(theta), math.sin(theta)
    rot = (c * ox - s * oy, s * ox + c * oy)
    a = detection_rate(np.array([0, 0, psi]), (ox, oy), P)
    b = detection_rate(np.array([0, 0, psi + theta]), rot, P)
    assert a == pytest.approx(b, abs=1e-12)
