import math

import numpy as np
import pytest

from faultfoc import frames

SQ3 = math.sqrt(3.0)


def test_clarke_unit_phase_a():
    assert frames.clarke((1.0, 0.0, 0.0)) == pytest.approx((2 / 3, 0.0),
                                                           abs=1e-15)


def test_clarke_unit_phase_b():
    assert frames.clarke((0.0, 1.0, 0.0)) == pytest.approx(
        (-1 / 3, SQ3 / 3), abs=1e-15)


@pytest.mark.parametrize("k", [1.0, -2.5, 7.25])
def test_clarke_kills_common_mode(k):
    assert frames.clarke((k, k, k)) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_inverse_clarke_unit_alpha():
    assert frames.inverse_clarke((1.0, 0.0)) == pytest.approx(
        (1.0, -0.5, -0.5), abs=1e-15)


def test_inverse_clarke_zero():
    assert frames.inverse_clarke((0.0, 0.0)) == pytest.approx(
        (0.0, 0.0, 0.0), abs=0.0)


def test_clarke_inverse_clarke_round_trip():
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.uniform(-10.0, 10.0, 2)
        assert frames.clarke(frames.inverse_clarke(x)) == pytest.approx(
            tuple(x), abs=1e-12)


def test_inverse_clarke_clarke_round_trip_balanced():
    # the 3->2 map loses only the common mode, so balanced vectors survive
    rng = np.random.default_rng(1)
    for _ in range(100):
        ab = rng.uniform(-10.0, 10.0, 2)
        x = np.array([ab[0], ab[1], -ab[0] - ab[1]])
        assert frames.inverse_clarke(frames.clarke(x)) == pytest.approx(
            tuple(x), abs=1e-12)


def test_park_quarter_turn():
    assert frames.park((0.0, 1.0), math.pi / 2) == pytest.approx(
        (1.0, 0.0), abs=1e-15)


def test_park_inverse_park_round_trip():
    rng = np.random.default_rng(2)
    for _ in range(100):
        x = rng.uniform(-10.0, 10.0, 2)
        a = rng.uniform(-10.0, 10.0)
        assert frames.inverse_park(frames.park(x, a), a) == pytest.approx(
            tuple(x), abs=1e-12)


def test_park_composes_like_rotation():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.uniform(-5.0, 5.0, 2)
        a, b = rng.uniform(-6.0, 6.0, 2)
        once = frames.park(x, a + b)
        twice = frames.park(frames.park(x, a), b)
        assert once == pytest.approx(tuple(twice), abs=1e-12)


def test_park_preserves_length():
    x = np.array([3.0, -4.0])
    y = frames.park(x, 1.234)
    assert np.hypot(*y) == pytest.approx(5.0, abs=1e-12)


def test_electrical_angle():
    assert frames.electrical_angle(3, 0.5) == pytest.approx(1.5, abs=0.0)
    assert frames.electrical_angle(3, 0.5, 0.1) == pytest.approx(
        3 * 0.6, abs=1e-15)
