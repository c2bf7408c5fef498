import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfa_rd_geo.errors import DomainError, OrbitRangeError
from pfa_rd_geo.geodesy import (WGS84_A, WGS84_B, Orbit, Polynomial1D, StateVector, ecef_to_llh,
                                height_above_ellipsoid, llh_to_ecef, orbit_state_at, poly_derivative, poly_eval)
from pfa_rd_geo.testkit import CircularOrbit

# WGS-84 closed form for (34.05, -118.25, 500), evaluated with the math module alone
LOS_ANGELES_ECEF = (-2504130.472208892, -4660413.443934171, 3551323.1280550193)


def test_equator_prime_meridian():
    np.testing.assert_array_equal(llh_to_ecef([0.0, 0.0, 0.0]), [WGS84_A, 0.0, 0.0])


def test_pole_is_semi_minor_axis():
    p = llh_to_ecef([90.0, 0.0, 0.0])
    assert abs(p[2] - 6356752.3142) < 1e-3
    assert abs(p[0]) < 1e-9 and p[1] == 0.0


def test_textbook_point():
    np.testing.assert_allclose(llh_to_ecef([34.05, -118.25, 500.0]), LOS_ANGELES_ECEF, rtol=0, atol=1e-6)


def test_ecef_to_llh_equator():
    lat, lon, h = ecef_to_llh([WGS84_A, 0.0, 0.0])
    assert abs(lat) < 1e-9 and abs(lon) < 1e-9 and abs(h) < 1e-4


def test_ecef_to_llh_pole_longitude_convention():
    lat, lon, h = ecef_to_llh([0.0, 0.0, WGS84_B])
    assert abs(lat - 90.0) < 1e-9
    assert lon == 0.0
    assert abs(h) < 1e-4


def test_llh_round_trip_1000_points():
    rng = np.random.default_rng(0)
    llh = np.column_stack([rng.uniform(-90, 90, 1000), rng.uniform(-180, 180, 1000), rng.uniform(-500, 9000, 1000)])
    ecef = llh_to_ecef(llh)
    back = llh_to_ecef(ecef_to_llh(ecef))
    assert np.max(np.linalg.norm(back - ecef, axis=-1)) < 1e-4


def test_longitude_range():
    lon = ecef_to_llh([-WGS84_A, 0.0, 0.0])[1]
    assert lon == -180.0


def test_height_above_ellipsoid_examples():
    assert abs(height_above_ellipsoid([WGS84_A, 0.0, 0.0])) < 1e-4
    assert abs(height_above_ellipsoid([0.0, 0.0, WGS84_B])) < 1e-4
    assert abs(height_above_ellipsoid(LOS_ANGELES_ECEF) - 500.0) < 1e-4


@pytest.mark.parametrize("bad", [[91.0, 0.0, 0.0], [np.nan, 0.0, 0.0], [0.0, np.inf, 0.0]])
def test_llh_domain(bad):
    with pytest.raises(DomainError):
        llh_to_ecef(bad)


def test_ecef_near_center():
    with pytest.raises(DomainError):
        ecef_to_llh([0.1, 0.0, 0.0])


@given(st.floats(-89.9, 89.9), st.floats(-179.9, 179.9), st.floats(-500, 9000))
@settings(max_examples=200, deadline=None)
def test_round_trip_property(lat, lon, h):
    back = ecef_to_llh(llh_to_ecef([lat, lon, h]))
    assert abs(back[0] - lat) < 1e-9 and abs(back[1] - lon) < 1e-9 and abs(back[2] - h) < 1e-4


def test_poly_eval_examples():
    assert poly_eval(Polynomial1D([2.0]), 17.0) == 2.0
    assert poly_eval(Polynomial1D([1.0, 2.0, 3.0]), 2.0) == 17.0


def test_poly_eval_against_power_sum():
    rng = np.random.default_rng(1)
    for _ in range(50):
        c = rng.normal(size=6)
        x = rng.uniform(-3, 3)
        assert poly_eval(Polynomial1D(c), x) == pytest.approx(sum(ci * x ** i for i, ci in enumerate(c)), rel=1e-12)


def test_poly_eval_vectorized():
    x = np.linspace(-1, 1, 7)
    np.testing.assert_allclose(Polynomial1D([1.0, 0.0, 2.0])(x), 1.0 + 2.0 * x * x, rtol=1e-15)


def test_poly_derivative_examples():
    assert poly_derivative(Polynomial1D([5.0])).coefficients == (0.0,)
    assert poly_derivative(Polynomial1D([0.0, 0.0, 1.0])).coefficients == (0.0, 2.0)


def test_poly_derivative_central_difference():
    rng = np.random.default_rng(2)
    p = Polynomial1D(rng.normal(size=7))
    d = p.derivative()
    x = rng.uniform(-1, 1, 100)
    h = 1e-4
    assert np.max(np.abs((p(x + h) - p(x - h)) / (2 * h) - d(x))) < 1e-6


def test_polynomial_validation():
    with pytest.raises(ValueError):
        Polynomial1D([])
    with pytest.raises(ValueError):
        Polynomial1D([1.0, np.nan])


def _linear_orbit():
    times = np.arange(0.0, 60.0, 10.0)
    v = np.array([10.0, 7500.0, -3.0])
    return Orbit(times, [7.0e6, 0.0, 0.0] + times[:, None] * v, np.tile(v, (times.size, 1))), v


def test_orbit_nodes_exact():
    orbit, _ = _linear_orbit()
    for t, p, v in zip(orbit.times, orbit.positions, orbit.velocities):
        s = orbit_state_at(orbit, t)
        np.testing.assert_array_equal(s.position, p)
        np.testing.assert_array_equal(s.velocity, v)


def test_linear_orbit_midpoint():
    orbit, v = _linear_orbit()
    s = orbit_state_at(orbit, 25.0)
    np.testing.assert_allclose(s.position, [7.0e6 + 250.0, 7500.0 * 25.0, -75.0], rtol=0, atol=1e-8)
    np.testing.assert_allclose(s.velocity, v, rtol=0, atol=1e-9)


def test_circular_orbit_10s_samples():
    circle = CircularOrbit(7.0e6, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), 7500.0 / 7.0e6, 0.0)
    orbit = circle.sampled(-100.0, 100.0, 10.0)
    for t in np.arange(-95.0, 100.0, 10.0):
        assert np.linalg.norm(orbit.interpolate(t)[0] - circle.position(t)) < 1e-3


def test_orbit_no_extrapolation():
    orbit, _ = _linear_orbit()
    with pytest.raises(OrbitRangeError):
        orbit.interpolate(orbit.end_time + 1e-6)
    with pytest.raises(OrbitRangeError):
        orbit.interpolate(np.nan)


def test_orbit_validation():
    with pytest.raises(ValueError):
        Orbit([0.0, 0.0], np.zeros((2, 3)), np.zeros((2, 3)))
    with pytest.raises(ValueError):
        Orbit([0.0], np.zeros((1, 3)), np.zeros((1, 3)))


def test_state_vector_immutable_and_comparable():
    s = StateVector(1.0, [1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    with pytest.raises(ValueError):
        s.position[0] = 0.0
    assert s == StateVector(1.0, (1.0, 2.0, 3.0), (4.0, 5.0, 6.0))
    assert len({s, StateVector(1.0, (1.0, 2.0, 3.0), (4.0, 5.0, 6.0))}) == 1
