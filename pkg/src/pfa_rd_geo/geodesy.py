"""
WGS-84 geodesy, one-dimensional polynomials and orbit interpolation.

Points are plain numpy arrays with a trailing axis of length 3: ECEF
``(x, y, z)`` in meters, or geodetic ``(lat, lon, height)`` with angles in
degrees and height in meters above the ellipsoid. Every conversion works on
a single point or on an arbitrary stack of points.
"""

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, OrbitRangeError

WGS84_A = 6378137.0
WGS84_INV_F = 298.257223563
WGS84_F = 1.0 / WGS84_INV_F
WGS84_B = WGS84_A * (1.0 - WGS84_F)
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)
WGS84_EP2 = WGS84_E2 / (1.0 - WGS84_E2)

SPEED_OF_LIGHT = 299792458.0

_BOWRING_ITERATIONS = 4


class EcefPoint(NamedTuple):
    x: float
    y: float
    z: float


class LlhPoint(NamedTuple):
    lat: float
    lon: float
    height: float


def _as_points(p, name):
    arr = np.asarray(p, dtype=np.float64)
    if arr.shape[-1:] != (3,):
        raise ValueError("{} must have a trailing dimension of 3, got shape {}".format(name, arr.shape))
    return arr


def llh_to_ecef(llh):
    """
    Convert geodetic coordinates to ECEF.

    Parameters
    ----------
    llh : array_like
        ``(..., 3)`` latitude [deg], longitude [deg], height [m].

    Returns
    -------
    numpy.ndarray
        ``(..., 3)`` ECEF coordinates in meters.
    """

    llh = _as_points(llh, "llh")
    if not np.all(np.isfinite(llh)):
        raise DomainError("llh coordinates must be finite")
    lat_deg = llh[..., 0]
    if np.any(np.abs(lat_deg) > 90.0):
        raise DomainError("latitude outside [-90, 90] degrees")
    lat = np.deg2rad(lat_deg)
    lon = np.deg2rad(llh[..., 1])
    h = llh[..., 2]

    slat = np.sin(lat)
    clat = np.cos(lat)
    n = WGS84_A / np.sqrt(1.0 - WGS84_E2 * slat * slat)
    out = np.empty(llh.shape, dtype=np.float64)
    out[..., 0] = (n + h) * clat * np.cos(lon)
    out[..., 1] = (n + h) * clat * np.sin(lon)
    out[..., 2] = (n * (1.0 - WGS84_E2) + h) * slat
    return out


def _geodetic(x, y, z):
    # Bowring's parametric-latitude iteration; four passes are well below
    # 1e-9 m for anything between the Earth's core and GEO.
    p = np.hypot(x, y)
    beta = np.arctan2(z, (1.0 - WGS84_F) * p)
    for _ in range(_BOWRING_ITERATIONS):
        sb = np.sin(beta)
        cb = np.cos(beta)
        lat = np.arctan2(z + WGS84_EP2 * WGS84_B * sb * sb * sb,
                         p - WGS84_E2 * WGS84_A * cb * cb * cb)
        beta = np.arctan2((1.0 - WGS84_F) * np.sin(lat), np.cos(lat))
    slat = np.sin(lat)
    h = p * np.cos(lat) + z * slat - WGS84_A * np.sqrt(1.0 - WGS84_E2 * slat * slat)
    return lat, p, h


def ecef_to_llh(ecef):
    """
    Convert ECEF coordinates to geodetic latitude, longitude and height.

    Longitude is returned in ``[-180, 180)``. Points on the polar axis get
    longitude 0.

    Parameters
    ----------
    ecef : array_like
        ``(..., 3)`` ECEF coordinates in meters.

    Returns
    -------
    numpy.ndarray
        ``(..., 3)`` latitude [deg], longitude [deg], height [m].
    """

    ecef = _as_points(ecef, "ecef")
    x, y, z = ecef[..., 0], ecef[..., 1], ecef[..., 2]
    if np.any(np.sqrt(x * x + y * y + z * z) < 1.0):
        raise DomainError("ECEF point within 1 m of the Earth's center")
    lat, p, h = _geodetic(x, y, z)
    lon = np.where(p == 0.0, 0.0, np.arctan2(y, x))
    lon_deg = np.rad2deg(lon)
    lon_deg = np.where(lon_deg >= 180.0, lon_deg - 360.0, lon_deg)
    return np.stack([np.rad2deg(lat), lon_deg, h], axis=-1)


def height_above_ellipsoid(ecef):
    """Height above the WGS-84 ellipsoid in meters, for ``(..., 3)`` ECEF input."""
    ecef = _as_points(ecef, "ecef")
    x, y, z = ecef[..., 0], ecef[..., 1], ecef[..., 2]
    if np.any(np.sqrt(x * x + y * y + z * z) < 1.0):
        raise DomainError("ECEF point within 1 m of the Earth's center")
    return _geodetic(x, y, z)[2]


def ellipsoid_normal(llh):
    """Outward unit normal of the ellipsoid at geodetic ``(..., 3)`` positions."""
    llh = _as_points(llh, "llh")
    lat = np.deg2rad(llh[..., 0])
    lon = np.deg2rad(llh[..., 1])
    return np.stack([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)], axis=-1)


@dataclass(frozen=True)
class Polynomial1D:
    """Polynomial in one variable, constant term first."""

    coefficients: tuple

    def __post_init__(self):
        coefs = tuple(float(c) for c in np.ravel(np.asarray(self.coefficients, dtype=np.float64)))
        if len(coefs) == 0:
            raise ValueError("polynomial needs at least one coefficient")
        if not all(np.isfinite(coefs)):
            raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "coefficients", coefs)

    @property
    def order(self):
        return len(self.coefficients) - 1

    def __call__(self, x):
        return poly_eval(self, x)

    def derivative(self):
        return poly_derivative(self)


def poly_eval(p, x):
    """Horner evaluation of ``p`` at scalar or array ``x``."""
    coefs = p.coefficients if isinstance(p, Polynomial1D) else tuple(p)
    x = np.asarray(x, dtype=np.float64)
    acc = np.full(x.shape, coefs[-1], dtype=np.float64)
    for c in coefs[-2::-1]:
        acc = acc * x + c
    return acc if acc.ndim else float(acc)


def poly_derivative(p):
    coefs = p.coefficients
    if len(coefs) == 1:
        return Polynomial1D((0.0,))
    return Polynomial1D(tuple(k * c for k, c in enumerate(coefs) if k > 0))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Platform position [m] and velocity [m/s] in ECEF at ``time`` [s]."""

    time: float
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        pos = np.array(self.position, dtype=np.float64).reshape(3)
        vel = np.array(self.velocity, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel)) and np.isfinite(self.time)):
            raise ValueError("state vector must be finite")
        pos.flags.writeable = False
        vel.flags.writeable = False
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return (self.time == other.time and np.array_equal(self.position, other.position)
                and np.array_equal(self.velocity, other.velocity))

    def __hash__(self):
        return hash((self.time, self.position.tobytes(), self.velocity.tobytes()))


class Orbit:
    """
    Time-ordered platform ephemeris with cubic Hermite interpolation.

    Each interval between consecutive samples is interpolated with the cubic
    that matches position and velocity at both ends, so positions and
    velocities are reproduced exactly at the nodes and the trajectory is
    C1-continuous. Queries outside the sampled span raise
    :class:`OrbitRangeError`.
    """

    def __init__(self, times, positions, velocities):
        times = np.array(times, dtype=np.float64).reshape(-1)
        positions = np.array(positions, dtype=np.float64).reshape(-1, 3)
        velocities = np.array(velocities, dtype=np.float64).reshape(-1, 3)
        if times.size < 2:
            raise ValueError("an orbit needs at least 2 state vectors")
        if positions.shape[0] != times.size or velocities.shape[0] != times.size:
            raise ValueError("times, positions and velocities differ in length")
        if not np.all(np.diff(times) > 0):
            raise ValueError("orbit times must be strictly increasing")
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(velocities))):
            raise ValueError("orbit samples must be finite")
        for arr in (times, positions, velocities):
            arr.flags.writeable = False
        self.times = times
        self.positions = positions
        self.velocities = velocities

    @classmethod
    def from_state_vectors(cls, states: Sequence[StateVector]):
        return cls([s.time for s in states], [s.position for s in states], [s.velocity for s in states])

    @property
    def state_vectors(self):
        return [StateVector(t, p, v) for t, p, v in zip(self.times, self.positions, self.velocities)]

    @property
    def start_time(self):
        return float(self.times[0])

    @property
    def end_time(self):
        return float(self.times[-1])

    def __len__(self):
        return self.times.size

    def _locate(self, t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(~np.isfinite(t)) or np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise OrbitRangeError("time outside orbit span [{}, {}]".format(self.times[0], self.times[-1]))
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, self.times.size - 2)
        t0 = self.times[idx]
        h = self.times[idx + 1] - t0
        s = (t - t0) / h
        return t, idx, h, s

    def interpolate(self, t, derivatives=1):
        """
        Interpolate the orbit at time(s) ``t``.

        Parameters
        ----------
        t : float|numpy.ndarray
        derivatives : int
            1 returns ``(position, velocity)``; 2 also returns acceleration.

        Returns
        -------
        tuple of numpy.ndarray
            Arrays shaped ``t.shape + (3,)``.
        """

        t, idx, h, s = self._locate(t)
        s = s[..., None]
        h = h[..., None]
        p0, p1 = self.positions[idx], self.positions[idx + 1]
        v0, v1 = self.velocities[idx], self.velocities[idx + 1]
        s2 = s * s
        s3 = s2 * s
        pos = ((2 * s3 - 3 * s2 + 1) * p0 + (-2 * s3 + 3 * s2) * p1
               + (s3 - 2 * s2 + s) * h * v0 + (s3 - s2) * h * v1)
        vel = ((6 * s2 - 6 * s) * p0 + (-6 * s2 + 6 * s) * p1) / h \
            + (3 * s2 - 4 * s + 1) * v0 + (3 * s2 - 2 * s) * v1
        if derivatives < 2:
            return pos, vel
        acc = ((12 * s - 6) * p0 + (-12 * s + 6) * p1) / (h * h) + ((6 * s - 4) * v0 + (6 * s - 2) * v1) / h
        return pos, vel, acc

    def __repr__(self):
        return "Orbit(n={}, span=[{}, {}])".format(len(self), self.start_time, self.end_time)


def orbit_state_at(orbit: Orbit, t: float) -> StateVector:
    """Interpolated platform state at time ``t`` (no extrapolation)."""
    pos, vel = orbit.interpolate(float(t))
    return StateVector(t, pos, vel)
