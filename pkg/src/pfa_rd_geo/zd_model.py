"""
Zero-Doppler reference geometry.

A zero-Doppler image line ``k`` is acquired at azimuth time
``t0 + k * dt`` and range sample ``j`` sits at slant range ``r0 + j * dr``
with ``Rdot = 0``. Forward mapping interpolates the orbit per line and reuses
the Native-Doppler solver; inverse mapping searches the orbit for the time
at which the platform velocity is orthogonal to the line of sight.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import OutOfSwathError
from .geodesy import Orbit, poly_derivative, poly_eval
from .pfa_model import ImageIndex
from .rd_solver import project_batch, raise_for_status, side_sign

ZD_REL_TOL = 1e-13
MAX_NEWTON = 60


class ZdSolution(NamedTuple):
    eta: float
    r: float


@dataclass(frozen=True, eq=False)
class ZeroDopplerGrid:
    """
    Zero-Doppler raster geometry. Arrays on this grid have shape
    ``(rows, lines)``: axis 0 is range, axis 1 is azimuth.
    """

    r0: float
    dr: float
    t0: float
    dt: float
    rows: int
    lines: int
    orbit: Orbit
    wavelength: float
    look_side: str

    def __post_init__(self):
        if not self.dr > 0:
            raise ValueError("range spacing must be positive")
        if self.dt == 0:
            raise ValueError("azimuth time spacing must be nonzero")
        if self.rows <= 0 or self.lines <= 0:
            raise ValueError("grid dimensions must be positive")
        side_sign(self.look_side)
        t_first, t_last = sorted((self.t0, self.t0 + self.dt * (self.lines - 1)))
        if t_first < self.orbit.start_time or t_last > self.orbit.end_time:
            raise ValueError("grid azimuth times [{}, {}] leave the orbit span".format(t_first, t_last))

    @property
    def shape(self):
        return (self.rows, self.lines)

    def slant_range(self, row):
        return self.r0 + self.dr * np.asarray(row, dtype=np.float64)

    def azimuth_time(self, line):
        return self.t0 + self.dt * np.asarray(line, dtype=np.float64)

    def index_of(self, r, eta):
        """Fractional ``(row, line)`` of slant range ``r`` and azimuth time ``eta``."""
        return ImageIndex((np.asarray(r) - self.r0) / self.dr, (np.asarray(eta) - self.t0) / self.dt)

    def as_dict(self):
        return {"r0": self.r0, "dr": self.dr, "t0": self.t0, "dt": self.dt, "rows": self.rows,
                "lines": self.lines, "wavelength": self.wavelength, "look_side": self.look_side,
                "orbit_span": [self.orbit.start_time, self.orbit.end_time]}


def _doppler_function(orbit, t, eta):
    pos, vel, acc = orbit.interpolate(eta, derivatives=2)
    los = pos - t
    g = float(np.dot(vel, los))
    dg = float(np.dot(acc, los) + np.dot(vel, vel))
    scale = float(np.linalg.norm(vel) * np.linalg.norm(los))
    return g, dg, scale, los


def zd_inverse_map(orbit, t, eta_guess=None):
    """
    Zero-Doppler azimuth time and slant range of ground point ``t``.

    Solves ``V(eta) . (R(eta) - T) = 0`` with Newton steps (derivative
    ``A . (R - T) + |V|**2`` from the Hermite orbit) kept inside a bracket
    that is grown geometrically from ``eta_guess``; a step leaving the
    bracket is replaced by bisection.

    Parameters
    ----------
    orbit : Orbit
    t : array_like
        ECEF target, shape ``(3,)``.
    eta_guess : float, optional
        Defaults to the middle of the orbit span.

    Returns
    -------
    ZdSolution

    Raises
    ------
    OutOfSwathError
        ``g`` does not change sign inside the orbit span.
    """

    t = np.asarray(t, dtype=np.float64).reshape(3)
    start, end = orbit.start_time, orbit.end_time
    x = 0.5 * (start + end) if eta_guess is None else min(max(float(eta_guess), start), end)
    g, dg, scale, _ = _doppler_function(orbit, t, x)
    if g == 0:
        return ZdSolution(x, float(np.linalg.norm(orbit.interpolate(x)[0] - t)))

    # g increases through a zero-Doppler crossing, so its sign says which way to grow
    step = max(1e-3, 1e-3 * (end - start))
    if g > 0:
        b, gb = x, g
        a = x
        while True:
            a = max(a - step, start)
            ga = _doppler_function(orbit, t, a)[0]
            if ga <= 0:
                break
            if a == start:
                raise OutOfSwathError("no zero-Doppler crossing inside the orbit span")
            step *= 2.0
    else:
        a, ga = x, g
        b = x
        while True:
            b = min(b + step, end)
            gb = _doppler_function(orbit, t, b)[0]
            if gb >= 0:
                break
            if b == end:
                raise OutOfSwathError("no zero-Doppler crossing inside the orbit span")
            step *= 2.0
    if ga == 0 or gb == 0:
        x = a if ga == 0 else b
        return ZdSolution(float(x), float(np.linalg.norm(orbit.interpolate(x)[0] - t)))

    for _ in range(MAX_NEWTON):
        g, dg, scale, los = _doppler_function(orbit, t, x)
        if abs(g) <= ZD_REL_TOL * scale:
            break
        if g < 0:
            a = x
        else:
            b = x
        newton = x - g / dg if dg != 0 else np.nan
        x_new = newton if a < newton < b else 0.5 * (a + b)
        if x_new == x or b - a <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            break
        x = x_new
    pos = orbit.interpolate(x)[0]
    return ZdSolution(float(x), float(np.linalg.norm(pos - t)))


def zd_doppler_residual(orbit, t, eta):
    """Normalized zero-Doppler residual ``V . (R - T) / (|V| |R - T|)`` at ``eta``."""
    g, _, scale, _ = _doppler_function(orbit, np.asarray(t, dtype=np.float64), eta)
    return g / scale


def zd_forward_map_batch(grid, index, surface):
    """Ground points for ``(row, line)`` indices; returns ``(points, status)`` without raising."""
    row = np.asarray(index[0], dtype=np.float64)
    line = np.asarray(index[1], dtype=np.float64)
    row, line = np.broadcast_arrays(row, line)
    pos, vel = grid.orbit.interpolate(grid.azimuth_time(line))
    return project_batch(pos, vel, grid.slant_range(row), 0.0, surface, grid.look_side)


def zd_forward_map(grid, index, surface):
    """
    Ground point(s) of zero-Doppler pixel(s).

    Parameters
    ----------
    grid : ZeroDopplerGrid
    index : ImageIndex|tuple
        ``(row, line)``; scalars or broadcastable arrays.
    surface : float|DemRaster
        Constant height above the ellipsoid, or a DEM.

    Returns
    -------
    numpy.ndarray
        ``(..., 3)`` ECEF points.
    """

    points, status = zd_forward_map_batch(grid, index, surface)
    raise_for_status(status)
    return points


def orbit_from_polynomials(polys, t_start, t_end, spacing=1.0):
    """
    Sample per-axis position polynomials into an :class:`Orbit`.

    Velocities come from the analytic polynomial derivatives, so the Hermite
    interpolant reproduces any cubic trajectory exactly.
    """

    if not t_end > t_start:
        raise ValueError("orbit span must be positive")
    n = max(2, int(np.ceil((t_end - t_start) / spacing)) + 1)
    times = np.linspace(t_start, t_end, n)
    pos = np.stack([poly_eval(p, times) for p in polys], axis=-1)
    vel = np.stack([poly_eval(poly_derivative(p), times) for p in polys], axis=-1)
    return Orbit(times, pos, vel)


def orbit_from_meta(meta, half_span=60.0, spacing=1.0):
    """Orbit sampled from the ARP polynomial over ``t_COA +/- half_span`` seconds."""
    t_coa = float(meta.time_coa_poly[0][0])
    return orbit_from_polynomials(meta.arp_poly, t_coa - half_span, t_coa + half_span, spacing)
