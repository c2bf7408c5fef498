"""
Native-Doppler range/range-rate to ground projection.

Given a platform state ``(R_sat, V_sat)``, a slant range ``R`` and a range
rate ``Rdot``, the unit line-of-sight vectors ``u`` (platform to target)
with ``-V_sat . u = Rdot`` form a circle on the Doppler cone around
``V_sat``. Writing

    u(phi) = alpha * v + beta * (cos(phi) * e1 + s * sin(phi) * e2)

with ``v = V_sat / |V_sat|``, ``alpha = -Rdot / |V_sat|``,
``beta = sqrt(1 - alpha**2)``, ``e1`` the unit vector orthogonal to ``v``
pointing towards the Earth's center and ``e2 = v x e1``, the candidate
targets ``R_sat + R * u(phi)`` satisfy the range and Doppler equations
exactly for every ``phi``. ``s = +1`` selects the left-looking half of the
circle and ``s = -1`` the right-looking half, so ``phi`` only spans
``[0, pi]``. The remaining scalar equation ``height(phi) = h`` is solved by
bracketed false position (Illinois variant) with a bisection fallback.

Look side convention: a target P is on the *left* when
``(V_sat x (P - R_sat)) . R_sat > 0``.

Every batch routine works element-wise and freezes converged elements, so
a pixel's result does not depend on which other pixels share its batch.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, InvalidConeError, NoSolutionError, NodataError
from .geodesy import StateVector, _geodetic, ecef_to_llh

LEFT = "L"
RIGHT = "R"

OK = 0
NO_SOLUTION = 1
INVALID_CONE = 2
NODATA = 3
NOT_CONVERGED = 4

HEIGHT_TOL = 1e-6
MAX_ITERATIONS = 200
_SCAN_POINTS = 129

DEM_HEIGHT_TOL = 0.1
DEM_MAX_ITERATIONS = 25


def side_sign(look):
    """+1 for left-looking, -1 for right-looking."""
    if isinstance(look, (int, float)) and look in (1, -1):
        return int(look)
    side = str(look).strip().upper()[:1]
    if side == LEFT:
        return 1
    if side == RIGHT:
        return -1
    raise ValueError("look side must be 'L' or 'R', got {!r}".format(look))


@dataclass(frozen=True)
class SolveDiagnostics:
    range_residual: float
    rdot_residual: float
    height_residual: float
    iterations: int


@dataclass(frozen=True)
class DemRaster:
    """
    Heights above the WGS-84 ellipsoid on a regular latitude/longitude grid.

    ``heights[i, j]`` is the height at ``(lat0 + i * dlat, lon0 + j * dlon)``.
    NaN samples, and samples equal to ``nodata`` when it is set, are holes.
    """

    heights: np.ndarray
    lat0: float
    lon0: float
    dlat: float
    dlon: float
    nodata: Optional[float] = None

    def __post_init__(self):
        h = np.array(self.heights, dtype=np.float64)
        if h.ndim != 2 or h.size == 0:
            raise ValueError("DEM heights must be a non-empty 2-D array")
        if self.dlat == 0 or self.dlon == 0:
            raise ValueError("DEM spacings must be nonzero")
        if self.nodata is not None:
            h[h == self.nodata] = np.nan
        if np.any(np.isinf(h)):
            raise ValueError("DEM heights must be finite or nodata")
        h.flags.writeable = False
        object.__setattr__(self, "heights", h)

    @property
    def shape(self):
        return self.heights.shape

    def mean_height(self):
        valid = self.heights[np.isfinite(self.heights)]
        if valid.size == 0:
            raise NodataError("DEM holds no valid heights")
        return float(valid.mean())

    def height_at(self, lat, lon):
        """Bilinear height at ``(lat, lon)`` degrees; NaN outside coverage or in holes."""
        row = (np.asarray(lat, dtype=np.float64) - self.lat0) / self.dlat
        col = (np.asarray(lon, dtype=np.float64) - self.lon0) / self.dlon
        nr, nc = self.heights.shape
        inside = (row >= 0) & (row <= nr - 1) & (col >= 0) & (col <= nc - 1)
        r0 = np.clip(np.floor(np.where(inside, row, 0)).astype(np.int64), 0, max(nr - 2, 0))
        c0 = np.clip(np.floor(np.where(inside, col, 0)).astype(np.int64), 0, max(nc - 2, 0))
        r1 = np.minimum(r0 + 1, nr - 1)
        c1 = np.minimum(c0 + 1, nc - 1)
        fr = np.where(inside, row - r0, 0.0)
        fc = np.where(inside, col - c0, 0.0)
        h = self.heights
        top = h[r0, c0] + fc * (h[r0, c1] - h[r0, c0])
        bot = h[r1, c0] + fc * (h[r1, c1] - h[r1, c0])
        out = top + fr * (bot - top)
        # a hole anywhere in the stencil poisons the sample, even with zero weight
        holes = ~(np.isfinite(h[r0, c0]) & np.isfinite(h[r0, c1]) & np.isfinite(h[r1, c0])
                  & np.isfinite(h[r1, c1]))
        return np.where(inside & ~holes, out, np.nan)


def _broadcast(positions, velocities, r, rdot, heights):
    positions = np.asarray(positions, dtype=np.float64)
    velocities = np.asarray(velocities, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    shape = np.broadcast_shapes(positions.shape[:-1], velocities.shape[:-1], r.shape,
                                np.shape(rdot), np.shape(heights))
    positions = np.broadcast_to(positions, shape + (3,)).reshape(-1, 3)
    velocities = np.broadcast_to(velocities, shape + (3,)).reshape(-1, 3)
    r = np.broadcast_to(r, shape).reshape(-1)
    rdot = np.broadcast_to(np.asarray(rdot, dtype=np.float64), shape).reshape(-1)
    heights = np.broadcast_to(np.asarray(heights, dtype=np.float64), shape).reshape(-1)
    return shape, positions, velocities, r, rdot, heights


class _ConeCircle:
    """Vectorized parameterization of the Doppler-cone circle for N problems."""

    def __init__(self, positions, velocities, r, rdot, sign):
        self.positions = positions
        self.r = r
        vnorm = np.linalg.norm(velocities, axis=-1)
        vhat = velocities / vnorm[:, None]
        alpha = -rdot / vnorm
        self.valid = (np.abs(alpha) < 1.0) & (r > 0)
        alpha = np.where(self.valid, alpha, 0.0)
        beta = np.sqrt(1.0 - alpha * alpha)
        rperp = positions - np.sum(positions * vhat, axis=-1)[:, None] * vhat
        e1 = -rperp / np.linalg.norm(rperp, axis=-1)[:, None]
        e2 = np.cross(vhat, e1)
        self.axis = alpha[:, None] * vhat
        self.e1 = beta[:, None] * e1
        self.e2 = (sign * beta)[:, None] * e2

    def point(self, phi, idx=slice(None)):
        phi = np.asarray(phi)
        u = self.axis[idx] + np.cos(phi)[..., None] * self.e1[idx] + np.sin(phi)[..., None] * self.e2[idx]
        return self.positions[idx] + self.r[idx][..., None] * u

    def residual(self, phi, target, idx=slice(None)):
        p = self.point(phi, idx)
        return _geodetic(p[..., 0], p[..., 1], p[..., 2])[2] - target


def _bracket(circle, heights):
    n = heights.size
    lo = np.zeros(n)
    hi = np.full(n, np.pi)
    f_lo = circle.residual(lo, heights)
    f_hi = circle.residual(hi, heights)
    f_min = np.minimum(f_lo, f_hi)
    f_max = np.maximum(f_lo, f_hi)
    ok = circle.valid & (f_lo <= 0) & (f_hi >= 0)

    # No sign change between the endpoints: the range sphere may still cut the
    # surface (grazing geometry or a range reaching past the far limb). Scan the
    # half circle and take the last crossing from below, the one nearest the sky.
    retry = np.flatnonzero(circle.valid & ~ok)
    if retry.size:
        grid = np.linspace(0.0, np.pi, _SCAN_POINTS)
        phis = np.broadcast_to(grid, (retry.size, grid.size))
        f = circle.residual(phis, heights[retry][:, None], idx=retry[:, None])
        f_min[retry] = f.min(axis=1)
        f_max[retry] = f.max(axis=1)
        neg = f[:, :-1] < 0
        found = neg.any(axis=1)
        last = np.where(found, grid.size - 2 - np.argmax(neg[:, ::-1], axis=1), 0)
        hit = found & (f[np.arange(retry.size), last + 1] >= 0)
        sel = retry[hit]
        lo[sel] = grid[last[hit]]
        hi[sel] = grid[last[hit] + 1]
        f_lo[sel] = f[hit, last[hit]]
        f_hi[sel] = f[hit, last[hit] + 1]
        ok[sel] = True
    return ok, lo, hi, f_lo, f_hi, f_min, f_max


def _illinois(circle, heights, ok, lo, hi, f_lo, f_hi, tol=HEIGHT_TOL, max_iter=MAX_ITERATIONS):
    n = heights.size
    phi = np.where(f_hi == 0, hi, lo)
    best_f = np.where(f_hi == 0, 0.0, f_lo)
    active = ok & (f_lo != 0) & (f_hi != 0)
    iterations = np.zeros(n, dtype=np.int64)
    last_side = np.zeros(n, dtype=np.int8)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        a, b, fa, fb = lo[idx], hi[idx], f_lo[idx], f_hi[idx]
        x = (a * fb - b * fa) / (fb - fa)
        bad = ~((x > a) & (x < b))
        x = np.where(bad, 0.5 * (a + b), x)
        fx = circle.residual(x, heights[idx], idx=idx)
        iterations[idx] += 1

        below = fx < 0
        side = np.where(below, 1, -1).astype(np.int8)
        repeat = side == last_side[idx]
        # Illinois: halve the stale endpoint's value when the same side moves twice
        fb = np.where(below & repeat, 0.5 * fb, fb)
        fa = np.where(~below & repeat, 0.5 * fa, fa)
        lo[idx] = np.where(below, x, a)
        f_lo[idx] = np.where(below, fx, fa)
        hi[idx] = np.where(below, b, x)
        f_hi[idx] = np.where(below, fb, fx)
        last_side[idx] = side

        phi[idx] = x
        best_f[idx] = fx
        done = (np.abs(fx) < tol) | (hi[idx] - lo[idx] <= 1e-15)
        active[idx[done]] = False
    converged = ok & ~active
    return phi, best_f, iterations, converged


def rrdot_to_surface_batch(positions, velocities, r, rdot, heights, look):
    """
    Vectorized projection onto constant-height surfaces.

    Parameters
    ----------
    positions, velocities : array_like
        ``(..., 3)`` platform states; broadcast against the other inputs.
    r, rdot, heights : array_like
        Slant range [m], range rate [m/s] and target height above the ellipsoid [m].
    look : str
        ``'L'`` or ``'R'``.

    Returns
    -------
    points : numpy.ndarray
        ``(..., 3)`` ECEF solutions, NaN where no solution exists.
    status : numpy.ndarray
        ``OK``, ``NO_SOLUTION`` or ``INVALID_CONE`` per element.
    iterations : numpy.ndarray
    """

    shape, pos, vel, r, rdot, heights = _broadcast(positions, velocities, r, rdot, heights)
    circle = _ConeCircle(pos, vel, r, rdot, side_sign(look))
    ok, lo, hi, f_lo, f_hi, _, _ = _bracket(circle, heights)
    phi, _, iterations, converged = _illinois(circle, heights, ok, lo, hi, f_lo, f_hi)
    points = circle.point(phi)
    status = np.where(circle.valid, np.where(converged, OK, NO_SOLUTION), INVALID_CONE)
    points[status != OK] = np.nan
    return points.reshape(shape + (3,)), status.reshape(shape), iterations.reshape(shape)


def solve_residuals(state, rd, p, surface_height=0.0):
    """
    Signed residuals of a candidate solution ``p``.

    ``range_residual = |p - R_sat| - R``, ``rdot_residual = V . (R_sat - p) /
    |R_sat - p| - Rdot`` and ``height_residual = height(p) - surface_height``.
    """

    p = np.asarray(p, dtype=np.float64)
    los = state.position - p
    dist = float(np.linalg.norm(los))
    rdot = float(np.dot(state.velocity, los) / dist)
    h = float(_geodetic(p[0], p[1], p[2])[2])
    return SolveDiagnostics(dist - float(rd[0]), rdot - float(rd[1]), h - float(surface_height), 0)


def _check_cone(state, rd):
    vnorm = float(np.linalg.norm(state.velocity))
    if not vnorm > 0:
        raise InvalidConeError("platform velocity is zero")
    if not abs(rd[1]) < vnorm:
        raise InvalidConeError("|Rdot| = {:.6g} m/s is not below |V| = {:.6g} m/s".format(abs(rd[1]), vnorm))
    if not rd[0] > 0:
        raise ValueError("slant range must be positive")


def rrdot_to_surface(state, rd, surface_height, look):
    """
    Ground point at slant range/range rate ``rd`` on a constant-height surface.

    Parameters
    ----------
    state : StateVector
    rd : RangeDoppler|tuple
        ``(R, Rdot)`` in m and m/s.
    surface_height : float
        Height above the WGS-84 ellipsoid in meters.
    look : str
        ``'L'`` or ``'R'``.

    Returns
    -------
    (numpy.ndarray, SolveDiagnostics)

    Raises
    ------
    InvalidConeError
        ``|Rdot| >= |V|``.
    NoSolutionError
        The range sphere does not reach the surface on the requested side;
        ``f_min``/``f_max`` hold the extreme height differences found.
    """

    _check_cone(state, rd)
    pos = state.position[None, :]
    vel = state.velocity[None, :]
    r = np.array([rd[0]], dtype=np.float64)
    rdot = np.array([rd[1]], dtype=np.float64)
    heights = np.array([surface_height], dtype=np.float64)
    circle = _ConeCircle(pos, vel, r, rdot, side_sign(look))
    ok, lo, hi, f_lo, f_hi, f_min, f_max = _bracket(circle, heights)
    if not ok[0]:
        raise NoSolutionError(
            "no intersection with the h={:.3f} m surface: height difference ranges over "
            "[{:.6g}, {:.6g}] m on the {} side".format(surface_height, f_min[0], f_max[0], look),
            f_min=float(f_min[0]), f_max=float(f_max[0]))
    phi, _, iterations, converged = _illinois(circle, heights, ok, lo, hi, f_lo, f_hi)
    p = circle.point(phi)[0]
    res = solve_residuals(state, rd, p, surface_height)
    return p, SolveDiagnostics(res.range_residual, res.rdot_residual, res.height_residual, int(iterations[0]))


def rrdot_to_dem_batch(positions, velocities, r, rdot, dem, look,
                       tol=DEM_HEIGHT_TOL, max_iter=DEM_MAX_ITERATIONS):
    """
    Vectorized DEM projection by fixed-point iteration on the surface height.

    Starts every element at the DEM mean height and alternates a
    constant-height solve with a bilinear DEM lookup until successive heights
    differ by less than ``tol``.

    Returns
    -------
    points, status, iterations, dem_residual
        ``dem_residual`` is ``height(P) - DEM(P)`` at the returned point.
    """

    shape, pos, vel, r, rdot, _ = _broadcast(positions, velocities, r, rdot, 0.0)
    n = r.size
    h = np.full(n, dem.mean_height())
    points = np.full((n, 3), np.nan)
    status = np.full(n, NOT_CONVERGED, dtype=np.int64)
    iterations = np.zeros(n, dtype=np.int64)
    residual = np.full(n, np.nan)
    active = np.ones(n, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        p, st, _ = rrdot_to_surface_batch(pos[idx], vel[idx], r[idx], rdot[idx], h[idx], look)
        iterations[idx] += 1
        failed = st != OK
        status[idx[failed]] = st[failed]
        active[idx[failed]] = False

        good = idx[~failed]
        pg = p[~failed]
        llh = ecef_to_llh(pg) if good.size else np.empty((0, 3))
        h_new = dem.height_at(llh[:, 0], llh[:, 1])
        hole = ~np.isfinite(h_new)
        status[good[hole]] = NODATA
        active[good[hole]] = False

        keep = ~hole
        g = good[keep]
        points[g] = pg[keep]
        residual[g] = h[g] - h_new[keep]
        done = np.abs(h_new[keep] - h[g]) < tol
        status[g[done]] = OK
        active[g[done]] = False
        h[g[~done]] = h_new[keep][~done]
    points[status != OK] = np.nan
    return (points.reshape(shape + (3,)), status.reshape(shape), iterations.reshape(shape),
            residual.reshape(shape))


def rrdot_to_dem(state, rd, dem, look):
    """
    Ground point at ``rd`` on a DEM surface.

    Raises
    ------
    ConvergenceError
        Heights still moving by more than 0.1 m after 25 iterations.
    NodataError
        The DEM has a hole or no coverage at an iterate.
    """

    _check_cone(state, rd)
    p, status, iterations, dem_res = rrdot_to_dem_batch(
        state.position, state.velocity, rd[0], rd[1], dem, look)
    status = int(status)
    if status == OK:
        res = solve_residuals(state, rd, p)
        return p, SolveDiagnostics(res.range_residual, res.rdot_residual, float(dem_res), int(iterations))
    if status == NODATA:
        raise NodataError("DEM has no valid height near the solution")
    if status == NO_SOLUTION:
        raise NoSolutionError("no intersection with the DEM surface on the {} side".format(look))
    if status == INVALID_CONE:
        raise InvalidConeError("Doppler cone does not exist")
    raise ConvergenceError("DEM height iteration did not converge in {} steps".format(DEM_MAX_ITERATIONS),
                           diagnostics=SolveDiagnostics(np.nan, np.nan, float(dem_res), int(iterations)))


def project_batch(positions, velocities, r, rdot, surface, look):
    """Dispatch to the constant-height or DEM solver; returns ``(points, status)``."""
    if isinstance(surface, DemRaster):
        points, status, _, _ = rrdot_to_dem_batch(positions, velocities, r, rdot, surface, look)
    else:
        points, status, _ = rrdot_to_surface_batch(positions, velocities, r, rdot, surface, look)
    return points, status


_STATUS_ERRORS = {
    NO_SOLUTION: (NoSolutionError, "range sphere and Doppler cone miss the surface"),
    INVALID_CONE: (InvalidConeError, "|Rdot| >= |V|: no Doppler cone"),
    NODATA: (NodataError, "DEM has no valid height near the solution"),
    NOT_CONVERGED: (ConvergenceError, "DEM height iteration did not converge"),
}


def raise_for_status(status):
    """Raise the error of the first failed element, if any."""
    status = np.asarray(status)
    bad = np.flatnonzero(status.reshape(-1) != OK)
    if bad.size:
        code = int(status.reshape(-1)[bad[0]])
        cls, msg = _STATUS_ERRORS[code]
        raise cls("{} ({} of {} points failed)".format(msg, bad.size, status.size))
