"""
Synthetic scenes and brute-force references for checking the geometry code.

Nothing here calls the production solvers. The oracles use elementary vector
algebra, dense scanning and bisection; the only shared code is the WGS-84
conversion in :mod:`pfa_rd_geo.geodesy`.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .errors import InvalidConeError, NoSolutionError
from .geodesy import (WGS84_A, WGS84_B, Orbit, StateVector, ecef_to_llh, height_above_ellipsoid,
                      llh_to_ecef)
from .sicd_ingest import SicdMeta

PRESETS = ("equatorial-nadir-offset", "mid-latitude-squint", "high-incidence")

# orbit radius, inclination [deg], argument of latitude at COA [deg], speed,
# look angle [deg], squint [deg], side, SCP height, image shape, pixel spacing
_PRESET_GEOMETRY = {
    "equatorial-nadir-offset": dict(radius=7.0e6, incl=0.0, arg_lat=0.0, speed=7.5e3, look=20.0, squint=0.0,
                                    side="L", height=0.0, shape=(1201, 1001), spacing=(0.5, 0.6)),
    "mid-latitude-squint": dict(radius=WGS84_A + 600e3, incl=97.8, arg_lat=38.0, speed=7.56e3, look=32.0,
                                squint=8.0, side="R", height=150.0, shape=(1601, 1401), spacing=(0.4, 0.45)),
    "high-incidence": dict(radius=WGS84_A + 520e3, incl=45.0, arg_lat=-25.0, speed=7.6e3, look=52.0,
                           squint=-3.0, side="L", height=800.0, shape=(1001, 1201), spacing=(0.7, 0.5)),
}

SCAN_STEP = 1e-5
BISECT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CircularOrbit:
    """Uniform circular motion ``radius * (cos(w tau) p + sin(w tau) q)``, ``tau = t - t_ref``."""

    radius: float
    p_hat: np.ndarray
    q_hat: np.ndarray
    omega: float
    t_ref: float

    def position(self, t):
        a = self.omega * (np.asarray(t, dtype=np.float64) - self.t_ref)
        return self.radius * (np.cos(a)[..., None] * self.p_hat + np.sin(a)[..., None] * self.q_hat)

    def velocity(self, t):
        a = self.omega * (np.asarray(t, dtype=np.float64) - self.t_ref)
        return self.radius * self.omega * (-np.sin(a)[..., None] * self.p_hat + np.cos(a)[..., None] * self.q_hat)

    def sampled(self, t_start, t_end, spacing):
        times = np.arange(t_start, t_end + 0.5 * spacing, spacing)
        return Orbit(times, self.position(times), self.velocity(times))

    def taylor_polys(self, degree=5):
        """Per-axis monomial polynomials in ``t``: Taylor expansion about ``t_ref``."""
        w = self.omega
        cos_c = [0.0] * (degree + 1)
        sin_c = [0.0] * (degree + 1)
        fact = 1.0
        for n in range(degree + 1):
            fact = fact if n == 0 else fact * n
            term = w ** n / fact
            if n % 2 == 0:
                cos_c[n] = term * (-1) ** (n // 2)
            else:
                sin_c[n] = term * (-1) ** (n // 2)
        shift = Polynomial([-self.t_ref, 1.0])
        polys = []
        for axis in range(3):
            local = Polynomial(self.radius * (np.array(cos_c) * self.p_hat[axis] + np.array(sin_c) * self.q_hat[axis]))
            polys.append(tuple(local(shift).coef))
        return tuple(polys)


@dataclass(frozen=True, eq=False)
class ProbeSet:
    ground: np.ndarray
    r: np.ndarray
    rdot: np.ndarray
    row: np.ndarray
    col: np.ndarray


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    preset: str
    seed: int
    truth_orbit: CircularOrbit
    orbit: Orbit
    state: StateVector
    meta: SicdMeta
    theta: float
    dtheta_dt: float
    ksf: float
    dksf_dtheta: float
    t_coa: float
    ref_height: float
    matrix: np.ndarray
    probes: ProbeSet


def _unit(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


def _ray_ellipsoid(origin, direction):
    # nearest intersection of origin + s * direction with the h=0 ellipsoid
    w = np.array([1.0 / WGS84_A, 1.0 / WGS84_A, 1.0 / WGS84_B])
    o = origin * w
    d = direction * w
    qa = d @ d
    qb = 2.0 * (o @ d)
    qc = o @ o - 1.0
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0:
        raise ValueError("look direction misses the Earth")
    s = (-qb - np.sqrt(disc)) / (2.0 * qa)
    return origin + s * direction


def _taylor_about(values, x0):
    """Monomial coefficients of ``sum(values[n] * (x - x0)**n)``."""
    return tuple(Polynomial(values)(Polynomial([-x0, 1.0])).coef)


def make_synthetic_scene(seed=0, preset="equatorial-nadir-offset", shape=None, spacing=None, n_probes=200):
    """
    Build a self-consistent constant-COA PFA scene.

    The platform flies an analytic circular orbit. The SCP is where a look
    direction (look angle, squint, side from the preset) meets the ellipsoid,
    lifted to the preset height. Polar angle, its rate, KSF and dKSF/dtheta
    are drawn from ``seed`` and wrapped in cubic polynomials that reproduce
    them (and their derivatives) at the COA time.

    Probes are random ground points at the reference height inside the image
    footprint; their range, range rate and fractional pixel are computed
    directly from the geometry.
    """

    if preset not in _PRESET_GEOMETRY:
        raise ValueError("unknown preset {!r}; choose from {}".format(preset, PRESETS))
    geo = _PRESET_GEOMETRY[preset]
    rng = np.random.default_rng(seed)
    rows, cols = shape or geo["shape"]
    row_ss, col_ss = spacing or geo["spacing"]

    t_coa = float(np.round(rng.uniform(0.5, 3.0), 6))
    incl = np.deg2rad(geo["incl"])
    node = np.array([1.0, 0.0, 0.0])
    normal = np.array([0.0, -np.sin(incl), np.cos(incl)])
    in_plane = np.cross(normal, node)
    u = np.deg2rad(geo["arg_lat"])
    p_hat = np.cos(u) * node + np.sin(u) * in_plane
    q_hat = -np.sin(u) * node + np.cos(u) * in_plane
    circle = CircularOrbit(geo["radius"], p_hat, q_hat, geo["speed"] / geo["radius"], t_coa)
    arp = circle.position(t_coa)
    varp = circle.velocity(t_coa)
    state = StateVector(t_coa, arp, varp)

    nadir = -_unit(arp)
    along = _unit(varp - (varp @ nadir) * nadir)
    left = np.cross(along, nadir)
    cross = left if geo["side"] == "L" else -left
    look, squint = np.deg2rad(geo["look"]), np.deg2rad(geo["squint"])
    los = np.cos(look) * nadir + np.sin(look) * (np.cos(squint) * cross + np.sin(squint) * along)
    scp0 = _ray_ellipsoid(arp, _unit(los))
    scp_llh = ecef_to_llh(scp0)
    scp_llh[2] = geo["height"]
    scp = llh_to_ecef(scp_llh)

    theta = rng.uniform(-0.2, 0.2)
    dtheta = rng.uniform(0.005, 0.05)
    ksf = rng.uniform(0.98, 1.02)
    dksf = rng.uniform(-0.02, 0.02)
    polar_ang = _taylor_about([theta, dtheta, rng.uniform(-1e-4, 1e-4), rng.uniform(-1e-6, 1e-6)], t_coa)
    sf = _taylor_about([ksf, dksf, rng.uniform(-0.01, 0.01)], theta)

    center_frequency = 9.6e9
    meta = SicdMeta(
        scp_ecef=scp, scp_llh=scp_llh, scp_row=(rows - 1) // 2, scp_col=(cols - 1) // 2, rows=rows, cols=cols,
        row_spacing=row_ss, col_spacing=col_ss, time_coa_poly=[[t_coa]], polar_ang_poly=polar_ang,
        spatial_freq_sf_poly=sf, arp_poly=circle.taylor_polys(), center_frequency=center_frequency,
        side_of_track=geo["side"], coa_arp_pos=arp, coa_arp_vel=varp,
        collect_start="2026-01-01T00:00:00.000000Z")

    c, s = np.cos(theta), np.sin(theta)
    matrix = np.array([[ksf * c, ksf * s],
                       [(dksf * c - ksf * s) * dtheta, (dksf * s + ksf * c) * dtheta]])
    orbit = circle.sampled(t_coa - 150.0, t_coa + 150.0, 1.0)
    probes = _make_probes(rng, state, scp, scp_llh, matrix, meta, n_probes)
    return SyntheticScene(preset, seed, circle, orbit, state, meta, theta, dtheta, ksf, dksf, t_coa,
                          float(geo["height"]), matrix, probes)


def _make_probes(rng, state, scp, scp_llh, matrix, meta, n):
    los = state.position - scp
    r_scp = np.linalg.norm(los)
    rdot_scp = state.velocity @ los / r_scp
    lat = np.deg2rad(scp_llh[0])
    extent = 0.4 * min(meta.rows * meta.row_spacing, meta.cols * meta.col_spacing)
    ground, r, rdot, row, col = [], [], [], [], []
    while len(ground) < n:
        east, north = rng.uniform(-extent, extent, 2)
        llh = np.array([scp_llh[0] + np.rad2deg(north / WGS84_A),
                        scp_llh[1] + np.rad2deg(east / (WGS84_A * np.cos(lat))),
                        scp_llh[2]])
        t = llh_to_ecef(llh)
        d = state.position - t
        rng_t = np.linalg.norm(d)
        rdot_t = state.velocity @ d / rng_t
        rg, az = np.linalg.solve(matrix, [rng_t - r_scp, rdot_t - rdot_scp])
        pr = rg / meta.row_spacing + meta.scp_row
        pc = az / meta.col_spacing + meta.scp_col
        if not (0 <= pr <= meta.rows - 1 and 0 <= pc <= meta.cols - 1):
            continue
        ground.append(t)
        r.append(rng_t)
        rdot.append(rdot_t)
        row.append(pr)
        col.append(pc)
    return ProbeSet(np.array(ground), np.array(r), np.array(rdot), np.array(row), np.array(col))


_TABLES = {}


def _scan_table(step):
    if step not in _TABLES:
        psi = np.arange(0.0, 2.0 * np.pi, step)
        _TABLES[step] = (psi, np.cos(psi), np.sin(psi))
    return _TABLES[step]


def brute_force_rrdot(state, rd, height, look, step=SCAN_STEP, tol=BISECT_TOL):
    """
    Dense-scan reference for the range/range-rate/height intersection.

    Scans the full Doppler-cone circle at ``step`` radians against the
    ellipsoid inflated by ``height`` (the same sign as the true height
    difference except within meters of the surface), keeps crossings on
    the requested look side, widens each into a bracket of the true height
    difference and bisects it to ``tol`` radians.

    Raises
    ------
    InvalidConeError
        ``|Rdot| >= |V|``.
    NoSolutionError
        No crossing on the requested side.
    """

    pos = np.asarray(state.position, dtype=np.float64)
    vel = np.asarray(state.velocity, dtype=np.float64)
    r, rdot = float(rd[0]), float(rd[1])
    speed = np.linalg.norm(vel)
    if abs(rdot) >= speed:
        raise InvalidConeError("|Rdot| >= |V|")
    v = vel / speed
    ref = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    w1 = _unit(ref - (ref @ v) * v)
    w2 = np.cross(v, w1)
    alpha = -rdot / speed
    beta = np.sqrt(1.0 - alpha * alpha)

    def point(psi):
        psi = np.asarray(psi, dtype=np.float64)
        u = alpha * v + beta * (np.cos(psi)[..., None] * w1 + np.sin(psi)[..., None] * w2)
        return pos + r * u

    def f(psi):
        return height_above_ellipsoid(point(psi)) - height

    want_left = str(look).upper().startswith("L")
    psi, cos_psi, sin_psi = _scan_table(step)
    c0 = pos + r * alpha * v
    a_vec = r * beta * w1
    b_vec = r * beta * w2
    x = c0[0] + cos_psi * a_vec[0] + sin_psi * b_vec[0]
    y = c0[1] + cos_psi * a_vec[1] + sin_psi * b_vec[1]
    z = c0[2] + cos_psi * a_vec[2] + sin_psi * b_vec[2]
    sgn = (x * x + y * y) / (WGS84_A + height) ** 2 + z * z / (WGS84_B + height) ** 2 > 1.0
    ks = np.flatnonzero(sgn[:-1] != sgn[1:])
    if sgn[-1] != sgn[0]:
        ks = np.append(ks, psi.size - 1)
    candidates = []
    for k in ks:
        a = psi[k]
        b = a + step
        p_mid = point(0.5 * (a + b))
        is_left = np.cross(vel, p_mid - pos) @ pos > 0
        if is_left != want_left:
            continue
        width = step
        fa, fb = f(a), f(b)
        while fa * fb > 0 and width < 256 * step:
            width *= 2
            a, b = a - width, b + width
            fa, fb = f(a), f(b)
        if fa * fb > 0:
            continue
        while b - a > tol:
            m = 0.5 * (a + b)
            fm = f(m)
            if fm == 0:
                a = b = m
                break
            if (fm < 0) == (fa < 0):
                a, fa = m, fm
            else:
                b, fb = m, fm
        candidates.append(point(0.5 * (a + b)))
    if not candidates:
        raise NoSolutionError("no crossing on the {} side".format("left" if want_left else "right"))
    # several crossings on one side only happen when the range reaches past the
    # far limb; the visible one is farthest from the Earth's center along -nadir
    return max(candidates, key=lambda p: p @ pos)


def finite_diff_rdot(orbit, t, eta, h=1e-3):
    """Central-difference range rate of target ``t`` at orbit time ``eta``."""
    t = np.asarray(t, dtype=np.float64)
    p_plus = orbit.interpolate(eta + h)[0]
    p_minus = orbit.interpolate(eta - h)[0]
    return (np.linalg.norm(p_plus - t) - np.linalg.norm(p_minus - t)) / (2.0 * h)


def dense_scan_zero_doppler(orbit, t, step=1e-3, tol=1e-12):
    """
    Zero-Doppler time by scanning the orbit span at ``step`` seconds for the
    negative-to-positive sign change of ``V . (R - T)``, then bisecting.
    """

    t = np.asarray(t, dtype=np.float64)

    def g(eta):
        p, v = orbit.interpolate(eta)
        return np.sum(v * (p - t), axis=-1)

    grid = np.arange(orbit.start_time, orbit.end_time, step)
    vals = g(grid)
    ks = np.flatnonzero((vals[:-1] <= 0) & (vals[1:] > 0))
    if ks.size == 0:
        raise NoSolutionError("no zero-Doppler crossing in the orbit span")
    a, b = grid[ks[0]], grid[ks[0] + 1]
    ga = vals[ks[0]]
    while b - a > tol:
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        gm = g(m)
        if (gm <= 0) == (ga <= 0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)

