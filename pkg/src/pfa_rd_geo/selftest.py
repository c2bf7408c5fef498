"""
End-to-end acceptance checks on built-in synthetic scenes.

Every check builds its own inputs from fixed seeds, times itself, and
returns a :class:`CriterionResult`. :func:`run_selftest` runs them all and
prints one line per check; the command-line ``selftest`` and the acceptance
tests both go through here.
"""

import dataclasses
import math
import sys
import time
from typing import NamedTuple

import numpy as np

from .errors import GeometryError
from .geodesy import Orbit, ecef_to_llh, llh_to_ecef
from .pfa_model import (LEFT, RIGHT, ImageCoord, PfaConstants, RangeDoppler, compute_affine, image_to_rrdot,
                        rdot_to_doppler, rrdot_to_image, scanline_model)
from .projection import PfaImageModel, geocode_grid, pfa_forward_map, pfa_forward_map_batch, pfa_inverse_map
from .rd_solver import OK, DemRaster, rrdot_to_dem_batch, rrdot_to_surface_batch, solve_residuals
from .resampler import design_zd_grid, resample_pfa_to_zd
from .testkit import PRESETS, brute_force_rrdot, dense_scan_zero_doppler, make_synthetic_scene
from .zd_model import zd_doppler_residual, zd_inverse_map


class CriterionResult(NamedTuple):
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        return "{} criterion {}: {} ({}; {:.2f} s)".format(
            "PASS" if self.passed else "FAIL", self.number, self.name, self.detail, self.seconds)


def _ulps(a, b):
    """Distance between ``a`` and ``b`` in units of the last place of the larger."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.spacing(np.maximum(np.abs(a), np.abs(b)))


def _perturbed(model, perturb_a21):
    if not perturb_a21:
        return model
    return model.with_affine(dataclasses.replace(model.affine, a21=model.affine.a21 + perturb_a21))


def _random_constants(rng):
    pos = rng.normal(size=3)
    pos *= rng.uniform(6.9e6, 7.3e6) / np.linalg.norm(pos)
    vel = np.cross(pos, rng.normal(size=3))
    vel *= rng.uniform(7.0e3, 7.8e3) / np.linalg.norm(vel)
    return PfaConstants(
        arp_pos=pos, arp_vel=vel, r_scp=rng.uniform(5e5, 1.2e6), rdot_scp=rng.uniform(-1500.0, 1500.0),
        theta_coa=rng.uniform(-0.2, 0.2), dtheta_dt=rng.uniform(0.005, 0.05), ksf=rng.uniform(0.98, 1.02),
        dksf_dtheta=rng.uniform(-0.02, 0.02), t_coa=rng.uniform(0.0, 100.0), wavelength=rng.uniform(0.01, 0.3),
        look_side=LEFT if rng.random() < 0.5 else RIGHT)


def criterion_affine(n=1000, seed=11):
    """Matrix entries against direct re-evaluation, and affine round trips."""
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst_ulp = worst_pos = worst_rdot = 0.0
    for _ in range(n):
        k = _random_constants(rng)
        m = compute_affine(k)
        c, s = math.cos(k.theta_coa), math.sin(k.theta_coa)
        ref = (k.ksf * c, k.ksf * s,
               (k.dksf_dtheta * c - k.ksf * s) * k.dtheta_dt,
               (k.dksf_dtheta * s + k.ksf * c) * k.dtheta_dt)
        worst_ulp = max(worst_ulp, float(np.max(_ulps((m.a11, m.a12, m.a21, m.a22), ref))))

        coord = ImageCoord(rng.uniform(-5000.0, 5000.0, 16), rng.uniform(-5000.0, 5000.0, 16))
        back = rrdot_to_image(m, image_to_rrdot(m, coord))
        worst_pos = max(worst_pos, float(np.max(np.hypot(back.rg - coord.rg, back.az - coord.az))))
        rd = image_to_rrdot(m, ImageCoord(rng.uniform(-5000.0, 5000.0, 16), rng.uniform(-5000.0, 5000.0, 16)))
        rd2 = image_to_rrdot(m, rrdot_to_image(m, rd))
        worst_rdot = max(worst_rdot, float(np.max(np.abs(rd2.rdot - rd.rdot))))
    dt = time.perf_counter() - t0
    passed = worst_ulp <= 4 and worst_pos < 1e-6 and worst_rdot < 1e-9 and dt < 1.0
    detail = "max {:.0f} ulp, round trip {:.2e} m / {:.2e} m/s over {} models".format(
        worst_ulp, worst_pos, worst_rdot, n)
    return CriterionResult(1, "affine model", passed, detail, dt)


def criterion_forward_inverse(n_probes=200, seed=21, perturb_a21=0.0):
    """Forward mapping against probe truth and inverse mapping back to the probe pixels."""
    t0 = time.perf_counter()
    worst_m = worst_px = 0.0
    for i, preset in enumerate(PRESETS):
        scene = make_synthetic_scene(seed + i, preset, n_probes=n_probes)
        model = _perturbed(PfaImageModel.from_meta(scene.meta), perturb_a21)
        pr = scene.probes
        points, status = pfa_forward_map_batch(model, (pr.row, pr.col), scene.ref_height)
        err = np.linalg.norm(points - pr.ground, axis=-1)
        worst_m = max(worst_m, float(np.max(np.where(status == OK, err, np.inf))))
        index = pfa_inverse_map(model, pr.ground)
        worst_px = max(worst_px, float(np.max(np.hypot(index.row - pr.row, index.col - pr.col))))
    dt = time.perf_counter() - t0
    passed = worst_m < 0.01 and worst_px < 1e-3 and dt < 10.0
    detail = "forward {:.2e} m, inverse {:.2e} px over {} probes".format(worst_m, worst_px, 3 * n_probes)
    return CriterionResult(2, "forward/inverse mapping", passed, detail, dt)


def _solver_cases(scene, rng, n):
    """Range/range-rate/height triples around a scene, about one in ten unreachable."""
    model = PfaImageModel.from_meta(scene.meta)
    g = model.grid
    rows = rng.uniform(-0.5 * g.rows, 1.5 * g.rows, n)
    cols = rng.uniform(-0.5 * g.cols, 1.5 * g.cols, n)
    heights = rng.uniform(-200.0, 3000.0, n)
    rd = image_to_rrdot(model.affine, ((rows - g.scp_row) * g.row_spacing, (cols - g.scp_col) * g.col_spacing))
    r = np.array(rd.r)
    # ranges shorter than the platform altitude cannot reach the surface
    short = rng.random(n) < 0.1
    altitude = np.linalg.norm(scene.state.position) - 6.4e6
    r[short] = rng.uniform(0.3, 0.9, np.count_nonzero(short)) * altitude
    return r, np.array(rd.rdot), heights


def _hill_dem(scene):
    lat0, lon0, _ = ecef_to_llh(scene.meta.scp_ecef)
    n = 201
    dlat = dlon = 0.0005
    i, j = np.indices((n, n))
    heights = scene.ref_height + 120.0 * np.sin(i / 17.0) * np.cos(j / 23.0) + 0.4 * i
    return DemRaster(heights, lat0 - 0.5 * (n - 1) * dlat, lon0 - 0.5 * (n - 1) * dlon, dlat, dlon)


def criterion_solver(n_per_preset=210, seed=31):
    """Solver residual contract and agreement with the dense-scan oracle."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = dict(range=0.0, rdot=0.0, height=0.0, dem=0.0, oracle=0.0)
    mismatched = 0
    cases = 0
    for i, preset in enumerate(PRESETS):
        scene = make_synthetic_scene(seed + i, preset, n_probes=1)
        state = scene.state
        look = scene.meta.side_of_track
        speed = float(np.linalg.norm(state.velocity))
        r, rdot, heights = _solver_cases(scene, rng, n_per_preset)
        points, status, _ = rrdot_to_surface_batch(state.position, state.velocity, r, rdot, heights, look)
        for p, s, rr, dd, h in zip(points, status, r, rdot, heights):
            cases += 1
            try:
                truth = brute_force_rrdot(state, (rr, dd), h, look)
            except GeometryError:
                truth = None
            if (truth is None) != (s != OK):
                mismatched += 1
                continue
            if truth is None:
                continue
            res = solve_residuals(state, (rr, dd), p, h)
            worst["range"] = max(worst["range"], abs(res.range_residual))
            worst["rdot"] = max(worst["rdot"], abs(res.rdot_residual) / speed)
            worst["height"] = max(worst["height"], abs(res.height_residual))
            worst["oracle"] = max(worst["oracle"], float(np.linalg.norm(p - truth)))

        dem = _hill_dem(scene)
        model = PfaImageModel.from_meta(scene.meta)
        g = model.grid
        pix = (rng.uniform(0, g.rows - 1, 100), rng.uniform(0, g.cols - 1, 100))
        rd = image_to_rrdot(model.affine, ((pix[0] - g.scp_row) * g.row_spacing,
                                           (pix[1] - g.scp_col) * g.col_spacing))
        dpoints, dstatus, _, _ = rrdot_to_dem_batch(state.position, state.velocity, rd.r, rd.rdot, dem, look)
        if np.any(dstatus != OK):
            mismatched += int(np.count_nonzero(dstatus != OK))
        for p, rr, dd in zip(dpoints[dstatus == OK], rd.r[dstatus == OK], rd.rdot[dstatus == OK]):
            lat, lon, h = ecef_to_llh(p)
            res = solve_residuals(state, (rr, dd), p, dem.height_at(lat, lon))
            worst["range"] = max(worst["range"], abs(res.range_residual))
            worst["rdot"] = max(worst["rdot"], abs(res.rdot_residual) / speed)
            worst["dem"] = max(worst["dem"], abs(res.height_residual))
    dt = time.perf_counter() - t0
    passed = (worst["range"] < 1e-3 and worst["rdot"] < 1e-6 and worst["height"] < 1e-3 and worst["dem"] < 0.5
              and worst["oracle"] < 0.01 and mismatched == 0 and cases >= 600 and dt < 30.0)
    detail = ("residuals {range:.1e} m / {rdot:.1e} / {height:.1e} m / DEM {dem:.2e} m, oracle {oracle:.1e} m, "
              .format(**worst) + "{} verdict mismatches in {} cases".format(mismatched, cases))
    return CriterionResult(3, "range/Doppler solver", passed, detail, dt)


def criterion_zero_doppler(n_per_preset=30, seed=41):
    """Zero-Doppler solve: residual, dense-scan agreement, linear-orbit closed form."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_res = worst_scan = worst_lin = 0.0
    for i, preset in enumerate(PRESETS):
        scene = make_synthetic_scene(seed + i, preset, n_probes=n_per_preset)
        orbit = scene.truth_orbit.sampled(scene.t_coa - 40.0, scene.t_coa + 40.0, 1.0)
        for p in scene.probes.ground:
            sol = zd_inverse_map(orbit, p, eta_guess=scene.t_coa)
            worst_res = max(worst_res, abs(zd_doppler_residual(orbit, p, sol.eta)))
            worst_scan = max(worst_scan, abs(sol.eta - dense_scan_zero_doppler(orbit, p)))

    for _ in range(20):
        p0 = rng.normal(size=3)
        p0 *= 7.0e6 / np.linalg.norm(p0)
        v = np.cross(p0, rng.normal(size=3))
        v *= 7.5e3 / np.linalg.norm(v)
        times = np.arange(-100.0, 100.5, 1.0)
        orbit = Orbit(times, p0 + times[:, None] * v, np.broadcast_to(v, (times.size, 3)))
        target = llh_to_ecef(np.concatenate([ecef_to_llh(p0 + rng.uniform(-60.0, 60.0) * v)[:2],
                                             [rng.uniform(0.0, 500.0)]]))
        target = target + rng.normal(size=3) * 2e4
        closed = float((target - p0) @ v / (v @ v))
        sol = zd_inverse_map(orbit, target, eta_guess=0.0)
        worst_lin = max(worst_lin, abs(sol.eta - closed))
    dt = time.perf_counter() - t0
    passed = worst_res < 1e-12 and worst_scan < 1e-7 and worst_lin < 1e-9 and dt < 5.0
    detail = "residual {:.1e}, dense scan {:.1e} s, linear orbit {:.1e} s".format(worst_res, worst_scan, worst_lin)
    return CriterionResult(4, "zero-Doppler solver", passed, detail, dt)


def criterion_scanlines():
    """R and Rdot are exactly first order along every azimuth line, from one platform state."""
    t0 = time.perf_counter()
    worst = 0.0
    states_equal = True
    for i, preset in enumerate(PRESETS):
        scene = make_synthetic_scene(51 + i, preset, n_probes=1)
        model = PfaImageModel.from_meta(scene.meta)
        g = model.grid
        k = model.constants
        rg = (np.arange(g.rows) - g.scp_row) * g.row_spacing
        for col in range(g.cols):
            line = scanline_model(model.affine, k, (col - g.scp_col) * g.col_spacing)
            if not (np.array_equal(line.state.position, k.arp_pos) and np.array_equal(line.state.velocity, k.arp_vel)
                    and line.state.time == k.t_coa):
                states_equal = False
            for values in line.evaluate(rg):
                # ulps of the line's magnitude; values crossing zero have no meaningful local ulp
                d2 = values[2:] - 2.0 * values[1:-1] + values[:-2]
                worst = max(worst, float(np.max(np.abs(d2)) / np.spacing(np.max(np.abs(values)))))
    dt = time.perf_counter() - t0
    passed = worst <= 4 and states_equal
    detail = "max second difference {:.0f} ulp, platform state {}".format(
        worst, "identical on every line" if states_equal else "DIFFERS between lines")
    return CriterionResult(5, "scanline structure", passed, detail, dt)


def _resample_scene(shape=(400, 400), out_shape=(512, 512), seed=61, preset="mid-latitude-squint"):
    scene = make_synthetic_scene(seed, preset, shape=shape, spacing=(1.0, 1.0), n_probes=1)
    model = PfaImageModel.from_meta(scene.meta)
    zd = design_zd_grid(model, scene.ref_height, scene.orbit)
    if out_shape is not None:
        # a window of the designed spacing centered on the SCP
        scp = zd_inverse_map(zd.orbit, scene.meta.scp_ecef, eta_guess=scene.t_coa)
        zd = dataclasses.replace(zd, r0=scp.r - 0.5 * out_shape[0] * zd.dr, t0=scp.eta - 0.5 * out_shape[1] * zd.dt,
                                 rows=out_shape[0], lines=out_shape[1])
    return scene, model, zd


def criterion_resampler():
    """Ground round trip, constant preservation, impulse placement and runtime at 512 x 512."""
    scene, model, zd = _resample_scene()
    h = scene.ref_height
    shape = (model.grid.rows, model.grid.cols)
    value = np.complex64(3.25 - 1.5j)
    t0 = time.perf_counter()
    out, report = resample_pfa_to_zd(np.full(shape, value), model, zd, h)
    dt = time.perf_counter() - t0
    constant_ok = bool(np.all(out[report.valid] == value)) and report.valid_fraction > 0

    c = (int(model.grid.scp_row), int(model.grid.scp_col))
    impulses = [(c[0] - 40, c[1] - 25), c, (c[0] + 35, c[1] + 30)]
    src = np.zeros(shape, np.complex64)
    for rc in impulses:
        src[rc] = 1.0
    imp, _ = resample_pfa_to_zd(src, model, zd, h)
    worst_offset = 0.0
    for rc in impulses:
        sol = zd_inverse_map(zd.orbit, pfa_forward_map(model, rc, h), eta_guess=scene.t_coa)
        expect = zd.index_of(sol.r, sol.eta)
        r0, c0 = int(round(float(expect.row))), int(round(float(expect.col)))
        win = np.abs(imp[r0 - 4:r0 + 5, c0 - 4:c0 + 5])
        pr, pc = np.unravel_index(np.argmax(win), win.shape)
        offset = max(abs(r0 - 4 + pr - expect.row), abs(c0 - 4 + pc - expect.col))
        worst_offset = max(worst_offset, float(offset))
    passed = (report.max_ground_roundtrip_error < 0.01 and constant_ok and worst_offset <= 1.0 and dt < 10.0)
    detail = "round trip {:.1e} m, constant {}, impulse offset {:.2f} px, {}x{} output".format(
        report.max_ground_roundtrip_error, "exact" if constant_ok else "NOT preserved", worst_offset, *zd.shape)
    return CriterionResult(6, "zero-Doppler resampler", passed, detail, dt)


DOPPLER_CASES = ((0.0, 0.031, 0.0), (-155.0, 0.031, 10000.0), (120.0, 0.24, -1000.0))


def criterion_doppler():
    t0 = time.perf_counter()
    got = [float(rdot_to_doppler(rdot, lam)) for rdot, lam, _ in DOPPLER_CASES]
    passed = all(g == want for g, (_, _, want) in zip(got, DOPPLER_CASES))
    detail = ", ".join("{:g} m/s @ {:g} m -> {!r} Hz".format(r, lam, g) for (r, lam, _), g in zip(DOPPLER_CASES, got))
    return CriterionResult(7, "Doppler arithmetic", passed, detail, time.perf_counter() - t0)


def criterion_determinism(workers=4):
    """Geocode and resample outputs are byte-identical for one and many workers."""
    t0 = time.perf_counter()
    scene = make_synthetic_scene(71, "high-incidence", n_probes=1)
    model = PfaImageModel.from_meta(scene.meta)
    rows = np.arange(0, model.grid.rows, 5)
    cols = np.arange(0, model.grid.cols, 5)
    a = geocode_grid(model, scene.ref_height, rows, cols, n_jobs=1)
    b = geocode_grid(model, scene.ref_height, rows, cols, n_jobs=workers)
    geo_same = a[0].tobytes() == b[0].tobytes() and a[1].tobytes() == b[1].tobytes()

    _, rmodel, zd = _resample_scene(shape=(200, 200), out_shape=None, seed=72)
    src = (np.random.default_rng(73).normal(size=(200, 200, 2)) @ [1, 1j]).astype(np.complex64)
    x, _ = resample_pfa_to_zd(src, rmodel, zd, rmodel.grid.scp_height, n_jobs=1)
    y, _ = resample_pfa_to_zd(src, rmodel, zd, rmodel.grid.scp_height, n_jobs=workers)
    res_same = x.tobytes() == y.tobytes()
    detail = "geocode {}, resample {} (1 vs {} workers)".format(
        "identical" if geo_same else "DIFFERENT", "identical" if res_same else "DIFFERENT", workers)
    return CriterionResult(8, "determinism", geo_same and res_same, detail, time.perf_counter() - t0)


def run_selftest(perturb_a21=0.0, stream=None):
    """
    Run every acceptance check, printing one line each.

    Parameters
    ----------
    perturb_a21 : float
        Added to the range-rate/range-coordinate coefficient before the
        mapping check; any value of order 1e-2 must make the run fail.
    stream : file-like, optional
        Defaults to ``sys.stdout``.

    Returns
    -------
    (bool, list[CriterionResult])
    """

    stream = sys.stdout if stream is None else stream
    t0 = time.perf_counter()
    checks = [criterion_affine, lambda: criterion_forward_inverse(perturb_a21=perturb_a21), criterion_solver,
              criterion_zero_doppler, criterion_scanlines, criterion_resampler, criterion_doppler,
              criterion_determinism]
    results = []
    for check in checks:
        result = check()
        results.append(result)
        print(result.line(), file=stream, flush=True)
    total = time.perf_counter() - t0
    passed = all(r.passed for r in results)
    print("selftest {}: {}/{} criteria passed in {:.1f} s".format(
        "passed" if passed else "FAILED", sum(r.passed for r in results), len(results), total), file=stream)
    return passed, results


__all__ = ["CriterionResult", "run_selftest", "criterion_affine", "criterion_forward_inverse", "criterion_solver",
           "criterion_zero_doppler", "criterion_scanlines", "criterion_resampler", "criterion_doppler",
           "criterion_determinism", "DOPPLER_CASES"]
