"""
PFA to Zero-Doppler resampling.

Each output pixel of a zero-Doppler grid is forward-mapped to the ground at
the reference height of the source image, that ground point is inverse-mapped
into the PFA image, and the complex source is interpolated there. Bilinear
interpolation is applied to the real and imaginary parts separately; it keeps
geometry exact but is not phase-preserving for high-bandwidth data.
"""

from dataclasses import dataclass, field

import numpy as np

from ._parallel import map_blocks
from .errors import DesignError, GeometryError, ResampleError
from .pfa_model import ImageIndex
from .projection import pfa_forward_map_batch, pfa_inverse_map
from .rd_solver import OK
from .zd_model import ZeroDopplerGrid, zd_forward_map_batch, zd_inverse_map

GRID_MARGIN = 3
RESAMPLE_BLOCK = 16
MAX_FAILURE_FRACTION = 0.5
ROUNDTRIP_SAMPLES = 1024


@dataclass
class ResampleReport:
    valid_fraction: float
    max_ground_roundtrip_error: float
    solver_failures: int = 0
    valid: np.ndarray = field(default=None, repr=False)

    def as_dict(self):
        return {"valid_fraction": self.valid_fraction,
                "max_ground_roundtrip_error": self.max_ground_roundtrip_error,
                "solver_failures": self.solver_failures}


def check_complex_raster(src):
    """Validate a complex raster and return it as a 2-D ``complex64`` array."""
    arr = np.asarray(src)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("complex raster must be a non-empty 2-D array, got shape {}".format(arr.shape))
    return arr.astype(np.complex64, copy=False)


def interpolate_complex(src, at):
    """
    Bilinear interpolation of a complex raster at fractional indices.

    Real and imaginary parts are interpolated independently. Indices outside
    ``[0, rows - 1] x [0, cols - 1]`` (or non-finite) return NaN.

    Parameters
    ----------
    src : numpy.ndarray
        ``(rows, cols)`` complex array.
    at : ImageIndex|tuple
        ``(row, col)`` fractional indices.

    Returns
    -------
    numpy.ndarray
        complex128 samples.
    """

    row = np.asarray(at[0], dtype=np.float64)
    col = np.asarray(at[1], dtype=np.float64)
    row, col = np.broadcast_arrays(row, col)
    nr, nc = src.shape
    inside = (row >= 0) & (row <= nr - 1) & (col >= 0) & (col <= nc - 1)
    row_s = np.where(inside, row, 0.0)
    col_s = np.where(inside, col, 0.0)
    r0 = np.minimum(np.floor(row_s).astype(np.int64), nr - 1)
    c0 = np.minimum(np.floor(col_s).astype(np.int64), nc - 1)
    r1 = np.minimum(r0 + 1, nr - 1)
    c1 = np.minimum(c0 + 1, nc - 1)
    fr = row_s - r0
    fc = col_s - c0

    def lerp2(plane):
        top = plane[r0, c0] + fc * (plane[r0, c1] - plane[r0, c0])
        bot = plane[r1, c0] + fc * (plane[r1, c1] - plane[r1, c0])
        return top + fr * (bot - top)

    re = lerp2(src.real.astype(np.float64))
    im = lerp2(src.imag.astype(np.float64))
    out = np.where(inside, re + 1j * im, np.nan)
    return out[()]


def design_zd_grid(model, ref_height, orbit, margin=GRID_MARGIN):
    """
    Zero-Doppler grid covering a PFA image at the reference height.

    The four image corners are mapped to the ground and then to zero-Doppler
    ``(R, eta)``; the grid spans their bounding box plus ``margin`` pixels on
    every side. Range spacing is ``|a11| * row_spacing``; the line interval
    is the PFA azimuth spacing divided by the ground speed of the beam at the
    SCP's zero-Doppler time.

    Parameters
    ----------
    model : PfaImageModel
    ref_height : float
    orbit : Orbit

    Returns
    -------
    ZeroDopplerGrid

    Raises
    ------
    DesignError
        A corner cannot be mapped; the message lists the failing corners.
    """

    g = model.grid
    k = model.constants
    dr = abs(model.affine.a11) * g.row_spacing

    scp_ground, status = pfa_forward_map_batch(model, (g.scp_row, g.scp_col), ref_height)
    if status != OK:
        raise DesignError("the SCP cannot be projected to h={} m".format(ref_height))
    try:
        scp_zd = zd_inverse_map(orbit, scp_ground, eta_guess=k.t_coa)
    except GeometryError as exc:
        raise DesignError("SCP zero-Doppler time: {}".format(exc)) from exc
    sat_pos, sat_vel = orbit.interpolate(scp_zd.eta)
    ground_speed = np.linalg.norm(sat_vel) * np.linalg.norm(scp_ground) / np.linalg.norm(sat_pos)
    dt = g.col_spacing / ground_speed

    if g.rows == 1 and g.cols == 1:
        r_lo = r_hi = scp_zd.r
        t_lo = t_hi = scp_zd.eta
        margin = 0
    else:
        corners = g.corners()
        ground, status = pfa_forward_map_batch(model, corners, ref_height)
        failed = [(int(r), int(c)) for r, c, s in zip(corners.row, corners.col, status) if s != OK]
        rt = []
        for (r, c), p, s in zip(zip(corners.row, corners.col), ground, status):
            if s != OK:
                continue
            try:
                rt.append(zd_inverse_map(orbit, p, eta_guess=scp_zd.eta))
            except GeometryError:
                failed.append((int(r), int(c)))
        if failed:
            raise DesignError("corners {} cannot be mapped to zero-Doppler coordinates".format(sorted(failed)))
        r_lo = min(s.r for s in rt)
        r_hi = max(s.r for s in rt)
        t_lo = min(s.eta for s in rt)
        t_hi = max(s.eta for s in rt)

    rows = int(np.ceil((r_hi - r_lo) / dr)) + 1 + 2 * margin
    lines = int(np.ceil((t_hi - t_lo) / dt)) + 1 + 2 * margin
    try:
        return ZeroDopplerGrid(r0=r_lo - margin * dr, dr=dr, t0=t_lo - margin * dt, dt=dt, rows=rows,
                               lines=lines, orbit=orbit, wavelength=k.wavelength, look_side=k.look_side)
    except ValueError as exc:
        raise DesignError(str(exc)) from exc


def zd_to_pfa_index(model, zd, ref_height, rows=None, lines=None):
    """
    Chain zero-Doppler pixels through the ground into the PFA image.

    Returns
    -------
    ground : numpy.ndarray
        ``(len(rows), len(lines), 3)`` ECEF at ``ref_height``; NaN on solver failure.
    index : ImageIndex
        Fractional PFA ``(row, col)``, NaN on solver failure.
    status : numpy.ndarray
    """

    rows = np.arange(zd.rows) if rows is None else np.asarray(rows)
    lines = np.arange(zd.lines) if lines is None else np.asarray(lines)
    rr, ll = np.meshgrid(rows, lines, indexing="ij")
    ground, status = zd_forward_map_batch(zd, (rr, ll), ref_height)
    index = pfa_inverse_map(model, ground)
    return ground, ImageIndex(np.asarray(index.row), np.asarray(index.col)), status


def resample_pfa_to_zd(src, model, zd, ref_height, n_jobs=None):
    """
    Resample a PFA image onto a zero-Doppler grid.

    Parameters
    ----------
    src : numpy.ndarray
        ``(rows, cols)`` complex PFA image matching ``model.grid``.
    model : PfaImageModel
    zd : ZeroDopplerGrid
    ref_height : float
        Height above the ellipsoid of the surface both mappings share.
    n_jobs : int, optional
        Worker threads over blocks of azimuth lines; the output does not
        depend on it.

    Returns
    -------
    (numpy.ndarray, ResampleReport)
        ``(zd.rows, zd.lines)`` complex64 image, zero outside the valid mask.
    """

    src = check_complex_raster(src)
    if src.shape != (model.grid.rows, model.grid.cols):
        raise ValueError("source raster shape {} does not match the image metadata {}".format(
            src.shape, (model.grid.rows, model.grid.cols)))

    def work(a, b):
        ground, index, status = zd_to_pfa_index(model, zd, ref_height, lines=np.arange(a, b))
        values = interpolate_complex(src, index)
        valid = (status == OK) & np.isfinite(values)
        return np.where(valid, values, 0).astype(np.complex64), valid, status, ground, index

    parts = map_blocks(work, zd.lines, RESAMPLE_BLOCK, n_jobs)
    out = np.concatenate([p[0] for p in parts], axis=1)
    valid = np.concatenate([p[1] for p in parts], axis=1)
    status = np.concatenate([p[2] for p in parts], axis=1)
    failures = int(np.count_nonzero(status != OK))
    if failures > MAX_FAILURE_FRACTION * status.size:
        raise ResampleError("{} of {} output pixels could not be projected".format(failures, status.size))

    ground = np.concatenate([p[3] for p in parts], axis=1)
    frow = np.concatenate([p[4].row for p in parts], axis=1)
    fcol = np.concatenate([p[4].col for p in parts], axis=1)
    flat = np.flatnonzero(valid)
    if flat.size:
        pick = flat[np.linspace(0, flat.size - 1, min(ROUNDTRIP_SAMPLES, flat.size)).astype(np.int64)]
        back, back_status = pfa_forward_map_batch(
            model, (frow.reshape(-1)[pick], fcol.reshape(-1)[pick]), ref_height)
        err = np.linalg.norm(back - ground.reshape(-1, 3)[pick], axis=-1)
        max_err = float(np.nanmax(err)) if np.any(back_status == OK) else float("nan")
    else:
        max_err = float("nan")
    report = ResampleReport(valid_fraction=float(valid.mean()), max_ground_roundtrip_error=max_err,
                            solver_failures=failures, valid=valid)
    return out, report
