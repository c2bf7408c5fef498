"""
Image-to-ground and ground-to-image mapping for constant-COA PFA images.

Forward mapping runs the affine model to get ``(R, Rdot)`` for a pixel and
hands it to the Native-Doppler solver together with the single platform
state of the image. Whole-grid forward mapping walks azimuth lines; on each
line ``R`` and ``Rdot`` are first-order in the range coordinate.

Inverse mapping needs no iteration at all: range and range rate of the
target follow from the shared platform state and the affine model is
inverted directly.
"""

from dataclasses import dataclass

import numpy as np

from ._parallel import map_blocks
from .pfa_model import (AffineModel, GridInfo, ImageIndex, PfaConstants, RangeDoppler, compute_affine,
                        coord_to_index, derive_pfa_constants, image_to_rrdot, index_to_coord, rrdot_to_image,
                        scanline_model)
from .rd_solver import OK, project_batch, raise_for_status

GEOCODE_BLOCK = 16


@dataclass(frozen=True, eq=False)
class PfaImageModel:
    """Everything needed to map between one PFA image and the ground."""

    constants: PfaConstants
    affine: AffineModel
    grid: GridInfo

    @classmethod
    def from_meta(cls, meta):
        k = derive_pfa_constants(meta)
        return cls(k, compute_affine(k), GridInfo.from_meta(meta))

    @property
    def state(self):
        return self.constants.state

    @property
    def look_side(self):
        return self.constants.look_side

    def with_affine(self, affine):
        return PfaImageModel(self.constants, affine, self.grid)


def target_rrdot(state, t):
    """Range and range rate from the platform ``state`` to ECEF target(s) ``t``."""
    los = state.position - np.asarray(t, dtype=np.float64)
    r = np.linalg.norm(los, axis=-1)
    rdot = np.sum(state.velocity * los, axis=-1) / r
    return RangeDoppler(r[()], rdot[()])


def pfa_forward_map_batch(model, index, surface):
    """Ground points of pixel indices; ``(points, status)`` without raising."""
    coord = index_to_coord(model.grid, index)
    rd = image_to_rrdot(model.affine, coord)
    state = model.state
    return project_batch(state.position, state.velocity, rd.r, rd.rdot, surface, model.look_side)


def pfa_forward_map(model, index, surface):
    """
    Ground point(s) of PFA pixel index(es).

    Parameters
    ----------
    model : PfaImageModel
    index : ImageIndex|tuple
        Fractional ``(row, col)``; scalars or broadcastable arrays.
    surface : float|DemRaster

    Returns
    -------
    numpy.ndarray
        ``(..., 3)`` ECEF points.
    """

    points, status = pfa_forward_map_batch(model, index, surface)
    raise_for_status(status)
    return points


def pfa_inverse_map(model, t):
    """Fractional pixel index of ECEF target(s) ``t``."""
    rd = target_rrdot(model.state, t)
    return coord_to_index(model.grid, rrdot_to_image(model.affine, rd))


def scanline_rrdot(model, rows, cols):
    """
    ``(R, Rdot)`` on the grid ``rows x cols`` built line by line.

    Returns two ``(len(rows), len(cols))`` arrays.
    """

    rows = np.asarray(rows, dtype=np.float64)
    cols = np.asarray(cols, dtype=np.float64)
    rg = index_to_coord(model.grid, (rows, model.grid.scp_col)).rg
    az = index_to_coord(model.grid, (model.grid.scp_row, cols)).az
    r = np.empty((rows.size, cols.size))
    rdot = np.empty((rows.size, cols.size))
    for j, a in enumerate(np.atleast_1d(az)):
        line = scanline_model(model.affine, model.constants, a)
        r[:, j], rdot[:, j] = line.evaluate(rg)
    return r, rdot


def geocode_grid(model, surface, rows=None, cols=None, n_jobs=None):
    """
    Forward-map a grid of pixels, azimuth line by azimuth line.

    Parameters
    ----------
    model : PfaImageModel
    surface : float|DemRaster
    rows, cols : array_like, optional
        Pixel indices to map; default every row/column of the image.
    n_jobs : int, optional
        Worker threads; results do not depend on it.

    Returns
    -------
    points : numpy.ndarray
        ``(len(rows), len(cols), 3)`` ECEF, NaN where the solve failed.
    status : numpy.ndarray
        ``(len(rows), len(cols))`` solver status codes.
    """

    rows = np.arange(model.grid.rows) if rows is None else np.asarray(rows)
    cols = np.arange(model.grid.cols) if cols is None else np.asarray(cols)
    state = model.state

    def work(a, b):
        r, rdot = scanline_rrdot(model, rows, cols[a:b])
        return project_batch(state.position, state.velocity, r, rdot, surface, model.look_side)

    parts = map_blocks(work, cols.size, GEOCODE_BLOCK, n_jobs)
    if not parts:
        return np.empty((rows.size, 0, 3)), np.empty((rows.size, 0), dtype=np.int64)
    points = np.concatenate([p for p, _ in parts], axis=1)
    status = np.concatenate([s for _, s in parts], axis=1)
    return points, status


__all__ = ["PfaImageModel", "target_rrdot", "pfa_forward_map", "pfa_forward_map_batch", "pfa_inverse_map",
           "scanline_rrdot", "geocode_grid", "ImageIndex", "OK"]
