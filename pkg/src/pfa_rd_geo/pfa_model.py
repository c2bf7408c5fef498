"""
Constant-COA-time polar format image geometry.

When every pixel of a spotlight PFA image shares one center-of-aperture
time, the platform state, the SCP range and range rate, the polar angle,
its time derivative, the scale factor KSF and its angular derivative are
all single numbers for the whole image. Image coordinates ``(rg, az)``
(meters relative to the SCP) then map to slant range and range rate by one
affine transform::

    R    = R_scp    + a11 * rg + a12 * az
    Rdot = Rdot_scp + a21 * rg + a22 * az

with ``a11 = KSF cos(theta)``, ``a12 = KSF sin(theta)``,
``a21 = (dKSF/dtheta cos(theta) - KSF sin(theta)) dtheta/dt`` and
``a22 = (dKSF/dtheta sin(theta) + KSF cos(theta)) dtheta/dt``.
"""

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateGeometryError, MetadataError, OutOfModelError, UnsupportedGeometryError
from .geodesy import SPEED_OF_LIGHT, StateVector, height_above_ellipsoid, poly_derivative, poly_eval

TCOA_CONSTANCY_TOL = 1e-9
DET_REL_TOL = 1e-12
COA_POS_TOL = 1.0
COA_VEL_TOL = 1e-3

LEFT = "L"
RIGHT = "R"


class MetadataConsistencyWarning(UserWarning):
    pass


class ImageCoord(NamedTuple):
    """Range and azimuth image coordinates in meters relative to the SCP."""

    rg: object
    az: object


class ImageIndex(NamedTuple):
    """Fractional pixel position; ``row`` runs in range, ``col`` in azimuth."""

    row: object
    col: object


class RangeDoppler(NamedTuple):
    r: object
    rdot: object


@dataclass(frozen=True, eq=False)
class PfaConstants:
    """Geometry constants of a constant-COA-time PFA image."""

    arp_pos: np.ndarray
    arp_vel: np.ndarray
    r_scp: float
    rdot_scp: float
    theta_coa: float
    dtheta_dt: float
    ksf: float
    dksf_dtheta: float
    t_coa: float
    wavelength: float
    look_side: str
    scp: np.ndarray = None

    def __post_init__(self):
        for name in ("arp_pos", "arp_vel", "scp"):
            value = getattr(self, name)
            if value is None:
                continue
            arr = np.array(value, dtype=np.float64).reshape(3)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not self.r_scp > 0:
            raise ValueError("r_scp must be positive")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if not np.linalg.norm(self.arp_vel) > 0:
            raise ValueError("platform velocity must be nonzero")
        if self.look_side not in (LEFT, RIGHT):
            raise ValueError("look_side must be 'L' or 'R'")

    @property
    def state(self):
        """Platform state shared by every pixel."""
        return StateVector(self.t_coa, self.arp_pos, self.arp_vel)

    def as_dict(self):
        return {
            "t_coa": self.t_coa,
            "arp_pos": self.arp_pos.tolist(),
            "arp_vel": self.arp_vel.tolist(),
            "r_scp": self.r_scp,
            "rdot_scp": self.rdot_scp,
            "theta_coa": self.theta_coa,
            "dtheta_dt": self.dtheta_dt,
            "ksf": self.ksf,
            "dksf_dtheta": self.dksf_dtheta,
            "wavelength": self.wavelength,
            "look_side": self.look_side,
        }


@dataclass(frozen=True)
class AffineModel:
    a11: float
    a12: float
    a21: float
    a22: float
    r_scp: float
    rdot_scp: float

    @property
    def matrix(self):
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    @property
    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a21

    def is_degenerate(self):
        scale = max(abs(self.a11), abs(self.a12), abs(self.a21), abs(self.a22))
        return not abs(self.det) > DET_REL_TOL * scale * scale


@dataclass(frozen=True)
class ScanlineModel:
    """R and Rdot along one azimuth line, as first-order polynomials in ``rg``."""

    r0: float
    dr: float
    rdot0: float
    drdot: float
    state: StateVector

    def evaluate(self, rg):
        rg = np.asarray(rg, dtype=np.float64)
        return RangeDoppler(self.r0 + self.dr * rg, self.rdot0 + self.drdot * rg)


@dataclass(frozen=True)
class GridInfo:
    scp_row: float
    scp_col: float
    row_spacing: float
    col_spacing: float
    rows: int
    cols: int
    scp_ecef: tuple
    scp_height: float

    def __post_init__(self):
        if not (self.row_spacing > 0 and self.col_spacing > 0):
            raise ValueError("pixel spacings must be positive")

    @classmethod
    def from_meta(cls, meta):
        return cls(meta.scp_row, meta.scp_col, meta.row_spacing, meta.col_spacing, meta.rows, meta.cols,
                   tuple(meta.scp_ecef), float(height_above_ellipsoid(meta.scp_ecef)))

    def corners(self):
        """Index of the four outermost pixels, clockwise from (0, 0)."""
        last_r, last_c = self.rows - 1, self.cols - 1
        return ImageIndex(np.array([0.0, 0.0, last_r, last_r]), np.array([0.0, last_c, last_c, 0.0]))


def tcoa_variation(meta):
    """
    Largest COA-time excursion across the image, in seconds.

    Each non-constant coefficient ``c[i][j]`` is scaled by ``rg_max**i *
    az_max**j``, the largest coordinate magnitudes inside the image.
    """

    coefs = np.asarray(meta.time_coa_poly, dtype=np.float64)
    rg_max = max(meta.scp_row, meta.rows - 1 - meta.scp_row, 1.0) * meta.row_spacing
    az_max = max(meta.scp_col, meta.cols - 1 - meta.scp_col, 1.0) * meta.col_spacing
    i, j = np.indices(coefs.shape)
    scaled = np.abs(coefs) * rg_max ** i * az_max ** j
    scaled[0, 0] = 0.0
    return float(scaled.max())


def validate_constant_tcoa(meta, tol=TCOA_CONSTANCY_TOL):
    """
    Return the COA time if the TimeCOA polynomial is constant over the image.

    Raises
    ------
    UnsupportedGeometryError
        The scaled variation from :func:`tcoa_variation` exceeds ``tol``.
    """

    worst = tcoa_variation(meta)
    if worst > tol:
        raise UnsupportedGeometryError(
            "COA time varies by up to {:.3g} s across the image; only constant-COA images are "
            "supported".format(worst), path="Grid/TimeCOAPoly")
    return float(meta.time_coa_poly[0][0])


def derive_pfa_constants(meta):
    """
    Evaluate the per-image geometry constants from SICD metadata.

    Explicit SCPCOA position/velocity take precedence over the ARP
    polynomial; a disagreement beyond 1 m or 1 mm/s raises a
    :class:`MetadataConsistencyWarning`.

    Parameters
    ----------
    meta : SicdMeta

    Returns
    -------
    PfaConstants
    """

    if meta.polar_ang_poly is None:
        raise MetadataError("missing PFA/PolarAngPoly", path="PFA/PolarAngPoly")
    if meta.spatial_freq_sf_poly is None:
        raise MetadataError("missing PFA/SpatialFreqSFPoly", path="PFA/SpatialFreqSFPoly")
    t_coa = validate_constant_tcoa(meta)

    theta = poly_eval(meta.polar_ang_poly, t_coa)
    dtheta = poly_eval(poly_derivative(meta.polar_ang_poly), t_coa)
    ksf = poly_eval(meta.spatial_freq_sf_poly, theta)
    dksf = poly_eval(poly_derivative(meta.spatial_freq_sf_poly), theta)

    poly_pos = np.array([poly_eval(p, t_coa) for p in meta.arp_poly])
    poly_vel = np.array([poly_eval(poly_derivative(p), t_coa) for p in meta.arp_poly])
    if meta.coa_arp_pos is not None:
        arp = np.array(meta.coa_arp_pos)
        varp = np.array(meta.coa_arp_vel)
        dpos = np.linalg.norm(arp - poly_pos)
        dvel = np.linalg.norm(varp - poly_vel)
        if dpos > COA_POS_TOL or dvel > COA_VEL_TOL:
            warnings.warn("SCPCOA state disagrees with ARPPoly at t_COA by {:.3g} m / {:.3g} m/s; "
                          "using SCPCOA".format(dpos, dvel), MetadataConsistencyWarning, stacklevel=2)
    else:
        arp, varp = poly_pos, poly_vel

    scp = np.array(meta.scp_ecef)
    los = arp - scp
    r_scp = float(np.linalg.norm(los))
    rdot_scp = float(np.dot(varp, los) / r_scp)
    return PfaConstants(
        arp_pos=arp, arp_vel=varp, r_scp=r_scp, rdot_scp=rdot_scp,
        theta_coa=theta, dtheta_dt=dtheta, ksf=ksf, dksf_dtheta=dksf, t_coa=t_coa,
        wavelength=SPEED_OF_LIGHT / meta.center_frequency, look_side=meta.side_of_track, scp=scp)


def compute_affine(k):
    """Build the image-to-(R, Rdot) matrix from the geometry constants."""
    c = math.cos(k.theta_coa)
    s = math.sin(k.theta_coa)
    m = AffineModel(
        a11=k.ksf * c,
        a12=k.ksf * s,
        a21=(k.dksf_dtheta * c - k.ksf * s) * k.dtheta_dt,
        a22=(k.dksf_dtheta * s + k.ksf * c) * k.dtheta_dt,
        r_scp=k.r_scp,
        rdot_scp=k.rdot_scp,
    )
    if m.is_degenerate():
        raise DegenerateGeometryError("image-to-(R, Rdot) matrix is singular (det={:.3g})".format(m.det))
    return m


def image_to_rrdot(m, c):
    """
    Slant range and range rate at image coordinate(s) ``c``.

    Evaluated in the same order as :func:`scanline_model` so both paths
    agree bit-for-bit.
    """

    rg = np.asarray(c[0], dtype=np.float64)
    az = np.asarray(c[1], dtype=np.float64)
    r = (m.r_scp + m.a12 * az) + m.a11 * rg
    rdot = (m.rdot_scp + m.a22 * az) + m.a21 * rg
    if np.any(r <= 0):
        raise OutOfModelError("image coordinate maps to non-positive slant range")
    return RangeDoppler(r[()], rdot[()])


def rrdot_to_image(m, rd):
    """Invert the affine model: ``(R, Rdot)`` to image coordinates in meters."""
    if m.is_degenerate():
        raise DegenerateGeometryError("image-to-(R, Rdot) matrix is singular (det={:.3g})".format(m.det))
    dr = np.asarray(rd[0], dtype=np.float64) - m.r_scp
    dd = np.asarray(rd[1], dtype=np.float64) - m.rdot_scp
    det = m.det
    rg = (m.a22 * dr - m.a12 * dd) / det
    az = (m.a11 * dd - m.a21 * dr) / det
    return ImageCoord(rg[()], az[()])


def scanline_model(m, k, az):
    """R/Rdot polynomials for the azimuth line at ``az`` meters."""
    return ScanlineModel(
        r0=m.r_scp + m.a12 * az,
        dr=m.a11,
        rdot0=m.rdot_scp + m.a22 * az,
        drdot=m.a21,
        state=k.state,
    )


def rdot_to_doppler(rdot, wavelength):
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    # written as a subtraction from +0 so that zero range rate gives +0 Hz, not -0
    return (0.0 - 2.0 * np.asarray(rdot, dtype=np.float64)) / wavelength


def index_to_coord(g, i):
    row = np.asarray(i[0], dtype=np.float64)
    col = np.asarray(i[1], dtype=np.float64)
    return ImageCoord(((row - g.scp_row) * g.row_spacing)[()], ((col - g.scp_col) * g.col_spacing)[()])


def coord_to_index(g, c):
    rg = np.asarray(c[0], dtype=np.float64)
    az = np.asarray(c[1], dtype=np.float64)
    return ImageIndex((rg / g.row_spacing + g.scp_row)[()], (az / g.col_spacing + g.scp_col)[()])
