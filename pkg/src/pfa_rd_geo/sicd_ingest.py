"""
Reader for the subset of SICD metadata that the constant-COA PFA geometry needs.

Two sources are understood: a standalone SICD XML document (namespaces are
ignored, only local element names matter) and a flat JSON sidecar whose
schema is::

    {
      "scp_ecef": [x, y, z],
      "scp_llh": [lat, lon, hae],
      "scp_pixel": [row, col],
      "shape": [rows, cols],
      "spacing": [row_ss, col_ss],
      "time_coa_poly": [[c00, c01, ...], [c10, ...], ...],
      "polar_ang_poly": [c0, c1, ...],
      "spatial_freq_sf_poly": [c0, c1, ...],
      "arp_poly": {"x": [...], "y": [...], "z": [...]},
      "coa_state": {"pos": [x, y, z], "vel": [vx, vy, vz]},   (optional)
      "center_frequency_hz": f,
      "side_of_track": "L" | "R",
      "collect_start": "2024-01-01T00:00:00Z"                 (optional)
    }

``time_coa_poly[i][j]`` multiplies ``rg**i * az**j``.
"""

import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import MetadataError, UnsupportedFormatError
from .geodesy import SPEED_OF_LIGHT, Polynomial1D, llh_to_ecef

__all__ = ["SicdMeta", "parse_sicd_xml", "parse_meta_json", "meta_to_json", "load_meta"]


def _vec3(value, name):
    try:
        v = tuple(float(x) for x in value)
    except (TypeError, ValueError):
        raise MetadataError("{} must be a list of 3 numbers".format(name), path=name) from None
    if len(v) != 3:
        raise MetadataError("{} must have 3 components, got {}".format(name, len(v)), path=name)
    return v


@dataclass(frozen=True)
class SicdMeta:
    scp_ecef: tuple
    scp_llh: tuple
    scp_row: float
    scp_col: float
    rows: int
    cols: int
    row_spacing: float
    col_spacing: float
    time_coa_poly: tuple
    polar_ang_poly: Polynomial1D
    spatial_freq_sf_poly: Polynomial1D
    arp_poly: tuple
    center_frequency: float
    side_of_track: str
    coa_arp_pos: Optional[tuple] = None
    coa_arp_vel: Optional[tuple] = None
    collect_start: Optional[str] = field(default=None)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "scp_ecef", _vec3(self.scp_ecef, "scp_ecef"))
        set_(self, "scp_llh", _vec3(self.scp_llh, "scp_llh"))
        set_(self, "rows", int(self.rows))
        set_(self, "cols", int(self.cols))
        for name in ("scp_row", "scp_col", "row_spacing", "col_spacing", "center_frequency"):
            set_(self, name, float(getattr(self, name)))
        if self.rows <= 0 or self.cols <= 0:
            raise MetadataError("image dimensions must be positive", path="ImageData/NumRows")
        if not (self.row_spacing > 0 and self.col_spacing > 0):
            raise MetadataError("sample spacings must be positive", path="Grid/Row/SS")
        if not self.center_frequency > 0:
            raise MetadataError("center frequency must be positive", path="RadarCollection/TxFrequency")
        side = str(self.side_of_track).upper()[:1]
        if side not in ("L", "R"):
            raise MetadataError("side_of_track must be L or R, got {!r}".format(self.side_of_track),
                                path="SCPCOA/SideOfTrack")
        set_(self, "side_of_track", side)

        tcoa = np.atleast_2d(np.asarray(self.time_coa_poly, dtype=np.float64))
        if tcoa.size == 0 or tcoa.ndim != 2:
            raise MetadataError("time_coa_poly must be a non-empty 2-D array", path="Grid/TimeCOAPoly")
        set_(self, "time_coa_poly", tuple(tuple(float(c) for c in row) for row in tcoa))
        for name in ("polar_ang_poly", "spatial_freq_sf_poly"):
            value = getattr(self, name)
            if not isinstance(value, Polynomial1D):
                set_(self, name, Polynomial1D(tuple(value)))
        arp = tuple(p if isinstance(p, Polynomial1D) else Polynomial1D(tuple(p)) for p in self.arp_poly)
        if len(arp) != 3:
            raise MetadataError("arp_poly needs x, y and z polynomials", path="Position/ARPPoly")
        set_(self, "arp_poly", arp)
        if (self.coa_arp_pos is None) != (self.coa_arp_vel is None):
            raise MetadataError("COA position and velocity must be given together", path="SCPCOA/ARPVel")
        if self.coa_arp_pos is not None:
            set_(self, "coa_arp_pos", _vec3(self.coa_arp_pos, "coa_arp_pos"))
            set_(self, "coa_arp_vel", _vec3(self.coa_arp_vel, "coa_arp_vel"))

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.center_frequency

    def scp_mismatch(self):
        """Distance in meters between ``scp_ecef`` and ``scp_llh`` converted to ECEF."""
        return float(np.linalg.norm(llh_to_ecef(self.scp_llh) - np.asarray(self.scp_ecef)))


#############
# XML

def _strip_namespaces(root):
    for el in root.iter():
        if isinstance(el.tag, str) and "}" in el.tag:
            el.tag = el.tag.split("}", 1)[1]
    return root


def _node(root, path, required=True):
    node = root.find(path)
    if node is None and required:
        raise MetadataError("missing required element {}".format(path), path=path)
    return node


def _float(root, path, required=True):
    node = _node(root, path, required)
    if node is None:
        return None
    try:
        return float(node.text)
    except (TypeError, ValueError):
        raise MetadataError("element {} is not a number: {!r}".format(path, node.text), path=path) from None


def _xyz(root, path, required=True):
    node = _node(root, path, required)
    if node is None:
        return None
    return tuple(_float(node, c) for c in ("X", "Y", "Z"))


def _poly1d(root, path):
    node = _node(root, path)
    coefs = {}
    for c in node.findall("Coef"):
        try:
            coefs[int(c.get("exponent1"))] = float(c.text)
        except (TypeError, ValueError):
            raise MetadataError("bad coefficient in {}".format(path), path=path) from None
    if not coefs:
        raise MetadataError("polynomial {} has no coefficients".format(path), path=path)
    out = [0.0] * (max(coefs) + 1)
    for k, v in coefs.items():
        out[k] = v
    return Polynomial1D(tuple(out))


def _poly2d(root, path):
    node = _node(root, path)
    coefs = {}
    for c in node.findall("Coef"):
        try:
            coefs[(int(c.get("exponent1")), int(c.get("exponent2")))] = float(c.text)
        except (TypeError, ValueError):
            raise MetadataError("bad coefficient in {}".format(path), path=path) from None
    if not coefs:
        raise MetadataError("polynomial {} has no coefficients".format(path), path=path)
    n1 = max(k[0] for k in coefs) + 1
    n2 = max(k[1] for k in coefs) + 1
    out = np.zeros((n1, n2))
    for (i, j), v in coefs.items():
        out[i, j] = v
    return tuple(tuple(row) for row in out.tolist())


def _text(root, path, required=True):
    node = _node(root, path, required)
    return None if node is None else (node.text or "").strip()


def parse_sicd_xml(text):
    """
    Parse a SICD XML document into :class:`SicdMeta`.

    Parameters
    ----------
    text : str|bytes

    Returns
    -------
    SicdMeta

    Raises
    ------
    MetadataError
        A mandatory element is missing; the message names its path.
    UnsupportedFormatError
        The image was not formed with PFA.
    """

    try:
        root = _strip_namespaces(ET.fromstring(text))
    except ET.ParseError as exc:
        raise MetadataError("malformed XML: {}".format(exc)) from None

    algo = _text(root, "ImageFormation/ImageFormAlgo", required=False)
    if algo is not None and algo.upper() != "PFA":
        raise UnsupportedFormatError("image formed with {}, only PFA is supported".format(algo),
                                     path="ImageFormation/ImageFormAlgo")
    grid_type = _text(root, "Grid/Type", required=False)
    if grid_type is not None and grid_type.upper() != "RGAZIM":
        raise UnsupportedFormatError("grid type {} is not a PFA range/azimuth grid".format(grid_type),
                                     path="Grid/Type")
    if root.find("PFA") is None:
        raise UnsupportedFormatError("no PFA block: image is not polar-format", path="PFA")

    first_row = _float(root, "ImageData/FirstRow", required=False) or 0.0
    first_col = _float(root, "ImageData/FirstCol", required=False) or 0.0

    tx_min = _float(root, "ImageFormation/TxFrequencyProc/MinProc", required=False)
    tx_max = _float(root, "ImageFormation/TxFrequencyProc/MaxProc", required=False)
    if tx_min is None or tx_max is None:
        tx_min = _float(root, "RadarCollection/TxFrequency/Min")
        tx_max = _float(root, "RadarCollection/TxFrequency/Max")

    coa_pos = _xyz(root, "SCPCOA/ARPPos", required=False)
    coa_vel = _xyz(root, "SCPCOA/ARPVel", required=False)
    if coa_pos is None or coa_vel is None:
        coa_pos = coa_vel = None

    scp_llh = _node(root, "GeoData/SCP/LLH")
    return SicdMeta(
        scp_ecef=_xyz(root, "GeoData/SCP/ECF"),
        scp_llh=(_float(scp_llh, "Lat"), _float(scp_llh, "Lon"), _float(scp_llh, "HAE")),
        scp_row=_float(root, "ImageData/SCPPixel/Row") - first_row,
        scp_col=_float(root, "ImageData/SCPPixel/Col") - first_col,
        rows=int(_float(root, "ImageData/NumRows")),
        cols=int(_float(root, "ImageData/NumCols")),
        row_spacing=_float(root, "Grid/Row/SS"),
        col_spacing=_float(root, "Grid/Col/SS"),
        time_coa_poly=_poly2d(root, "Grid/TimeCOAPoly"),
        polar_ang_poly=_poly1d(root, "PFA/PolarAngPoly"),
        spatial_freq_sf_poly=_poly1d(root, "PFA/SpatialFreqSFPoly"),
        arp_poly=tuple(_poly1d(root, "Position/ARPPoly/" + c) for c in ("X", "Y", "Z")),
        center_frequency=0.5 * (tx_min + tx_max),
        side_of_track=_text(root, "SCPCOA/SideOfTrack"),
        coa_arp_pos=coa_pos,
        coa_arp_vel=coa_vel,
        collect_start=_text(root, "Timeline/CollectStart", required=False),
    )


#############
# JSON sidecar

_REQUIRED_KEYS = ("scp_ecef", "scp_llh", "scp_pixel", "shape", "spacing", "time_coa_poly",
                  "polar_ang_poly", "spatial_freq_sf_poly", "arp_poly", "center_frequency_hz",
                  "side_of_track")


def meta_to_json(meta: SicdMeta, indent=2) -> str:
    doc = {
        "scp_ecef": list(meta.scp_ecef),
        "scp_llh": list(meta.scp_llh),
        "scp_pixel": [meta.scp_row, meta.scp_col],
        "shape": [meta.rows, meta.cols],
        "spacing": [meta.row_spacing, meta.col_spacing],
        "time_coa_poly": [list(r) for r in meta.time_coa_poly],
        "polar_ang_poly": list(meta.polar_ang_poly.coefficients),
        "spatial_freq_sf_poly": list(meta.spatial_freq_sf_poly.coefficients),
        "arp_poly": {k: list(p.coefficients) for k, p in zip("xyz", meta.arp_poly)},
        "center_frequency_hz": meta.center_frequency,
        "side_of_track": meta.side_of_track,
    }
    if meta.coa_arp_pos is not None:
        doc["coa_state"] = {"pos": list(meta.coa_arp_pos), "vel": list(meta.coa_arp_vel)}
    if meta.collect_start is not None:
        doc["collect_start"] = meta.collect_start
    # json writes floats with repr, which round-trips all 17 significant digits
    return json.dumps(doc, indent=indent)


def _numbers(value, key, length=None):
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                              for v in value):
        raise MetadataError("{} must be a list of numbers".format(key), path=key)
    if length is not None and len(value) != length:
        raise MetadataError("{} must have {} entries, got {}".format(key, length, len(value)), path=key)
    if not value:
        raise MetadataError("{} must not be empty".format(key), path=key)
    if not all(math.isfinite(v) for v in value):
        raise MetadataError("{} must be finite".format(key), path=key)
    return value


def parse_meta_json(text) -> SicdMeta:
    """Parse the JSON sidecar format; schema violations name the offending key."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MetadataError("invalid JSON: {}".format(exc)) from None
    if not isinstance(doc, dict) or not doc:
        raise MetadataError("metadata document must be a non-empty JSON object")
    for key in _REQUIRED_KEYS:
        if key not in doc:
            raise MetadataError("missing required key {!r}".format(key), path=key)

    tcoa = doc["time_coa_poly"]
    if not isinstance(tcoa, list) or not tcoa:
        raise MetadataError("time_coa_poly must be a non-empty 2-D list", path="time_coa_poly")
    rows = [_numbers(r, "time_coa_poly") for r in tcoa]
    if len({len(r) for r in rows}) != 1:
        raise MetadataError("time_coa_poly rows differ in length", path="time_coa_poly")

    arp = doc["arp_poly"]
    if not isinstance(arp, dict) or set(arp) != {"x", "y", "z"}:
        raise MetadataError("arp_poly must be an object with keys x, y, z", path="arp_poly")

    coa = doc.get("coa_state")
    if coa is not None:
        if not isinstance(coa, dict) or "pos" not in coa or "vel" not in coa:
            raise MetadataError("coa_state must have pos and vel", path="coa_state")
        coa_pos = _numbers(coa["pos"], "coa_state.pos", 3)
        coa_vel = _numbers(coa["vel"], "coa_state.vel", 3)
    else:
        coa_pos = coa_vel = None

    scp_pixel = _numbers(doc["scp_pixel"], "scp_pixel", 2)
    shape = _numbers(doc["shape"], "shape", 2)
    spacing = _numbers(doc["spacing"], "spacing", 2)
    freq = doc["center_frequency_hz"]
    if not isinstance(freq, (int, float)) or isinstance(freq, bool):
        raise MetadataError("center_frequency_hz must be a number", path="center_frequency_hz")
    if any(int(s) != s for s in shape):
        raise MetadataError("shape must hold integers", path="shape")
    return SicdMeta(
        scp_ecef=_numbers(doc["scp_ecef"], "scp_ecef", 3),
        scp_llh=_numbers(doc["scp_llh"], "scp_llh", 3),
        scp_row=scp_pixel[0],
        scp_col=scp_pixel[1],
        rows=int(shape[0]),
        cols=int(shape[1]),
        row_spacing=spacing[0],
        col_spacing=spacing[1],
        time_coa_poly=rows,
        polar_ang_poly=_numbers(doc["polar_ang_poly"], "polar_ang_poly"),
        spatial_freq_sf_poly=_numbers(doc["spatial_freq_sf_poly"], "spatial_freq_sf_poly"),
        arp_poly=tuple(_numbers(arp[k], "arp_poly." + k) for k in "xyz"),
        center_frequency=freq,
        side_of_track=doc["side_of_track"],
        coa_arp_pos=coa_pos,
        coa_arp_vel=coa_vel,
        collect_start=doc.get("collect_start"),
    )


def load_meta(path) -> SicdMeta:
    """Read either format from disk, sniffing the first non-blank character."""
    with open(path, "rb") as fid:
        raw = fid.read()
    head = raw.lstrip()[:1]
    if head == b"{":
        return parse_meta_json(raw.decode("utf-8"))
    if head == b"<":
        return parse_sicd_xml(raw)
    raise MetadataError("{}: neither SICD XML nor JSON metadata".format(path))
