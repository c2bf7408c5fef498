"""
Flat binary rasters with JSON header sidecars.

A raster ``name`` is stored as little-endian samples in ``name`` and a header
``name.json``::

    {"rows": 512, "cols": 512, "dtype": "complex64",
     "georef": {"lat0": ..., "lon0": ..., "dlat": ..., "dlon": ...},   (optional)
     "nodata": -32768.0}                                                 (optional)

Samples are row-major. DEMs are float rasters whose header carries ``georef``;
sample ``[i, j]`` sits at ``(lat0 + i * dlat, lon0 + j * dlon)``.
"""

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .rd_solver import DemRaster

DTYPES = {"float32": "<f4", "float64": "<f8", "complex64": "<c8"}


@dataclass(frozen=True)
class RasterHeader:
    rows: int
    cols: int
    dtype: str
    georef: Optional[dict] = None
    nodata: Optional[float] = None

    def __post_init__(self):
        if self.dtype not in DTYPES:
            raise ValueError("dtype must be one of {}, got {!r}".format(sorted(DTYPES), self.dtype))
        if int(self.rows) <= 0 or int(self.cols) <= 0:
            raise ValueError("raster dimensions must be positive")
        if self.georef is not None:
            missing = {"lat0", "lon0", "dlat", "dlon"} - set(self.georef)
            if missing:
                raise ValueError("georef lacks {}".format(sorted(missing)))

    def to_json(self):
        doc = {"rows": int(self.rows), "cols": int(self.cols), "dtype": self.dtype}
        if self.georef is not None:
            doc["georef"] = {k: float(self.georef[k]) for k in ("lat0", "lon0", "dlat", "dlon")}
        if self.nodata is not None:
            doc["nodata"] = float(self.nodata)
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        try:
            return cls(int(doc["rows"]), int(doc["cols"]), doc["dtype"], doc.get("georef"), doc.get("nodata"))
        except KeyError as exc:
            raise ValueError("raster header lacks {}".format(exc)) from None


def header_path(path):
    return str(path) + ".json"


def write_raster(path, array, dtype=None, georef=None, nodata=None):
    array = np.asarray(array)
    if array.ndim != 2:
        raise ValueError("only 2-D rasters can be written")
    if dtype is None:
        dtype = {np.dtype(np.float32): "float32", np.dtype(np.float64): "float64",
                 np.dtype(np.complex64): "complex64"}.get(array.dtype)
        if dtype is None:
            raise ValueError("cannot infer raster dtype from {}".format(array.dtype))
    header = RasterHeader(array.shape[0], array.shape[1], dtype, georef, nodata)
    with open(path, "wb") as fid:
        fid.write(np.ascontiguousarray(array, dtype=DTYPES[dtype]).tobytes())
    with open(header_path(path), "w") as fid:
        fid.write(header.to_json() + "\n")
    return header


def read_raster(path):
    with open(header_path(path)) as fid:
        header = RasterHeader.from_json(fid.read())
    data = np.fromfile(path, dtype=DTYPES[header.dtype])
    if data.size != header.rows * header.cols:
        raise ValueError("{} holds {} samples, header says {}x{}".format(path, data.size, header.rows, header.cols))
    return data.reshape(header.rows, header.cols), header


def read_dem(path):
    data, header = read_raster(path)
    if header.georef is None:
        raise ValueError("DEM header {} lacks georef".format(header_path(path)))
    if header.dtype == "complex64":
        raise ValueError("DEM must hold real heights")
    g = header.georef
    return DemRaster(data.astype(np.float64), g["lat0"], g["lon0"], g["dlat"], g["dlon"], header.nodata)


def write_dem(path, dem):
    return write_raster(path, dem.heights, "float64",
                        georef={"lat0": dem.lat0, "lon0": dem.lon0, "dlat": dem.dlat, "dlon": dem.dlon},
                        nodata=dem.nodata)
