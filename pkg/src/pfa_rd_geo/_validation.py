import math

import numpy as np
from sklearn.utils.validation import check_array

from .rd_solver import DemRaster
from .sicd_ingest import SicdMeta, load_meta


def check_meta(meta):
    """Accept a :class:`SicdMeta` or a path to one."""
    if isinstance(meta, SicdMeta):
        return meta
    if meta is None:
        raise ValueError("metadata is required")
    return load_meta(meta)


def check_points(X, n_features, what):
    """2-D float64 array with ``n_features`` columns; a single row may be given flat."""
    X = np.asarray(X, dtype=np.float64)
    if np.ndim(X) == 1:
        X = np.reshape(X, (1, -1))
    X = check_array(X, dtype=np.float64, ensure_all_finite=True)
    if X.shape[1] != n_features:
        raise ValueError("{} must have {} columns, got {}".format(what, n_features, X.shape[1]))
    return X


def check_surface(height, dem, default_height):
    """Resolve the projection surface: a DEM, a constant height or the default."""
    if dem is not None:
        if not isinstance(dem, DemRaster):
            raise TypeError("dem must be a DemRaster, got {}".format(type(dem).__name__))
        return dem
    h = default_height if height is None else float(height)
    if not math.isfinite(h):
        raise ValueError("height must be finite")
    return h
