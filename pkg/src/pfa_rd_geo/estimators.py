"""
Estimator-style front end.

:class:`PfaGeometry` maps PFA pixels to the ground (``transform``) and back
(``inverse_transform``); :class:`ZeroDopplerResampler` turns a complex PFA
image into a zero-Doppler image. Both follow the scikit-learn conventions:
hyper-parameters are stored verbatim by ``__init__``, ``fit`` derives the
image model from the metadata and sets trailing-underscore attributes, and
``get_params``/``set_params``/``clone`` work as usual.

Examples
--------
>>> geo = PfaGeometry(meta, height=0.0).fit()               # doctest: +SKIP
>>> llh = geo.transform([[100.0, 250.5], [0.0, 0.0]])        # doctest: +SKIP
>>> pixels = geo.inverse_transform(llh)                      # doctest: +SKIP
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_meta, check_points, check_surface
from .geodesy import ecef_to_llh, llh_to_ecef
from .projection import PfaImageModel, geocode_grid, pfa_forward_map_batch, pfa_inverse_map
from .rd_solver import OK, raise_for_status
from .resampler import check_complex_raster, design_zd_grid, resample_pfa_to_zd
from .zd_model import orbit_from_meta

_OUTPUTS = ("llh", "ecef")


class PfaGeometry(TransformerMixin, BaseEstimator):
    """
    Forward and inverse geometry of a constant-COA PFA image.

    Parameters
    ----------
    meta : SicdMeta|str
        Image metadata, or a path to a SICD XML or JSON sidecar.
    height : float, optional
        Constant surface height above the ellipsoid. Defaults to the SCP
        height. Ignored when ``dem`` is given.
    dem : DemRaster, optional
        Terrain to intersect instead of a constant-height surface.
    output : {'llh', 'ecef'}
        Coordinates returned by ``transform`` and accepted by
        ``inverse_transform``.
    errors : {'raise', 'nan'}
        What ``transform`` does with pixels that have no ground solution.
    n_jobs : int, optional
        Worker threads for :meth:`geocode`. Results never depend on it.

    Attributes
    ----------
    model_ : PfaImageModel
    constants_ : PfaConstants
    affine_ : AffineModel
    surface_ : float|DemRaster
    status_ : numpy.ndarray
        Solver status of the last ``transform`` call (0 = solved).
    """

    def __init__(self, meta=None, height=None, dem=None, output="llh", errors="raise", n_jobs=None):
        self.meta = meta
        self.height = height
        self.dem = dem
        self.output = output
        self.errors = errors
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        """
        Derive the image model from ``meta``.

        ``X`` and ``y`` are ignored; they exist so the estimator composes
        with the usual fit/transform tooling.
        """

        if self.output not in _OUTPUTS:
            raise ValueError("output must be one of {}, got {!r}".format(_OUTPUTS, self.output))
        if self.errors not in ("raise", "nan"):
            raise ValueError("errors must be 'raise' or 'nan', got {!r}".format(self.errors))
        meta = check_meta(self.meta)
        self.model_ = PfaImageModel.from_meta(meta)
        self.constants_ = self.model_.constants
        self.affine_ = self.model_.affine
        self.surface_ = check_surface(self.height, self.dem, self.model_.grid.scp_height)
        return self

    def _finish(self, points, status):
        self.status_ = status
        if self.errors == "raise":
            raise_for_status(status)
        if self.output == "llh":
            out = np.full(points.shape, np.nan)
            ok = status == OK
            out[ok] = ecef_to_llh(points[ok])
            return out
        return points

    def transform(self, X):
        """
        Ground coordinates of pixel indices.

        Parameters
        ----------
        X : array_like
            ``(n, 2)`` fractional ``(row, col)`` indices.

        Returns
        -------
        numpy.ndarray
            ``(n, 3)`` lat/lon/height (degrees, metres) or ECEF metres.
        """

        check_is_fitted(self, "model_")
        X = check_points(X, 2, "pixel indices")
        points, status = pfa_forward_map_batch(self.model_, (X[:, 0], X[:, 1]), self.surface_)
        return self._finish(points, status)

    def inverse_transform(self, X):
        """
        Fractional pixel indices of ground points.

        Parameters
        ----------
        X : array_like
            ``(n, 3)`` points in the ``output`` convention.

        Returns
        -------
        numpy.ndarray
            ``(n, 2)`` fractional ``(row, col)``.
        """

        check_is_fitted(self, "model_")
        X = check_points(X, 3, "ground points")
        ecef = llh_to_ecef(X) if self.output == "llh" else X
        index = pfa_inverse_map(self.model_, ecef)
        return np.column_stack([index.row, index.col])

    def geocode(self, decimate=1):
        """
        Ground coordinates of every ``decimate``-th pixel of the image.

        Returns
        -------
        points : numpy.ndarray
            ``(rows, cols, 3)`` in the ``output`` convention, NaN where the
            solve failed.
        status : numpy.ndarray
        """

        check_is_fitted(self, "model_")
        decimate = int(decimate)
        if decimate < 1:
            raise ValueError("decimate must be at least 1")
        g = self.model_.grid
        points, status = geocode_grid(self.model_, self.surface_, np.arange(0, g.rows, decimate),
                                      np.arange(0, g.cols, decimate), n_jobs=self.n_jobs)
        if self.output == "llh":
            out = np.full(points.shape, np.nan)
            ok = status == OK
            out[ok] = ecef_to_llh(points[ok])
            points = out
        return points, status


class ZeroDopplerResampler(TransformerMixin, BaseEstimator):
    """
    Resample complex PFA images onto a zero-Doppler grid.

    Parameters
    ----------
    meta : SicdMeta|str
        Metadata of the source image.
    ref_height : float, optional
        Surface height shared by both mappings; defaults to the SCP height.
    orbit : Orbit, optional
        Orbit for the zero-Doppler geometry. Defaults to the ARP polynomial
        sampled every ``orbit_spacing`` seconds over ``t_COA +/- orbit_half_span``.
    orbit_half_span, orbit_spacing : float
    grid : ZeroDopplerGrid, optional
        Output grid; designed from the image footprint when omitted.
    n_jobs : int, optional
        Worker threads. The output is byte-identical for any value.

    Attributes
    ----------
    model_ : PfaImageModel
    orbit_ : Orbit
    grid_ : ZeroDopplerGrid
    ref_height_ : float
    report_ : ResampleReport
        Set by ``transform``.
    """

    def __init__(self, meta=None, ref_height=None, orbit=None, orbit_half_span=60.0, orbit_spacing=1.0, grid=None,
                 n_jobs=None):
        self.meta = meta
        self.ref_height = ref_height
        self.orbit = orbit
        self.orbit_half_span = orbit_half_span
        self.orbit_spacing = orbit_spacing
        self.grid = grid
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        """
        Derive the image model and the output grid.

        ``X``, when given, is only checked against the metadata dimensions.
        """

        meta = check_meta(self.meta)
        self.model_ = PfaImageModel.from_meta(meta)
        if X is not None:
            self._check_source(X)
        self.ref_height_ = float(self.model_.grid.scp_height if self.ref_height is None else self.ref_height)
        if self.orbit is None:
            self.orbit_ = orbit_from_meta(meta, self.orbit_half_span, self.orbit_spacing)
        else:
            self.orbit_ = self.orbit
        if self.grid is None:
            self.grid_ = design_zd_grid(self.model_, self.ref_height_, self.orbit_)
        else:
            self.grid_ = self.grid
        return self

    def _check_source(self, X):
        X = check_complex_raster(X)
        g = self.model_.grid
        if X.shape != (g.rows, g.cols):
            raise ValueError("source raster shape {} does not match the image metadata {}".format(
                X.shape, (g.rows, g.cols)))
        return X

    def transform(self, X):
        """
        Resample ``X``.

        Parameters
        ----------
        X : array_like
            ``(rows, cols)`` complex PFA image.

        Returns
        -------
        numpy.ndarray
            ``grid_.shape`` complex64 image; zero outside ``report_.valid``.
        """

        check_is_fitted(self, "grid_")
        X = self._check_source(X)
        out, self.report_ = resample_pfa_to_zd(X, self.model_, self.grid_, self.ref_height_, n_jobs=self.n_jobs)
        return out


__all__ = ["PfaGeometry", "ZeroDopplerResampler"]
