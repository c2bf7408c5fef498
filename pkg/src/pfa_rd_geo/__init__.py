"""
Range/Doppler geometry for constant-COA polar-format SAR images.

Pixels of a spotlight PFA image whose centre-of-aperture time is the same for
every pixel map to slant range and range rate through one affine model and a
single platform state. This package implements that model, the ground
intersection solver it feeds, the inverse mapping, a zero-Doppler
counterpart, a PFA to zero-Doppler resampler and SICD metadata ingestion.
"""

__version__ = "0.1.0"

from .errors import (ConvergenceError, DegenerateGeometryError, DesignError, DomainError, GeometryError,
                     InvalidConeError, MetadataError, NodataError, NoSolutionError, OrbitRangeError,
                     OutOfModelError, OutOfSwathError, PfaRdGeoError, ResampleError, UnsupportedFormatError,
                     UnsupportedGeometryError)
from .geodesy import (EcefPoint, LlhPoint, Orbit, Polynomial1D, StateVector, ecef_to_llh, llh_to_ecef,
                      orbit_state_at)
from .pfa_model import (AffineModel, GridInfo, ImageCoord, ImageIndex, PfaConstants, RangeDoppler, ScanlineModel,
                        compute_affine, derive_pfa_constants, image_to_rrdot, rdot_to_doppler, rrdot_to_image,
                        scanline_model, validate_constant_tcoa)
from .projection import PfaImageModel, geocode_grid, pfa_forward_map, pfa_inverse_map
from .rd_solver import DemRaster, rrdot_to_dem, rrdot_to_surface, solve_residuals
from .resampler import ResampleReport, design_zd_grid, resample_pfa_to_zd
from .sicd_ingest import SicdMeta, load_meta, parse_meta_json, parse_sicd_xml
from .zd_model import ZeroDopplerGrid, zd_forward_map, zd_inverse_map
from .estimators import PfaGeometry, ZeroDopplerResampler
