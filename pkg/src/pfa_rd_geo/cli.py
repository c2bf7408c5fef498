"""
``pfa-rd-geo`` command line.

Exit status: 0 success, 1 usage error, 2 metadata error, 3 solver or
geometry error, 4 I/O error. ``PFA_RD_GEO_THREADS`` sets the number of
worker threads for ``geocode`` and ``resample``; outputs do not depend on it.
"""

import argparse
import json
import sys
import warnings

import numpy as np

from . import __version__
from .errors import GeometryError, MetadataError
from .geodesy import ecef_to_llh, llh_to_ecef
from .pfa_model import (TCOA_CONSTANCY_TOL, MetadataConsistencyWarning, compute_affine, derive_pfa_constants,
                        image_to_rrdot, index_to_coord, tcoa_variation)
from .projection import PfaImageModel, geocode_grid, pfa_forward_map, pfa_inverse_map
from .raster_io import read_dem, read_raster, write_raster
from .rd_solver import OK, rrdot_to_dem, rrdot_to_surface
from .resampler import design_zd_grid, resample_pfa_to_zd
from .sicd_ingest import load_meta
from .zd_model import orbit_from_meta

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_METADATA = 2
EXIT_GEOMETRY = 3
EXIT_IO = 4

MAX_GEOCODE_FAILURES = 0.10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; that code means a metadata error here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError("{}: error: {}".format(self.prog, message))


def _fmt(values, spec="{:.12g}"):
    return " ".join(spec.format(float(v)) for v in values)


def _surface(args, meta):
    if args.dem is not None:
        return read_dem(args.dem)
    if args.height is not None:
        return float(args.height)
    return float(meta.scp_llh[2])


def cmd_info(args, out):
    meta = load_meta(args.meta)
    print("metadata: {}".format(args.meta), file=out)
    print("image: {} rows x {} cols, SCP pixel ({}, {}), spacing {:.6g} m x {:.6g} m".format(
        meta.rows, meta.cols, meta.scp_row, meta.scp_col, meta.row_spacing, meta.col_spacing), file=out)
    print("SCP ECEF: {}".format(_fmt(meta.scp_ecef, "{:.4f}")), file=out)
    print("SCP LLH: {:.9f} {:.9f} {:.4f}".format(*meta.scp_llh), file=out)
    mismatch = meta.scp_mismatch()
    if mismatch > 1.0:
        print("warning: SCP LLH and ECEF disagree by {:.3f} m".format(mismatch), file=sys.stderr)
    print("center frequency: {:.9g} Hz (wavelength {:.9g} m)".format(meta.center_frequency, meta.wavelength),
          file=out)
    print("side of track: {}".format(meta.side_of_track), file=out)

    variation = tcoa_variation(meta)
    constant = variation <= TCOA_CONSTANCY_TOL
    if constant:
        print("constant t_COA: yes (t_COA = {!r} s)".format(float(meta.time_coa_poly[0][0])), file=out)
    else:
        print("constant t_COA: NO (varies by up to {:.6g} s across the image)".format(variation), file=out)
        if args.strict:
            print("error: only constant-COA PFA images are supported", file=sys.stderr)
            return EXIT_METADATA
        return EXIT_OK

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", MetadataConsistencyWarning)
        k = derive_pfa_constants(meta)
    for w in caught:
        print("warning: {}".format(w.message), file=sys.stderr)
    m = compute_affine(k)
    print("constants:", file=out)
    for key, value in k.as_dict().items():
        text = _fmt(value, "{!r}") if isinstance(value, list) else repr(value)
        print("  {}: {}".format(key, text), file=out)
    print("matrix:", file=out)
    print("  a11 {!r} a12 {!r}".format(m.a11, m.a12), file=out)
    print("  a21 {!r} a22 {!r}".format(m.a21, m.a22), file=out)
    print("determinant: {!r}".format(m.det), file=out)
    return EXIT_OK


def cmd_forward(args, out):
    meta = load_meta(args.meta)
    model = PfaImageModel.from_meta(meta)
    surface = _surface(args, meta)
    p = pfa_forward_map(model, (args.pixel[0], args.pixel[1]), surface)
    lat, lon, h = ecef_to_llh(p)
    print("{:.10f} {:.10f} {:.4f}".format(lat, lon, h), file=out)
    if args.verbose:
        # re-solve the single pixel for its diagnostics
        rd = image_to_rrdot(model.affine, index_to_coord(model.grid, args.pixel))
        if isinstance(surface, float):
            _, diag = rrdot_to_surface(model.state, rd, surface, model.look_side)
        else:
            _, diag = rrdot_to_dem(model.state, rd, surface, model.look_side)
        print("range {!r} m, range rate {!r} m/s".format(float(rd.r), float(rd.rdot)), file=sys.stderr)
        print("residuals: range {:.3e} m, range rate {:.3e} m/s, height {:.3e} m ({} iterations)".format(
            diag.range_residual, diag.rdot_residual, diag.height_residual, diag.iterations), file=sys.stderr)
    return EXIT_OK


def cmd_inverse(args, out):
    meta = load_meta(args.meta)
    model = PfaImageModel.from_meta(meta)
    index = pfa_inverse_map(model, llh_to_ecef(args.llh))
    print("{:.6f} {:.6f}".format(float(index.row), float(index.col)), file=out)
    return EXIT_OK


def cmd_geocode(args, out):
    if args.decimate < 1:
        raise UsageError("--decimate must be at least 1")
    meta = load_meta(args.meta)
    model = PfaImageModel.from_meta(meta)
    surface = _surface(args, meta)
    g = model.grid
    rows = np.arange(0, g.rows, args.decimate)
    cols = np.arange(0, g.cols, args.decimate)
    points, status = geocode_grid(model, surface, rows, cols)
    llh = np.full(points.shape, np.nan)
    ok = status == OK
    llh[ok] = ecef_to_llh(points[ok])
    for i, suffix in enumerate(("lat", "lon", "hgt")):
        write_raster("{}.{}".format(args.out, suffix), llh[..., i], "float64")
    failures = int(np.count_nonzero(~ok))
    print("geocoded {} x {} pixels (decimation {}), {} failures".format(
        rows.size, cols.size, args.decimate, failures), file=out)
    if failures > MAX_GEOCODE_FAILURES * status.size:
        print("error: {} of {} pixels could not be projected".format(failures, status.size), file=sys.stderr)
        return EXIT_GEOMETRY
    return EXIT_OK


def cmd_resample(args, out):
    meta = load_meta(args.meta)
    model = PfaImageModel.from_meta(meta)
    src, header = read_raster(args.slc)
    if header.dtype != "complex64":
        raise UsageError("--slc must be a complex64 raster, got {}".format(header.dtype))
    if src.shape != (meta.rows, meta.cols):
        raise UsageError("SLC is {}x{} but the metadata describes {}x{}".format(
            src.shape[0], src.shape[1], meta.rows, meta.cols))
    height = float(meta.scp_llh[2]) if args.height is None else float(args.height)
    orbit = orbit_from_meta(meta, args.orbit_half_span)
    zd = design_zd_grid(model, height, orbit)
    image, report = resample_pfa_to_zd(src, model, zd, height)
    write_raster(args.out + ".slc", image, "complex64")
    grid_doc = zd.as_dict()
    grid_doc["ref_height"] = height
    with open(args.out + ".grid.json", "w") as fid:
        json.dump(grid_doc, fid, indent=2, sort_keys=True)
        fid.write("\n")
    with open(args.out + ".report.json", "w") as fid:
        json.dump(report.as_dict(), fid, indent=2, sort_keys=True)
        fid.write("\n")
    print("resampled to {} x {} zero-Doppler grid, valid fraction {:.4f}, ground round trip {:.3e} m".format(
        zd.rows, zd.lines, report.valid_fraction, report.max_ground_roundtrip_error), file=out)
    return EXIT_OK


def cmd_selftest(args, out):
    from .selftest import run_selftest  # only this command needs the synthetic-scene machinery
    passed, _ = run_selftest(perturb_a21=args.perturb_a21, stream=out)
    return EXIT_OK if passed else EXIT_GEOMETRY


def _add_surface(p):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--dem", help="DEM raster (flat binary with JSON header)")
    group.add_argument("--height", type=float, help="constant height above the ellipsoid [m]; default SCP height")


def build_parser():
    parser = _Parser(prog="pfa-rd-geo", description="Geometry of constant-COA polar-format SAR images.")
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("info", help="print metadata, image constants and the affine matrix")
    p.add_argument("meta", help="SICD XML or JSON metadata")
    p.add_argument("--strict", action="store_true", help="fail when the COA time is not constant")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("forward", help="pixel to latitude, longitude, height")
    p.add_argument("meta")
    p.add_argument("--pixel", nargs=2, type=float, metavar=("ROW", "COL"), required=True)
    _add_surface(p)
    p.add_argument("--verbose", action="store_true", help="print solver residuals to standard error")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("inverse", help="latitude, longitude, height to fractional pixel")
    p.add_argument("meta")
    p.add_argument("--llh", nargs=3, type=float, metavar=("LAT", "LON", "H"), required=True)
    p.set_defaults(func=cmd_inverse)

    p = sub.add_parser("geocode", help="write latitude/longitude/height rasters for the image grid")
    p.add_argument("meta")
    _add_surface(p)
    p.add_argument("--out", required=True, help="output prefix; writes PREFIX.lat, PREFIX.lon, PREFIX.hgt")
    p.add_argument("--decimate", type=int, default=1, help="keep every k-th row and column")
    p.set_defaults(func=cmd_geocode)

    p = sub.add_parser("resample", help="resample a complex image onto a zero-Doppler grid")
    p.add_argument("meta")
    p.add_argument("--slc", required=True, help="complex64 raster matching the metadata")
    p.add_argument("--height", type=float, help="reference height [m]; default SCP height")
    p.add_argument("--out", required=True, help="output prefix; writes PREFIX.slc, PREFIX.grid.json, "
                                                "PREFIX.report.json")
    p.add_argument("--orbit-half-span", type=float, default=60.0,
                   help="seconds of ARP polynomial either side of the COA time to sample")
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("selftest", help="run the acceptance checks on built-in synthetic scenes")
    p.add_argument("--perturb-a21", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except MetadataError as exc:
        print("metadata error: {}".format(exc), file=sys.stderr)
        return EXIT_METADATA
    except GeometryError as exc:
        print("geometry error: {}".format(exc), file=sys.stderr)
        return EXIT_GEOMETRY
    except OSError as exc:
        print("I/O error: {}".format(exc), file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # malformed raster headers and the like
        print("error: {}".format(exc), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
