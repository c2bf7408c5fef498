import io
import json

import numpy as np
import pytest

from pfa_rd_geo import selftest
from pfa_rd_geo.cli import main
from pfa_rd_geo.pfa_model import compute_affine, derive_pfa_constants
from pfa_rd_geo.raster_io import read_raster, write_dem, write_raster
from pfa_rd_geo.rd_solver import DemRaster
from pfa_rd_geo.sicd_ingest import meta_to_json


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def xml(data_dir):
    return data_dir / "sicd_pfa.xml"


@pytest.fixture(scope="module")
def small_json(small_scene, tmp_path_factory):
    path = tmp_path_factory.mktemp("meta") / "small.json"
    path.write_text(meta_to_json(small_scene.meta))
    return path


def test_info_matrix_matches_library(xml, fixture_meta):
    code, text = run("info", xml)
    assert code == 0
    assert "constant t_COA: yes" in text
    m = compute_affine(derive_pfa_constants(fixture_meta))
    assert "a11 {!r} a12 {!r}".format(m.a11, m.a12) in text
    assert "a21 {!r} a22 {!r}".format(m.a21, m.a22) in text
    assert "determinant: {!r}".format(m.det) in text


def test_info_linear_tcoa(data_dir):
    code, text = run("info", data_dir / "sicd_linear_tcoa.xml")
    assert code == 0 and "constant t_COA: NO" in text
    assert run("info", "--strict", data_dir / "sicd_linear_tcoa.xml")[0] == 2
    assert run("forward", data_dir / "sicd_linear_tcoa.xml", "--pixel", 0, 0)[0] == 2


def test_info_missing_element(data_dir, capsys):
    assert run("info", data_dir / "sicd_missing_sf.xml")[0] == 2
    assert "PFA/SpatialFreqSFPoly" in capsys.readouterr().err


def test_usage_errors(xml):
    assert run()[0] == 1
    assert run("bogus")[0] == 1
    assert run("forward", xml)[0] == 1
    assert run("forward", xml, "--pixel", 1, 2, "--height", 0, "--dem", "x")[0] == 1
    assert run("geocode", xml, "--out", "x", "--decimate", 0)[0] == 1


def test_missing_file_is_io_error(tmp_path):
    assert run("info", tmp_path / "absent.xml")[0] == 4


def test_forward_scp_and_inverse(xml, fixture_meta):
    code, text = run("forward", xml, "--pixel", fixture_meta.scp_row, fixture_meta.scp_col)
    assert code == 0
    lat, lon, h = map(float, text.split())
    assert abs(lat - fixture_meta.scp_llh[0]) < 1e-6 and abs(lon - fixture_meta.scp_llh[1]) < 1e-6
    assert abs(h - fixture_meta.scp_llh[2]) < 1e-3
    code, text = run("inverse", xml, "--llh", *fixture_meta.scp_llh)
    row, col = map(float, text.split())
    assert abs(row - fixture_meta.scp_row) < 1e-3 and abs(col - fixture_meta.scp_col) < 1e-3


def test_forward_inverse_round_trip(xml):
    for pixel in [(10.0, 20.0), (1100.5, 900.25), (300.0, 777.0)]:
        _, text = run("forward", xml, "--pixel", *pixel, "--height", 40.0)
        llh = text.split()
        _, text = run("inverse", xml, "--llh", *llh)
        back = np.array(text.split(), dtype=float)
        assert np.max(np.abs(back - pixel)) < 1e-2


def test_forward_verbose(xml, capsys):
    code, _ = run("forward", xml, "--pixel", 5, 5, "--verbose")
    assert code == 0 and "residuals:" in capsys.readouterr().err


def test_forward_unreachable_is_geometry_error(xml):
    assert run("forward", xml, "--pixel", 0, 0, "--height", 2.0e6)[0] == 3


def test_dem_nodata(xml, fixture_meta, tmp_path):
    lat, lon, _ = fixture_meta.scp_llh
    dem = DemRaster(np.full((21, 21), -9999.0), lat - 0.1, lon - 0.1, 0.01, 0.01, nodata=-9999.0)
    write_dem(tmp_path / "dem", dem)
    assert run("forward", xml, "--pixel", 600, 500, "--dem", tmp_path / "dem")[0] == 3
    flat = DemRaster(np.full((21, 21), 25.0), lat - 0.1, lon - 0.1, 0.01, 0.01)
    write_dem(tmp_path / "flat", flat)
    _, a = run("forward", xml, "--pixel", 600, 500, "--dem", tmp_path / "flat")
    _, b = run("forward", xml, "--pixel", 600, 500, "--height", 25)
    assert np.allclose(np.array(a.split(), float), np.array(b.split(), float), atol=1e-6)


def test_bad_dem_header_is_io_error(xml, tmp_path):
    write_raster(tmp_path / "nogeo", np.zeros((2, 2)))
    assert run("forward", xml, "--pixel", 1, 1, "--dem", tmp_path / "nogeo")[0] == 4


def test_geocode_one_by_one_equals_forward(xml, tmp_path):
    code, _ = run("geocode", xml, "--out", tmp_path / "g", "--decimate", 2000)
    assert code == 0
    lat, header = read_raster(str(tmp_path / "g") + ".lat")
    lon, _ = read_raster(str(tmp_path / "g") + ".lon")
    hgt, _ = read_raster(str(tmp_path / "g") + ".hgt")
    assert lat.shape == (1, 1) and header.dtype == "float64"
    _, text = run("forward", xml, "--pixel", 0, 0)
    assert text == "{:.10f} {:.10f} {:.4f}\n".format(lat[0, 0], lon[0, 0], hgt[0, 0])


def test_geocode_threads_identical(xml, tmp_path, monkeypatch):
    outputs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("PFA_RD_GEO_THREADS", threads)
        prefix = tmp_path / ("t" + threads)
        assert run("geocode", xml, "--out", prefix, "--decimate", 37)[0] == 0
        outputs.append(b"".join(open("{}.{}".format(prefix, s), "rb").read() for s in ("lat", "lon", "hgt")))
    assert outputs[0] == outputs[1]
    monkeypatch.setenv("PFA_RD_GEO_THREADS", "many")
    assert run("geocode", xml, "--out", tmp_path / "bad", "--decimate", 500)[0] == 4


def test_geocode_mostly_failing(xml, tmp_path):
    assert run("geocode", xml, "--out", tmp_path / "f", "--decimate", 300, "--height", 2.0e6)[0] == 3


def test_resample(small_json, small_scene, tmp_path, monkeypatch):
    rng = np.random.default_rng(0)
    src = (rng.normal(size=(small_scene.meta.rows, small_scene.meta.cols)) * (1 + 1j)).astype(np.complex64)
    write_raster(tmp_path / "in.slc", src)
    images = []
    for threads in ("1", "2"):
        monkeypatch.setenv("PFA_RD_GEO_THREADS", threads)
        prefix = str(tmp_path / ("out" + threads))
        code, text = run("resample", small_json, "--slc", tmp_path / "in.slc", "--out", prefix)
        assert code == 0 and "valid fraction" in text
        image, header = read_raster(prefix + ".slc")
        grid = json.loads(open(prefix + ".grid.json").read())
        report = json.loads(open(prefix + ".report.json").read())
        assert header.dtype == "complex64" and image.shape == (grid["rows"], grid["lines"])
        assert report["max_ground_roundtrip_error"] < 0.01
        images.append(image.tobytes())
    assert images[0] == images[1]


def test_resample_rejects_wrong_raster(small_json, tmp_path):
    write_raster(tmp_path / "small.slc", np.zeros((4, 4), np.complex64))
    assert run("resample", small_json, "--slc", tmp_path / "small.slc", "--out", tmp_path / "o")[0] == 1
    write_raster(tmp_path / "real.slc", np.zeros((4, 4), np.float32))
    assert run("resample", small_json, "--slc", tmp_path / "real.slc", "--out", tmp_path / "o")[0] == 1


def test_selftest_reports_failure(monkeypatch):
    seen = {}

    def fake(perturb_a21=0.0, stream=None):
        seen["perturb"] = perturb_a21
        return perturb_a21 == 0.0, []

    monkeypatch.setattr(selftest, "run_selftest", fake)
    assert run("selftest", "--perturb-a21", 1e-6)[0] == 3 and seen["perturb"] == 1e-6
    assert run("selftest")[0] == 0


def test_perturbed_a21_fails_forward_inverse():
    assert not selftest.criterion_forward_inverse(n_probes=20, perturb_a21=1e-6).passed
    assert selftest.criterion_forward_inverse(n_probes=20).passed
