import numpy as np
import pytest

from pfa_rd_geo.raster_io import RasterHeader, header_path, read_dem, read_raster, write_dem, write_raster
from pfa_rd_geo.rd_solver import DemRaster


@pytest.mark.parametrize("dtype", [np.float32, np.float64, np.complex64])
def test_round_trip(tmp_path, dtype):
    rng = np.random.default_rng(0)
    data = rng.normal(size=(5, 7)).astype(dtype)
    path = tmp_path / "img"
    header = write_raster(path, data)
    back, read_header = read_raster(path)
    assert back.tobytes() == data.astype(back.dtype).tobytes() and back.shape == (5, 7)
    assert read_header == header


def test_little_endian_layout(tmp_path):
    path = tmp_path / "one"
    write_raster(path, np.array([[1.0]], np.float32))
    assert path.read_bytes() == b"\x00\x00\x80\x3f"


def test_dem_round_trip(tmp_path):
    dem = DemRaster(np.arange(12.0).reshape(3, 4), 10.0, 20.0, 0.01, 0.02, nodata=-9999.0)
    path = tmp_path / "dem"
    write_dem(path, dem)
    back = read_dem(path)
    np.testing.assert_array_equal(back.heights, dem.heights)
    assert (back.lat0, back.lon0, back.dlat, back.dlon, back.nodata) == (10.0, 20.0, 0.01, 0.02, -9999.0)


def test_dem_needs_georef(tmp_path):
    path = tmp_path / "plain"
    write_raster(path, np.zeros((2, 2)))
    with pytest.raises(ValueError, match="georef"):
        read_dem(path)


def test_size_mismatch(tmp_path):
    path = tmp_path / "bad"
    write_raster(path, np.zeros((2, 2)))
    with open(header_path(path), "w") as fid:
        fid.write(RasterHeader(3, 3, "float64").to_json())
    with pytest.raises(ValueError):
        read_raster(path)


def test_header_validation():
    with pytest.raises(ValueError):
        RasterHeader(2, 2, "int8")
    with pytest.raises(ValueError):
        RasterHeader(0, 2, "float32")
    with pytest.raises(ValueError):
        RasterHeader(2, 2, "float32", georef={"lat0": 0.0})
    with pytest.raises(ValueError):
        RasterHeader.from_json('{"rows": 2}')


def test_write_rejects_bad_arrays(tmp_path):
    with pytest.raises(ValueError):
        write_raster(tmp_path / "x", np.zeros(3))
    with pytest.raises(ValueError):
        write_raster(tmp_path / "x", np.zeros((2, 2), np.int16))
