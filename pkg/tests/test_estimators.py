import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pfa_rd_geo import PfaGeometry, ZeroDopplerResampler
from pfa_rd_geo.errors import GeometryError
from pfa_rd_geo.geodesy import llh_to_ecef


def test_params_and_clone(fixture_meta):
    geo = PfaGeometry(fixture_meta, height=10.0, output="ecef")
    params = geo.get_params()
    assert params["height"] == 10.0 and params["output"] == "ecef" and params["meta"] is fixture_meta
    twin = clone(geo)
    assert twin.get_params()["height"] == 10.0 and not hasattr(twin, "model_")
    geo.set_params(height=5.0)
    assert geo.height == 5.0


def test_not_fitted(fixture_meta):
    with pytest.raises(NotFittedError):
        PfaGeometry(fixture_meta).transform([[0.0, 0.0]])
    with pytest.raises(NotFittedError):
        ZeroDopplerResampler(fixture_meta).transform(np.zeros((2, 2), np.complex64))


def test_fit_from_path(data_dir, fixture_meta):
    geo = PfaGeometry(str(data_dir / "sicd_pfa.xml")).fit()
    assert geo.affine_ == PfaGeometry(fixture_meta).fit().affine_


def test_scp_maps_to_scp(fixture_meta):
    geo = PfaGeometry(fixture_meta).fit()
    llh = geo.transform([fixture_meta.scp_row, fixture_meta.scp_col])
    assert llh.shape == (1, 3)
    np.testing.assert_allclose(llh[0, :2], fixture_meta.scp_llh[:2], atol=1e-6)
    assert np.all(geo.status_ == 0)


@pytest.mark.parametrize("output", ["llh", "ecef"])
def test_round_trip(fixture_meta, output):
    geo = PfaGeometry(fixture_meta, height=30.0, output=output).fit()
    rng = np.random.default_rng(0)
    pix = np.column_stack([rng.uniform(0, 1200, 50), rng.uniform(0, 1000, 50)])
    back = geo.inverse_transform(geo.transform(pix))
    assert np.max(np.abs(back - pix)) < 1e-3


def test_synthetic_probes(scenes):
    scene = scenes["mid-latitude-squint"]
    geo = PfaGeometry(scene.meta, height=scene.ref_height, output="ecef").fit()
    pr = scene.probes
    ground = geo.transform(np.column_stack([pr.row, pr.col]))
    assert np.max(np.linalg.norm(ground - pr.ground, axis=1)) < 0.01


def test_errors_nan(fixture_meta):
    far = [[0.0, 1e7]]
    with pytest.raises(GeometryError):
        PfaGeometry(fixture_meta).fit().transform(far)
    geo = PfaGeometry(fixture_meta, errors="nan").fit()
    assert np.all(np.isnan(geo.transform(far))) and geo.status_[0] != 0


def test_bad_params(fixture_meta):
    with pytest.raises(ValueError):
        PfaGeometry(fixture_meta, output="utm").fit()
    with pytest.raises(ValueError):
        PfaGeometry(fixture_meta, errors="ignore").fit()
    geo = PfaGeometry(fixture_meta).fit()
    with pytest.raises(ValueError):
        geo.transform([[0.0, 0.0, 0.0]])
    with pytest.raises(ValueError):
        geo.transform([[np.nan, 0.0]])


def test_geocode_decimated(fixture_meta):
    geo = PfaGeometry(fixture_meta, output="ecef").fit()
    points, status = geo.geocode(decimate=400)
    assert points.shape == (4, 3, 3) and np.all(status == 0)
    np.testing.assert_array_equal(points[1, 2], geo.transform([[400.0, 800.0]])[0])
    with pytest.raises(ValueError):
        geo.geocode(decimate=0)


def test_inverse_llh_matches_ecef(fixture_meta):
    llh = np.array([[2.06, 0.001, 5.0]])
    a = PfaGeometry(fixture_meta).fit().inverse_transform(llh)
    b = PfaGeometry(fixture_meta, output="ecef").fit().inverse_transform(llh_to_ecef(llh))
    np.testing.assert_array_equal(a, b)


def test_resampler_estimator(small_scene):
    est = ZeroDopplerResampler(small_scene.meta, orbit=small_scene.orbit, n_jobs=2)
    src = np.ones((small_scene.meta.rows, small_scene.meta.cols), np.complex64)
    out = est.fit(src).transform(src)
    assert out.shape == est.grid_.shape and est.ref_height_ == pytest.approx(small_scene.ref_height, abs=1e-6)
    assert np.all(out[est.report_.valid] == 1)
    with pytest.raises(ValueError):
        est.transform(np.ones((3, 3), np.complex64))
    # a fixed grid is used verbatim
    again = ZeroDopplerResampler(small_scene.meta, orbit=small_scene.orbit, grid=est.grid_).fit()
    assert again.grid_ is est.grid_
