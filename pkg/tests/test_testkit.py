import numpy as np
import pytest

from pfa_rd_geo.errors import InvalidConeError, NoSolutionError
from pfa_rd_geo.geodesy import StateVector, ecef_to_llh, llh_to_ecef
from pfa_rd_geo.pfa_model import derive_pfa_constants
from pfa_rd_geo.testkit import PRESETS, brute_force_rrdot, make_synthetic_scene

EQUATORIAL = StateVector(0.0, (7.0e6, 0.0, 0.0), (0.0, 7.5e3, 0.0))


def test_equatorial_preset_state(scenes):
    scene = scenes["equatorial-nadir-offset"]
    np.testing.assert_allclose(scene.state.position, [7.0e6, 0.0, 0.0], atol=1e-6)
    np.testing.assert_allclose(scene.state.velocity, [0.0, 7.5e3, 0.0], atol=1e-9)
    assert scene.meta.side_of_track == "L" and scene.ref_height == 0.0


@pytest.mark.parametrize("preset", PRESETS)
def test_metadata_reproduces_generator(preset, scenes):
    scene = scenes[preset]
    k = derive_pfa_constants(scene.meta)
    assert abs(k.theta_coa - scene.theta) < 1e-12
    assert abs(k.dtheta_dt - scene.dtheta_dt) < 1e-12
    assert abs(k.ksf - scene.ksf) < 1e-12
    assert abs(k.dksf_dtheta - scene.dksf_dtheta) < 1e-12
    assert k.t_coa == scene.t_coa
    # the ARP polynomial reproduces the analytic orbit near the COA time
    for dt in (-1.0, 0.0, 2.0):
        t = scene.t_coa + dt
        p = np.array([poly(t) for poly in scene.meta.arp_poly])
        assert np.linalg.norm(p - scene.truth_orbit.position(t)) < 1e-3


@pytest.mark.parametrize("preset", PRESETS)
def test_probes_self_consistent(preset, scenes):
    scene = scenes[preset]
    pr = scene.probes
    d = scene.state.position - pr.ground
    r = np.linalg.norm(d, axis=1)
    np.testing.assert_allclose(r, pr.r, rtol=1e-15)
    np.testing.assert_allclose(np.sum(scene.state.velocity * d, axis=1) / r, pr.rdot, atol=1e-9)
    np.testing.assert_allclose(ecef_to_llh(pr.ground)[:, 2], scene.ref_height, atol=1e-6)
    m = scene.meta
    assert np.all((pr.row >= 0) & (pr.row <= m.rows - 1) & (pr.col >= 0) & (pr.col <= m.cols - 1))


def test_scene_is_reproducible():
    a = make_synthetic_scene(9, "high-incidence", n_probes=3)
    b = make_synthetic_scene(9, "high-incidence", n_probes=3)
    assert a.meta == b.meta
    np.testing.assert_array_equal(a.probes.ground, b.probes.ground)
    with pytest.raises(ValueError):
        make_synthetic_scene(0, "polar")


@pytest.mark.parametrize("look,lat", [("L", 1.0), ("R", -1.0)])
def test_brute_force_trivial_case(look, lat):
    # exact nadir is a tangent touch that a sign-change scan cannot see, so step one degree to the side
    t = llh_to_ecef([lat, 0.0, 0.0])
    los = EQUATORIAL.position - t
    p = brute_force_rrdot(EQUATORIAL, (np.linalg.norm(los), 0.0), 0.0, look)
    assert np.linalg.norm(p - t) < 1e-3


def test_brute_force_refusals():
    with pytest.raises(InvalidConeError):
        brute_force_rrdot(EQUATORIAL, (7e5, 7.5e3), 0.0, "L")
    with pytest.raises(NoSolutionError):
        brute_force_rrdot(EQUATORIAL, (5e5, 0.0), 0.0, "L")
