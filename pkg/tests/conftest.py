from pathlib import Path

import pytest

from pfa_rd_geo.sicd_ingest import load_meta
from pfa_rd_geo.testkit import PRESETS, make_synthetic_scene

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def fixture_meta():
    return load_meta(DATA / "sicd_pfa.xml")


@pytest.fixture(scope="session")
def scenes():
    return {p: make_synthetic_scene(5, p, n_probes=50) for p in PRESETS}


@pytest.fixture(scope="session")
def small_scene():
    """A 300 x 260 squinted right-looking scene, cheap enough for CLI and resampler tests."""
    return make_synthetic_scene(3, "mid-latitude-squint", shape=(300, 260), n_probes=20)
