import json

import pytest

from pfa_rd_geo.errors import MetadataError, UnsupportedFormatError
from pfa_rd_geo.sicd_ingest import SicdMeta, load_meta, meta_to_json, parse_meta_json, parse_sicd_xml


def test_fixture_fields(fixture_meta):
    m = fixture_meta
    assert m.scp_ecef == (6374039.122966292, 0.0, 227831.1270554356)
    assert m.scp_llh == (2.0608706058898654, 0.0, 0.0)
    # SCPPixel is given in full-image coordinates, FirstRow/FirstCol are subtracted
    assert (m.scp_row, m.scp_col) == (600.0, 500.0)
    assert (m.rows, m.cols) == (1201, 1001)
    assert (m.row_spacing, m.col_spacing) == (0.5, 0.6)
    assert m.time_coa_poly == ((0.0,),)
    assert m.polar_ang_poly.coefficients == (-0.1, 0.01)
    assert m.spatial_freq_sf_poly.coefficients == (1.0, 0.005)
    assert m.arp_poly[0].coefficients == (7e6, 0.0, -4.017857142857143)
    assert m.arp_poly[1].coefficients == (0.0, 7500.0, 0.0, -0.0014349489795918367)
    assert m.arp_poly[2].coefficients == (0.0,)
    # the processed band wins over the transmitted band
    assert m.center_frequency == 9.6e9
    assert m.side_of_track == "L"
    assert m.coa_arp_pos == (7e6, 0.0, 0.0) and m.coa_arp_vel == (0.0, 7500.0, 0.0)
    assert m.collect_start.startswith("2026-01-01")
    assert m.scp_mismatch() < 1e-3


def test_golden_json(data_dir, fixture_meta):
    golden = (data_dir / "sicd_pfa.golden.json").read_text()
    assert json.loads(meta_to_json(fixture_meta)) == json.loads(golden)
    assert load_meta(data_dir / "sicd_pfa.golden.json") == fixture_meta


def test_json_round_trip(fixture_meta):
    assert parse_meta_json(meta_to_json(fixture_meta)) == fixture_meta


def test_linear_tcoa_fixture_parses(data_dir):
    meta = load_meta(data_dir / "sicd_linear_tcoa.xml")
    assert meta.time_coa_poly == ((0.0, 1e-4),)


def test_missing_element_is_named(data_dir):
    with pytest.raises(MetadataError, match="PFA/SpatialFreqSFPoly") as info:
        load_meta(data_dir / "sicd_missing_sf.xml")
    assert info.value.path == "PFA/SpatialFreqSFPoly"


def test_rma_rejected(data_dir):
    text = (data_dir / "sicd_pfa.xml").read_text().replace("<ImageFormAlgo>PFA<", "<ImageFormAlgo>RMA<")
    with pytest.raises(UnsupportedFormatError):
        parse_sicd_xml(text)


def test_tx_frequency_fallback(data_dir):
    text = (data_dir / "sicd_pfa.xml").read_text()
    start, end = text.index("<TxFrequencyProc>"), text.index("</TxFrequencyProc>") + len("</TxFrequencyProc>")
    meta = parse_sicd_xml(text[:start] + text[end:])
    assert meta.center_frequency == 9.65e9


def test_malformed_inputs(tmp_path):
    with pytest.raises(MetadataError):
        parse_sicd_xml("<SICD><unclosed></SICD>")
    for text in ("{}", "[]", "not json", "{\"scp_ecef\": [1, 2, 3]}"):
        with pytest.raises(MetadataError):
            parse_meta_json(text)
    path = tmp_path / "meta.txt"
    path.write_text("hello")
    with pytest.raises(MetadataError):
        load_meta(path)


@pytest.mark.parametrize("key,value", [("scp_ecef", [1.0, 2.0]), ("shape", [10.5, 3]), ("side_of_track", "up"),
                                       ("spacing", [0.0, 1.0]), ("center_frequency_hz", "x"),
                                       ("time_coa_poly", [[0.0], [0.0, 1.0]]), ("arp_poly", {"x": [0.0]})])
def test_schema_violations(fixture_meta, key, value):
    doc = json.loads(meta_to_json(fixture_meta))
    doc[key] = value
    with pytest.raises(MetadataError):
        parse_meta_json(json.dumps(doc))


def test_coa_state_must_be_paired(fixture_meta):
    with pytest.raises(MetadataError):
        SicdMeta(**{**fixture_meta.__dict__, "coa_arp_vel": None})
