import json

import pytest

from dualpinhole.config import ConfigError, SetupConfig, load_config


def write(tmp_path, text):
    p = tmp_path / "c.json"
    p.write_text(text)
    return p


def test_empty_object_gives_defaults(tmp_path):
    c = load_config(write(tmp_path, "{}"))
    assert c == SetupConfig()
    assert c.u == pytest.approx(1.30e-3)
    assert c.wire_count == 6 and c.wire_thickness_m == 127e-6
    assert c.q == pytest.approx(1.3125)


def test_thick_wire_violates_e_lt_u(tmp_path):
    with pytest.raises(ConfigError, match="e < u violated"):
        load_config(write(tmp_path, '{"wire_thickness_m": 2}'))


def test_paper_text_airy_mode(tmp_path):
    c = load_config(write(tmp_path, '{"airy_mode": "paper_text"}'))
    assert c.s == pytest.approx(10.4e-3, rel=1e-12)


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown configuration keys: colour"):
        load_config(write(tmp_path, '{"colour": 1}'))
    with pytest.raises(ConfigError, match="grid"):
        load_config(write(tmp_path, '{"grid": {"samples": 128, "pitch": 1}}'))


def test_parse_error_reports_line_and_column(tmp_path):
    with pytest.raises(ConfigError, match="line 2 column 5"):
        load_config(write(tmp_path, '{\n    oops}'))


@pytest.mark.parametrize(
    "data, field",
    [
        ({"wavelength_m": -1}, "wavelength_m"),
        ({"wire_count": 3}, "wire_count"),
        ({"dims": 3}, "dims"),
        ({"grid": {"samples": 63}}, "grid.samples"),
        ({"image_distance_mode": "guess"}, "image_distance_mode"),
        ({"noise_pct": -0.1}, "noise_pct"),
        ({"pinhole_diameter_m": 3e-3}, "pinhole_diameter_m"),
    ],
)
def test_constraint_errors_name_the_field(data, field):
    with pytest.raises(ConfigError, match=field):
        SetupConfig.from_dict(data)


def test_pinned_image_distance():
    c = SetupConfig(image_distance_mode="pinned")
    assert c.q == 1.38
    assert c.image_separation == pytest.approx(2e-3 * 1.38 / 4.2)
    assert c.rayleigh == pytest.approx(36.5e-6, rel=2e-3)


def test_round_trip(tmp_path):
    c = SetupConfig(wire_offset_m=(1e-6,) * 6, noise_pct=0.2, dims=2)
    p = write(tmp_path, json.dumps(c.to_dict()))
    assert load_config(p) == c


def test_offset_list_length_checked():
    with pytest.raises(ConfigError, match="wire_offset_m"):
        SetupConfig.from_dict({"wire_offset_m": [0.0, 1e-6]})
