import csv
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from dualpinhole.export import read_pgm, write_csv, write_json, write_pgm, write_profile
from dualpinhole.field import IrradianceProfile


@given(values=arrays(float, st.integers(1, 40), elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_csv_round_trip_is_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "v.csv"
    write_csv(path, ["v"], [values])
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["v"]
    back = np.array([float(r[0]) for r in rows[1:]])
    assert back.tobytes() == values.tobytes() or np.array_equal(back, values)


def test_csv_length_mismatch(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "x.csv", ["a", "b"], [np.zeros(3), np.zeros(4)])


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.random((17, 23))
    img[3, 4] = 2.0
    path = write_pgm(tmp_path / "a.pgm", img, {"origin_m": -1.0, "spacing_m": 0.5})
    data = read_pgm(path)
    assert data.shape == (17, 23)
    assert data.max() == 65535
    meta = json.loads(path.with_suffix(".json").read_text())
    assert meta["origin_m"] == -1.0
    assert np.allclose(data * meta["value_per_count"], img, atol=meta["value_per_count"] / 2 + 1e-15)


def test_pgm_pixel_bytes_that_look_like_whitespace(tmp_path):
    # first pixel 0x0A0A is a newline pair in the byte stream
    img = np.full((4, 4), 0x0A0A, float)
    img[-1, -1] = 65535
    assert np.array_equal(read_pgm(write_pgm(tmp_path / "w.pgm", img)), img.astype(int))


def test_pgm_rejects_bad_input(tmp_path):
    with pytest.raises(ValueError):
        write_pgm(tmp_path / "x.pgm", np.ones(4))
    with pytest.raises(ValueError):
        write_pgm(tmp_path / "x.pgm", -np.ones((4, 4)))


def test_profile_formats(tmp_path):
    p1 = IrradianceProfile(np.linspace(0, 1, 16), -0.5, 0.1)
    path = write_profile(tmp_path / "one", p1)
    assert path.suffix == ".csv"
    assert path.read_text().splitlines()[0] == "x_m,irradiance_au"
    p2 = IrradianceProfile(np.ones((16, 16)), -0.5, 0.1)
    path = write_profile(tmp_path / "two", p2)
    assert path.suffix == ".pgm"
    meta = json.loads(path.with_suffix(".json").read_text())
    assert meta["origin_m"] == -0.5 and meta["spacing_m"] == 0.1


def test_json_numpy_values(tmp_path):
    path = write_json(tmp_path / "a.json", {"b": np.float64(1.5), "a": np.arange(3), "c": (1, 2)})
    assert json.loads(path.read_text()) == {"a": [0, 1, 2], "b": 1.5, "c": [1, 2]}
