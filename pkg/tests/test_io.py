import numpy as np
import pytest

from hougaard import __version__
from hougaard.family_params import PowerFamilySpec
from hougaard.io import MAGIC, format_csv, read_csv, read_ensemble_binary, write_csv, write_ensemble_binary, write_ensemble_csv
from hougaard.levy_paths import TimeGrid, extend_two_sided, simulate_hougaard
from hougaard.rng import RandomStream


@pytest.fixture
def ens():
    return simulate_hougaard(PowerFamilySpec(1.5, 1.0, 1.0), TimeGrid.uniform(1.0, 0.25), 7, RandomStream(71, 0))


def test_csv_round_trip(tmp_path):
    path = tmp_path / "x.csv"
    rows = [[0.1, 1e-300, -3.0], [np.float64(2.0) / 3, 4.0, 5.5]]
    write_csv(path, ["a", "b", "c"], rows, {"seed": 5})
    meta, header, data = read_csv(path)
    assert meta == {"seed": 5}
    assert header == ["a", "b", "c"]
    assert np.array_equal(data, np.array(rows, dtype=float))
    text = path.read_text()
    assert text.startswith(f"# hougaard {__version__}\n")


def test_csv_empty_body():
    text = format_csv(["a"], [])
    assert text.splitlines()[-1] == "a"


def test_ensemble_csv(tmp_path, ens):
    path = tmp_path / "e.csv"
    write_ensemble_csv(path, ens)
    meta, header, data = read_csv(path)
    assert header[0] == "path" and len(header) == ens.times.size + 1
    assert np.array_equal(data[:, 1:], ens.values)
    assert meta["stream"]["master_seed"] == 71


def test_binary_round_trip(tmp_path, ens):
    path = tmp_path / "e.bin"
    write_ensemble_binary(path, ens, {"note": "x"})
    raw = path.read_bytes()
    assert raw[:16] == MAGIC and len(MAGIC) == 16 and raw[16] == 1
    back = read_ensemble_binary(path)
    assert np.array_equal(back.values, ens.values)
    assert np.array_equal(back.times, ens.times)
    assert back.metadata["note"] == "x" and back.metadata["version"] == __version__


def test_binary_two_sided(tmp_path):
    e = extend_two_sided(PowerFamilySpec(3, 1.0, 1.0), 1.0, 0.5, 3, RandomStream(71, 1))
    path = tmp_path / "two.bin"
    write_ensemble_binary(path, e)
    back = read_ensemble_binary(path)
    assert back.grid.two_sided and np.array_equal(back.values, e.values)


def test_binary_rejects_bad_files(tmp_path, ens):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"x" * 64)
    with pytest.raises(ValueError):
        read_ensemble_binary(bad)
    good = tmp_path / "g.bin"
    write_ensemble_binary(good, ens)
    raw = bytearray(good.read_bytes())
    raw[16] = 9
    bad.write_bytes(bytes(raw))
    with pytest.raises(ValueError):
        read_ensemble_binary(bad)
