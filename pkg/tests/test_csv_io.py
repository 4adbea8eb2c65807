import numpy as np
import pytest

from src.core import ParseError, SstMatrix, UniformSignal
from src.infrastructure import csv_io
from src.transforms.sst import make_freq_grid


def test_signal_file(tmp_path):
    path = tmp_path / "signal.csv"
    sig = UniformSignal(np.sin(0.1 * np.arange(500)), 0.002, t0=1.5)
    csv_io.write_signal(path, sig)
    assert path.read_text().splitlines()[0] == "t,value"

    restored = csv_io.read_signal(path)
    assert restored.dt == 0.002
    assert restored.t0 == 1.5
    np.testing.assert_allclose(restored.samples, sig.samples, rtol=1e-8, atol=1e-12)


def test_if_file(tmp_path):
    path = tmp_path / "ridge.csv"
    csv_io.write_if(path, UniformSignal(np.full(8, 0.3), 0.25))
    lines = path.read_text().splitlines()
    assert lines[0] == "t,freq_hz"
    assert lines[1] == "0,0.3"
    assert lines[-1] == "1.75,0.3"
    np.testing.assert_array_equal(csv_io.read_if(path).samples, 0.3)


def test_long_record_at_fine_sampling(tmp_path):
    path = tmp_path / "ecg.csv"
    sig = UniformSignal(np.zeros(150000), 0.002)
    csv_io.write_signal(path, sig)
    assert csv_io.read_signal(path).dt == 0.002


def test_header_is_optional_and_comments_skipped(tmp_path):
    path = tmp_path / "signal.csv"
    path.write_text("# recorded at 4 Hz\n0,1\n0.25,2\n\n0.5,3\n")
    sig = csv_io.read_signal(path)
    np.testing.assert_array_equal(sig.samples, [1, 2, 3])
    assert sig.dt == 0.25


@pytest.mark.parametrize("text, line", [
    ("t,value\n0,1\n0.25\n", 3),
    ("t,value\n0,1\n0.25,abc\n", 3),
    ("0,1,2\n", 1),
])
def test_malformed_rows(tmp_path, text, line):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ParseError) as info:
        csv_io.read_signal(path)
    assert info.value.line_number == line


@pytest.mark.parametrize("text", [
    "t,value\n0,1\n",
    "t,value\n0,1\n0.25,2\n0.25,3\n",
    "t,value\n0,1\n0.25,2\n0.6,3\n",
    "t,value\n0,1\ninf,2\n",
])
def test_invalid_sampling(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ParseError):
        csv_io.read_signal(path)


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        csv_io.read_signal(tmp_path / "absent.csv")


def test_sst_matrix(tmp_path):
    path = tmp_path / "sst.csv"
    values = np.arange(12).reshape(4, 3) * (1 + 1j)
    S = SstMatrix(values, make_freq_grid(8, 4, 0.5), 0.5, 2.0)
    csv_io.write_sst_matrix(path, S)
    freqs, times, magnitude = csv_io.read_sst_matrix(path)
    np.testing.assert_allclose(freqs, S.grid.xi, rtol=1e-8)
    np.testing.assert_allclose(times, [2.0, 2.5, 3.0])
    np.testing.assert_allclose(magnitude, np.abs(values), rtol=1e-8)


def test_sst_matrix_bad_header(tmp_path):
    path = tmp_path / "sst.csv"
    path.write_text("time,1,2\n0.1,1,2\n")
    with pytest.raises(ParseError):
        csv_io.read_sst_matrix(path)


def test_metrics(tmp_path):
    path = tmp_path / "metrics.json"
    metrics = {"segments": {"20": {"e_k": 1.5, "deltas": [1.0, -2.0]}}, "n": 10}
    csv_io.write_metrics(path, metrics)
    assert csv_io.read_metrics(path) == metrics
