import json

import numpy as np
import pytest

from setassoc import ExperimentConfig, SweepRow, emit_report, load_trace, save_trace
from setassoc.io import TraceParseError, make_meta, render_report


def write(tmp_path, data: bytes, name="t"):
    p = tmp_path / name
    p.write_bytes(data)
    return p


def test_text_basic(tmp_path):
    assert load_trace(write(tmp_path, b"1\n2\n1\n")).tolist() == [1, 2, 1]
    assert load_trace(write(tmp_path, b"# header\n5\n\n  6 \n# x\n7")).tolist() == [5, 6, 7]


def test_empty_files(tmp_path):
    assert load_trace(write(tmp_path, b"")).tolist() == []
    assert load_trace(write(tmp_path, b""), "BINARY").tolist() == []


def test_text_error_offset(tmp_path):
    with pytest.raises(TraceParseError) as e:
        load_trace(write(tmp_path, b"12\n# ok\nabc\n"))
    assert e.value.offset == 8
    with pytest.raises(TraceParseError) as e:
        load_trace(write(tmp_path, b"1\n-4\n"))
    assert e.value.offset == 2


def test_binary_truncated(tmp_path):
    with pytest.raises(TraceParseError) as e:
        load_trace(write(tmp_path, b"\x01" * 19), "BINARY")
    assert e.value.offset == 16


def test_binary_little_endian(tmp_path):
    p = tmp_path / "b"
    save_trace([1, 258], p, "BINARY")
    assert p.read_bytes() == b"\x01" + b"\x00" * 7 + b"\x02\x01" + b"\x00" * 6


@pytest.mark.parametrize("fmt", ["TEXT", "BINARY"])
def test_round_trip_million(tmp_path, fmt):
    tr = np.random.default_rng(0).integers(0, 2**63 - 1, 10**6, dtype=np.int64)
    p = tmp_path / f"big.{fmt}"
    save_trace(tr, p, fmt)
    back = load_trace(p, fmt)
    assert np.array_equal(tr, back)
    save_trace(back, tmp_path / "again", fmt)
    assert (tmp_path / "again").read_bytes() == p.read_bytes()


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        load_trace(write(tmp_path, b"1\n"), "XML")


def test_csv_header_contract():
    text = render_report([], "CSV", row_type=SweepRow)
    assert text == "alpha,delta,k_prime,misses_sa,misses_fa,bad_evictions,flush_evictions,ratio,seed\n"


def test_csv_full_precision(tmp_path):
    r = SweepRow(2, 0.1 + 0.2, 10, 7, 3, 4, 0, 7 / 3, 5)
    p = tmp_path / "r.csv"
    emit_report([r], p, "CSV")
    line = p.read_text().splitlines()[1].split(",")
    assert float(line[1]) == 0.1 + 0.2 and float(line[7]) == 7 / 3


def test_json_meta_echoes_config(tmp_path):
    cfg = ExperimentConfig(k=64, alpha_grid=(2, 8), seeds=(4, 5))
    p = tmp_path / "r.json"
    emit_report([SweepRow(2, 0.5, 32, 1, 1, 0, 0, 1.0, 4)], p, "JSON", make_meta(cfg, cfg.seeds))
    doc = json.loads(p.read_text())
    assert doc["meta"]["config"] == json.loads(json.dumps(cfg.as_dict()))
    assert doc["meta"]["seeds"] == [4, 5]
    assert set(doc["meta"]["versions"]) == {"setassoc", "numpy", "python"}
    assert doc["rows"][0]["ratio"] == 1.0


def test_infinite_ratio_serializes():
    text = render_report([SweepRow(2, 0.5, 4, 3, 0, 0, 0, float("inf"), 0)], "JSON")
    assert json.loads(text)["rows"][0]["ratio"] == "inf"


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit_report([], tmp_path / "missing" / "r.csv", "CSV", row_type=SweepRow)
