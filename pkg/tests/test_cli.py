import json
import os
import subprocess
import sys

import numpy as np
import pytest

from warpzip.cli import EXIT_CORRUPT, EXIT_IO, EXIT_OK, EXIT_USAGE, REPORT_SCHEMA, main
from warpzip.datagen import generate_text_like


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, json.loads(out) if code == EXIT_OK and out.strip() else None


@pytest.fixture
def text_file(tmp_path):
    path = tmp_path / "x.txt"
    path.write_bytes(generate_text_like(200_000, seed=5))
    return path


def test_compress_decompress_round_trip(capsys, tmp_path, text_file):
    packed = tmp_path / "x.wz"
    code, rep = run(capsys, "compress", "--mode", "bit", "--de", text_file, packed)
    assert code == EXIT_OK
    assert rep["schema"] == REPORT_SCHEMA and rep["command"] == "compress"
    assert rep["de_enabled"] is True and rep["mode"] == "bit"
    assert rep["ratio"] == pytest.approx(rep["input_bytes"] / rep["output_bytes"])
    assert rep["output_bytes"] == packed.stat().st_size
    outs = []
    for strategy in ("sc", "mrr"):
        dest = tmp_path / f"x.{strategy}"
        code, rep = run(capsys, "decompress", "--strategy", strategy, packed, dest)
        assert code == EXIT_OK and rep["strategy"] == strategy
        outs.append(dest.read_bytes())
    assert outs[0] == outs[1] == text_file.read_bytes()
    stats = rep["stats"]
    assert sum(stats["rounds_hist"].values()) == stats["groups"]
    # DE streams: every group with a back-reference takes one round
    assert set(stats["full_group_rounds_hist"]) <= {"0", "1"}


def test_block_count_ceiling(capsys, tmp_path, text_file):
    packed = tmp_path / "x.wz"
    code, rep = run(capsys, "compress", "--block-size", 65536, text_file, packed)
    assert code == EXIT_OK and rep["blocks"] == 4
    code, rep = run(capsys, "inspect", packed)
    lens = [b["uncompressed_len"] for b in rep["blocks"]]
    assert lens == [65536] * 3 + [200_000 - 3 * 65536]


def test_inspect_echoes_flags(capsys, tmp_path, text_file):
    packed = tmp_path / "x.wz"
    run(capsys, "compress", "--mode", "bit", "--no-de", "--window", 4096, "--sub-block-seqs", 8,
        "--cwl", 12, text_file, packed)
    code, rep = run(capsys, "inspect", packed)
    h = rep["header"]
    assert (h["mode"], h["de_enabled"], h["window_size"], h["sub_block_seqs"], h["cwl_max"]) == \
        ("bit", False, 4096, 8, 12)
    for b in rep["blocks"]:
        starts = b["sub_block_starts"]
        assert all(x < y for x, y in zip(starts, starts[1:]))
        assert b["max_code_len"] <= 12
        assert b["sub_block_count"] == -(-b["seq_count"] // 8)


def test_byte_mode_inspect(capsys, tmp_path, text_file):
    packed = tmp_path / "x.wz"
    run(capsys, "compress", "--mode", "byte", text_file, packed)
    code, rep = run(capsys, "inspect", packed)
    assert rep["header"]["mode"] == "byte"
    assert all(b["sub_block_count"] == 0 and "litlen_lengths" not in b for b in rep["blocks"])


def test_bad_magic_exit_code(capsys, tmp_path, text_file):
    packed = tmp_path / "x.wz"
    run(capsys, "compress", text_file, packed)
    raw = bytearray(packed.read_bytes())
    raw[0] ^= 0xFF
    packed.write_bytes(bytes(raw))
    assert main(["decompress", str(packed), str(tmp_path / "o")]) == EXIT_CORRUPT
    assert "BadMagic" in capsys.readouterr().err


def test_usage_errors(capsys, tmp_path, text_file):
    assert main(["compress", "--mode", "nibble", str(text_file), "o"]) == EXIT_USAGE
    assert main(["compress", "--block-size", "100", str(text_file), str(tmp_path / "o")]) \
        == EXIT_USAGE  # smaller than the window
    assert main(["gen-nested", "--depth", "3", "--size", "10", "--out", "o"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE


def test_io_error(capsys, tmp_path):
    assert main(["compress", str(tmp_path / "missing"), str(tmp_path / "o")]) == EXIT_IO


def test_gen_nested_and_bench(capsys, tmp_path):
    path = tmp_path / "d32"
    code, rep = run(capsys, "gen-nested", "--depth", 32, "--size", 140_000, "--block-size",
                    65536, "--out", path)
    assert code == EXIT_OK and path.stat().st_size == 140_000
    stats_path = tmp_path / "bench.json"
    code, rep = run(capsys, "bench", "--block-size", 65536, "--repeats", 2, "--workers", 1,
                    "--stats-json", stats_path, path)
    assert code == EXIT_OK
    assert json.loads(stats_path.read_text()) == rep
    for strategy in ("sc", "mrr"):
        run_rep = rep["decompress"][strategy]
        assert len(run_rep["runs_s"]) == 2 and run_rep["median_s"] > 0
    assert set(rep["decompress"]["mrr"]["stats"]["full_group_rounds_hist"]) == {"32"}
    assert rep["decompress"]["mrr"]["stats"]["mean_rounds"] >= 31


def test_gen_text(capsys, tmp_path):
    path = tmp_path / "t"
    code, rep = run(capsys, "gen-text", "--size", 1000, "--seed", 2, "--out", path)
    assert code == EXIT_OK and path.read_bytes() == generate_text_like(1000, seed=2)


def test_quiet_and_workers_env(capsys, tmp_path, text_file, monkeypatch):
    monkeypatch.setenv("WARPZIP_WORKERS", "3")
    packed = tmp_path / "x.wz"
    assert main(["compress", "--quiet", str(text_file), str(packed)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    code, rep = run(capsys, "decompress", packed, tmp_path / "o")
    assert rep["workers"] == 3
    monkeypatch.setenv("WARPZIP_WORKERS", "zero")
    assert main(["decompress", str(packed), str(tmp_path / "o")]) == EXIT_USAGE


def test_module_entry_point(tmp_path):
    src = tmp_path / "in"
    src.write_bytes(np.random.default_rng(0).integers(0, 4, 5000, dtype=np.uint8).tobytes())
    env = dict(os.environ, PYTHONPATH=os.path.join(os.path.dirname(__file__), "..", "src"))
    res = subprocess.run([sys.executable, "-m", "warpzip", "compress", str(src),
                          str(tmp_path / "o")], capture_output=True, text=True, env=env)
    assert res.returncode == 0
    assert json.loads(res.stdout)["input_bytes"] == 5000
