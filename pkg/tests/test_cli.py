import json

import numpy as np
import pytest

from incoherent_frames import io as fio
from incoherent_frames.cli import OUT_ENV, analyze_frame, build_parser, main


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_design_complex(tmp_path, capsys):
    code, out, _ = run_cli(["design", "--variant", "c", "--m", "4", "--n", "7", "--iters", "200",
                            "--seeds", "2", "--out", str(tmp_path)], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["coherence"] <= 0.3540
    F, meta = fio.load_frame(tmp_path / "frame.json")
    assert meta["manifest"] == "manifest.json"
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "ok" and manifest["exit_code"] == 0
    assert manifest["parameters"]["seeds"] == 2 and manifest["version"]
    assert json.loads((tmp_path / "report.json").read_text())["manifest"] == "manifest.json"
    assert (tmp_path / "trajectory.csv").read_text().startswith("iteration,coherence")


def test_design_unital(tmp_path, capsys):
    code, _, _ = run_cli(["design", "--variant", "u", "--m", "25", "--n", "50", "--gamma", "0.01",
                          "--iters", "3", "--out", str(tmp_path)], capsys)
    assert code == 0
    F, _ = fio.load_frame(tmp_path / "frame.json")
    assert np.allclose(np.abs(F), 0.2, atol=1e-10)


def test_design_fixed_support(tmp_path, capsys):
    code, _, _ = run_cli(["design", "--variant", "sr", "--m", "5", "--n", "9", "--sparsity-mode", "fixed",
                          "--zeros-per-column", "2", "--iters", "5", "--out", str(tmp_path)], capsys)
    assert code == 0
    F, _ = fio.load_frame(tmp_path / "frame.json")
    assert np.all((F == 0).sum(axis=0) >= 2)


@pytest.mark.parametrize("argv", [
    ["design", "--variant", "c", "--m", "4", "--n", "7", "--gamma", "0.1"],
    ["design", "--variant", "r", "--m", "4", "--n", "7", "--lambda", "1"],
    ["design", "--variant", "sr", "--m", "4", "--n", "7", "--zeros-per-column", "1"],
    ["design", "--variant", "c", "--m", "7", "--n", "4"],
    ["bench", "--random", "--frame", "x.json"],
])
def test_usage_errors(argv, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path))
    code, _, err = run_cli(argv, capsys)
    assert code == 2 and "error" in err
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "usage_error" and manifest["error"]


def test_missing_m_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["design", "--variant", "c", "--n", "7"])
    assert exc.value.code == 2


def test_select_hadamard(tmp_path, capsys):
    code, out, _ = run_cli(["select", "--source", "hadamard", "--m", "6", "--n", "16", "--out", str(tmp_path)],
                           capsys)
    assert code == 0
    assert json.loads(out)["coherence"] == pytest.approx(1 / 3, abs=1e-12)
    pat, src = fio.load_pattern(tmp_path / "pattern.json")
    assert pat.m == 6 and src == "hadamard"
    F, _ = fio.load_frame(tmp_path / "frame.json")
    assert F.shape == (6, 16)


def test_select_oracle_check(tmp_path, capsys):
    code, out, _ = run_cli(["select", "--source", "fourier", "--m", "5", "--n", "16", "--runs", "20",
                            "--oracle-check", "--out", str(tmp_path)], capsys)
    assert code == 0 and json.loads(out)["matches_oracle"]


def test_select_custom_and_bad_hadamard(tmp_path, capsys):
    from incoherent_frames.harmonic import sylvester_hadamard
    fio.save_frame(tmp_path / "h8.json", sylvester_hadamard(8))
    code, out, _ = run_cli(["select", "--source", f"custom:{tmp_path / 'h8.json'}", "--m", "4", "--runs", "5",
                            "--out", str(tmp_path)], capsys)
    assert code == 0 and json.loads(out)["n"] == 8
    code, _, err = run_cli(["select", "--source", "hadamard", "--m", "6", "--n", "40", "--out", str(tmp_path)],
                           capsys)
    assert code == 1 and "supports n = 2^k" in err
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "error"


def test_analyze(tmp_path, capsys):
    fio.save_frame(tmp_path / "eye.json", np.eye(3))
    code, out, _ = run_cli(["analyze", str(tmp_path / "eye.json"), "--out", str(tmp_path)], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["coherence"] == 0 and d["welch_gap"] == 0
    ang = np.array([0, 2, 4]) * np.pi / 3
    etf = analyze_frame(np.vstack([np.cos(ang), np.sin(ang)]))
    assert etf["tightness_gap"] <= 1e-9 and etf["coherence"] == pytest.approx(etf["welch_bound"], abs=1e-12)
    (tmp_path / "bad.json").write_text('{"m": 2,, }')
    code, _, err = run_cli(["analyze", str(tmp_path / "bad.json"), "--out", str(tmp_path)], capsys)
    assert code == 1 and "byte offset 8" in err


def test_bench(tmp_path, capsys):
    args = ["bench", "--random", "--m", "10", "--n", "30", "--s-range", "1..3", "--trials", "1",
            "--seed", "3", "--out", str(tmp_path)]
    assert run_cli(args, capsys)[0] == 0
    first = (tmp_path / "bench.csv").read_bytes()
    assert run_cli(args, capsys)[0] == 0
    assert (tmp_path / "bench.csv").read_bytes() == first
    code, _, err = run_cli(["bench", "--random", "--m", "4", "--n", "8", "--s-range", "1..5",
                            "--out", str(tmp_path)], capsys)
    assert code == 2 and "exceeds m" in err


def test_env_out_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    code, _, _ = run_cli(["select", "--source", "fourier", "--m", "3", "--n", "8", "--runs", "2"], capsys)
    assert code == 0
    assert (tmp_path / "env" / "pattern.json").exists()
    assert (tmp_path / "env" / "manifest.json").exists()


def test_hidden_oracle(tmp_path, capsys):
    assert "oracle" not in build_parser().format_help()
    code, out, _ = run_cli(["oracle", "--n", "16", "--m", "2", "3", "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = json.loads(out)
    assert [r["m"] for r in rows] == [2, 3]
