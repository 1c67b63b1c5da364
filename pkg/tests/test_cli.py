import subprocess
import sys
from pathlib import Path

import pytest

from conftest import FOUR_NODE, SINGLE_ARC


def run_cli(*args: str, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "qbdst", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


def strip_wall_time(text: str) -> str:
    return "\n".join(
        line for line in text.splitlines() if not line.startswith("wall_time_s")
    )


@pytest.fixture
def single_arc_file(tmp_path: Path) -> Path:
    path = tmp_path / "single.txt"
    path.write_text(SINGLE_ARC, encoding="utf-8")
    return path


@pytest.fixture
def four_node_file(tmp_path: Path) -> Path:
    path = tmp_path / "four.txt"
    path.write_text(FOUR_NODE, encoding="utf-8")
    return path


def test_solve_single_arc(single_arc_file):
    result = run_cli("solve", str(single_arc_file))
    assert result.returncode == 0
    assert "cost 5" in result.stdout
    assert "lower_bound 5/2" in result.stdout


def test_solve_audit_four_node(four_node_file):
    result = run_cli("solve", str(four_node_file), "--audit", "--oracle")
    assert result.returncode == 0
    assert "cost 4" in result.stdout
    assert "opt 4" in result.stdout
    for line in (
        "payments_consistent true",
        "cost_identity_ok true",
        "dual_feasible_ok true",
        "lemmas_ok true",
    ):
        assert line in result.stdout


def test_solve_validation_failure(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("NODES 3\nROOT 1\nTERMINALS 2 3\nARC 1 2 1\nEND\n", encoding="utf-8")
    result = run_cli("solve", str(path))
    assert result.returncode == 1
    assert "unreachable" in result.stdout


def test_solve_parse_failure(tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text("NODES 2\nROOT 1\nARC 1 2 5\nEND\n", encoding="utf-8")
    result = run_cli("solve", str(path))
    assert result.returncode == 1


def test_solve_baseline_badexample_dual(tmp_path):
    bad = run_cli("gen", "badexample", "--k", "10", "--eps", "1/100")
    assert bad.returncode == 0
    path = tmp_path / "bad10.txt"
    path.write_text(bad.stdout, encoding="utf-8")
    result = run_cli("solve", str(path), "--baseline")
    assert result.returncode == 0
    # faithful baseline dual 2 + (k+2)/100
    assert "dual_total 53/25" in result.stdout


def test_solve_deterministic_output(four_node_file):
    first = run_cli("solve", str(four_node_file), "--audit")
    second = run_cli("solve", str(four_node_file), "--audit")
    assert strip_wall_time(first.stdout) == strip_wall_time(second.stdout)


def test_gen_badexample_schema():
    result = run_cli("gen", "badexample", "--k", "3", "--eps", "1/100")
    assert result.returncode == 0
    assert "NODES 10" in result.stdout
    arc_lines = [l for l in result.stdout.splitlines() if l.startswith("ARC ")]
    assert len(arc_lines) == 14


def test_gen_grid_deterministic():
    a = run_cli("gen", "grid", "--width", "4", "--height", "4", "--seed", "7")
    b = run_cli("gen", "grid", "--width", "4", "--height", "4", "--seed", "7")
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout


def test_gen_reduce_path(tmp_path):
    edges = tmp_path / "path.txt"
    edges.write_text("NODES 3\nEDGE 1 2\nEDGE 2 3\nEND\n", encoding="utf-8")
    result = run_cli("gen", "reduce", str(edges), "--planar")
    assert result.returncode == 0
    assert "NODES 5" in result.stdout
    assert "FAMILY planar_bipartite" in result.stdout


def test_oracle_command(four_node_file):
    result = run_cli("oracle", str(four_node_file))
    assert result.returncode == 0
    assert "opt 4" in result.stdout
    brute = run_cli("oracle", str(four_node_file), "--brute")
    assert "opt 4" in brute.stdout


def test_oracle_guard_exit_code(tmp_path):
    lines = ["NODES 16", "ROOT 1", "TERMINALS " + " ".join(map(str, range(2, 17)))]
    lines += [f"ARC 1 {v} 1" for v in range(2, 17)]
    lines.append("END")
    path = tmp_path / "wide.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    result = run_cli("oracle", str(path))
    assert result.returncode == 3


def test_trace_then_audit(tmp_path, four_node_file):
    trace_path = tmp_path / "trace.jsonl"
    solve_result = run_cli("solve", str(four_node_file), "--trace", str(trace_path))
    assert solve_result.returncode == 0
    audit_result = run_cli("audit", str(four_node_file), "--trace", str(trace_path))
    assert audit_result.returncode == 0
    assert "cost_identity_ok true" in audit_result.stdout


def test_audit_detects_tampered_trace(tmp_path, four_node_file):
    trace_path = tmp_path / "trace.jsonl"
    run_cli("solve", str(four_node_file), "--trace", str(trace_path))
    lines = trace_path.read_text(encoding="utf-8").splitlines()
    lines[1] = lines[1].replace('"epsilon": "1/1"', '"epsilon": "2/1"')
    trace_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    result = run_cli("audit", str(four_node_file), "--trace", str(trace_path))
    assert result.returncode == 2
    assert "payments_consistent false" in result.stdout


def test_audit_hash_mismatch(tmp_path, four_node_file, single_arc_file):
    trace_path = tmp_path / "trace.jsonl"
    run_cli("solve", str(four_node_file), "--trace", str(trace_path))
    result = run_cli("audit", str(single_arc_file), "--trace", str(trace_path))
    assert result.returncode == 1
    assert "mismatch" in result.stderr


def test_bench_directory(tmp_path):
    (tmp_path / "bench").mkdir()
    (tmp_path / "bench" / "a.txt").write_text(SINGLE_ARC, encoding="utf-8")
    (tmp_path / "bench" / "b.txt").write_text(FOUR_NODE, encoding="utf-8")
    result = run_cli("bench", str(tmp_path / "bench"))
    assert result.returncode == 0
    assert "summary instances=2 errors=0 breaches=0" in result.stdout


def test_bench_empty_directory(tmp_path):
    (tmp_path / "empty").mkdir()
    result = run_cli("bench", str(tmp_path / "empty"))
    assert result.returncode == 0
    assert "summary instances=0" in result.stdout


def test_bench_isolates_malformed_file(tmp_path):
    bench = tmp_path / "bench"
    bench.mkdir()
    (bench / "good.txt").write_text(SINGLE_ARC, encoding="utf-8")
    (bench / "broken.txt").write_text("NODES x\n", encoding="utf-8")
    result = run_cli("bench", str(bench))
    assert result.returncode == 0
    assert "broken.txt error" in result.stdout
    assert "good.txt cost=5" in result.stdout


def test_bench_jobs_parallel(tmp_path):
    bench = tmp_path / "bench"
    bench.mkdir()
    for i in range(3):
        (bench / f"inst{i}.txt").write_text(SINGLE_ARC, encoding="utf-8")
    serial = run_cli("bench", str(bench))
    parallel = run_cli("bench", str(bench), "--jobs", "2")
    assert serial.stdout == parallel.stdout


def test_decimal_flag(single_arc_file):
    result = run_cli("solve", str(single_arc_file), "--decimal")
    assert "lower_bound 5/2 (~2.5)" in result.stdout
