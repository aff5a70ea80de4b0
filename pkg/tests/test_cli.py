import json

import pytest

from onmcf.cli import main

SCENARIO = """\
[network]
nodes u v
u v 1
u v 1
[requests]
u v 1.5 4
u v 1 1
u v 5 1
u v 1 1
u v 1 1
[config]
mixed_mode = true
"""


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "s.scn"
    path.write_text(SCENARIO)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_text(capsys, scenario):
    code, out, _ = run(capsys, "run", "--scenario", scenario)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("#request\toutcome")
    assert lines[1].split("\t")[:2] == ["1", "accepted"]
    assert lines[3].split("\t")[1] == "infeasible"
    assert "accepted = " in out and "alpha = 1.5" in out


def test_run_machine_readable(capsys, scenario, tmp_path):
    trace = tmp_path / "trace.jsonl"
    summary = tmp_path / "summary.json"
    code, out, _ = run(
        capsys, "run", "--scenario", scenario, "--format", "machine-readable",
        "--trace", str(trace), "--summary", str(summary),
    )
    assert code == 0 and out == ""
    records = [json.loads(line) for line in trace.read_text().splitlines()]
    assert [r["request"] for r in records] == [1, 2, 3, 4, 5]
    assert list(records[0]) == [
        "request", "outcome", "oracle_cost", "z", "load_added", "benefit", "lp_value", "max_load", "W",
    ]
    assert records[0]["load_added"] == {"0": 1.0, "1": 0.5}
    assert json.loads(summary.read_text())["requests"] == 5


@pytest.mark.parametrize("fmt", ["text", "machine-readable"])
def test_trace_is_byte_identical_across_runs(capsys, scenario, fmt):
    first = run(capsys, "run", "--scenario", scenario, "--format", fmt)[1]
    second = run(capsys, "run", "--scenario", scenario, "--format", fmt)[1]
    assert first == second


def test_check_passes(capsys, scenario):
    code, out, _ = run(capsys, "check", "--scenario", scenario)
    assert code == 0
    assert out.rstrip().endswith("ok")
    assert "cost_lower_bound checks=" in out


def test_compare(capsys, scenario):
    code, out, _ = run(capsys, "compare", "--scenario", scenario, "--format", "machine-readable")
    assert code == 0
    result = json.loads(out)
    assert result["within_alpha"] and result["within_beta"]
    # ALG may exceed capacities (up to beta), so it can beat the capacity-bound optimum
    assert result["opt_benefit"] == 4.0 and result["opt_served"] == "1"
    assert result["ratio"] <= result["alpha"]


def test_compare_skips_large_instances(capsys, tmp_path):
    path = tmp_path / "big.scn"
    path.write_text("[network]\nnodes u v\nu v 1\n[requests]\n" + "u v 1 1\n" * 13)
    code, out, err = run(capsys, "compare", "--scenario", str(path))
    assert code == 0 and out == ""
    assert "comparison skipped" in err


def test_gen_round_trip(capsys, tmp_path):
    out_path = tmp_path / "g.scn"
    assert main(["gen", "--seed", "4", "-o", str(out_path)]) == 0
    text = out_path.read_text()
    assert main(["gen", "--seed", "4"]) == 0
    assert capsys.readouterr().out == text
    code, _, _ = run(capsys, "check", "--scenario", str(out_path))
    assert code == 0


def test_gen_sched(capsys):
    code, out, _ = run(capsys, "gen-sched", "--seed", "2", "--machines", "2", "--jobs", "3")
    assert code == 0 and "usage=" in out


@pytest.mark.parametrize(
    "text",
    ["[network]\nnodes u v\nu v 0.5\n", "[requests]\nu v 1 1\n", "not a scenario\n"],
)
def test_input_errors_exit_2(capsys, tmp_path, text):
    path = tmp_path / "bad.scn"
    path.write_text(text)
    code, _, err = run(capsys, "run", "--scenario", str(path))
    assert code == 2
    assert err.startswith("error:")


def test_missing_file_exits_2(capsys, tmp_path):
    code, _, _ = run(capsys, "check", "--scenario", str(tmp_path / "nope.scn"))
    assert code == 2


def test_violation_exits_1(capsys, scenario, monkeypatch):
    from onmcf import cli
    from onmcf.checks import CheckReport, Violation

    report = CheckReport(violations=[Violation(1, "cost_lower_bound", "forced")])
    monkeypatch.setattr(cli, "replay_with_checks", lambda *a, **k: report)
    code, out, _ = run(capsys, "check", "--scenario", scenario)
    assert code == 1
    assert "VIOLATION step 1: cost_lower_bound: forced" in out
