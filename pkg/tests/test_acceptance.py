"""Acceptance suite: one PASS/FAIL line per criterion, printed and collected
into the terminal summary."""

import subprocess
import sys
from collections import Counter

import numpy as np
import pytest

import conftest
from bruteforce import path_min_cost
from onmcf.checks import doubling_below_linear, replay_with_checks
from onmcf.engine import EngineConfig, run_sequence
from onmcf.flows import cost, flow_value
from onmcf.network import Request, is_feasible, reachable_pairs, unit_capacities
from onmcf.oracles import granularity, min_cost_unit_flow, tri_criteria_oracle
from onmcf.report import MACHINE, TEXT, compare, format_trace, trace_records
from onmcf.scenario import dump_scenario, generate_random, generate_scheduling

RATIO_TOL = 1e-7


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


# ---------------------------------------------------------------- corpus


def _generic(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    m = int(rng.integers(max(1, n - 1), 11))
    return generate_random(seed, n, m, int(rng.integers(1, 11)))


def _tight(seed):
    # two near-unit parallel links and benefits close to 1: many rejections
    return generate_random(seed, 2, 2, 10, (1, 2), (1, 1.2), (1, 1.2))


def _low_high(seed):
    # demands straddle c_min so both oracles are dispatched
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    return generate_random(seed, n, int(rng.integers(n, 9)), 10, (1, 2.5), (1, 4), (1, 2))


def _scheduling(seed):
    rng = np.random.default_rng(seed)
    return generate_scheduling(seed, int(rng.integers(2, 5)), int(rng.integers(1, 11)))


BASE = (
    [("generic", _generic(s)) for s in range(120)]
    + [("tight", _tight(1000 + s)) for s in range(60)]
    + [("scheduling", _scheduling(2000 + s)) for s in range(40)]
)
MIXED = [("low_high", _low_high(3000 + s)) for s in range(60)] + [
    (kind, sc) for kind, sc in BASE[::3]
]


def _mixed_configs(sc):
    net = sc.network
    return [
        EngineConfig.for_network(net, mixed_mode=True),
        EngineConfig.for_network(net, mixed_mode=True, per_oracle_criteria=True),
    ]


@pytest.fixture(scope="module")
def base_reports():
    return [replay_with_checks(sc.network, sc.engine_config(), sc.requests) for _, sc in BASE]


@pytest.fixture(scope="module")
def mixed_reports():
    out = []
    for _, sc in MIXED:
        for cfg in _mixed_configs(sc):
            out.append((sc, cfg, replay_with_checks(sc.network, cfg, sc.requests)))
    return out


def _tally(reports, names):
    counts, fails = Counter(), []
    for rep in reports:
        for name in names:
            counts[name] += rep.counts[name]
            fails += rep.failed(name)
    return counts, fails


def _check_group(number, title, reports, names):
    counts, fails = _tally(reports, names)
    exercised = all(counts[n] > 0 for n in names)
    ok = exercised and not fails
    detail = ", ".join(f"{n}={counts[n]}" for n in names)
    if fails:
        detail += f"; {len(fails)} violations, first: {fails[0]}"
    record(number, title, ok, f"{len(reports)} replays; {detail}")
    assert exercised, f"some checks never ran: {detail}"
    assert not fails, "\n".join(map(str, fails[:10]))


def test_corpus_exercises_every_outcome(base_reports):
    outcomes = Counter(d.outcome.value for rep in base_reports for d in rep.state.decisions)
    assert outcomes["accepted"] > 100
    assert outcomes["rejected"] > 50
    assert outcomes["infeasible"] > 0


# ---------------------------------------------------------------- criterion 1


def test_c01_oracle_criteria():
    rng = np.random.default_rng(101)
    cases = bad = 0
    first = ""
    while cases < 1200:
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, 17))
        net = generate_random(int(rng.integers(1 << 30)), n, m, 0).network
        pairs = reachable_pairs(net)
        s, t = pairs[rng.integers(len(pairs))]
        r = Request(net.nodes[s], net.nodes[t], float(rng.uniform(1, 3 * net.c_max)), 1.0, 1)
        if not is_feasible(net, r, 1):
            continue
        x = rng.uniform(0, 5, m) * (rng.random(m) < 0.8)
        cases += 1
        f = tri_criteria_oracle(net, r, x)
        exact = cost(min_cost_unit_flow(net, r, x), x)
        grain = granularity(m)
        problems = []
        if abs(flow_value(f) - 1) > 1e-9:
            problems.append(f"|f| = {flow_value(f)!r}")
        if min(p.amount for p in f.paths) < grain - 1e-12:
            problems.append("path below 1/(2m^2)")
        if np.any(f.values > 2 * net.capacities / r.demand + 1e-9):
            problems.append("edge flow above 2 c_e / d")
        if cost(f, x) > (1 + 1 / (2 * m - 1)) * exact + 1e-9:
            problems.append(f"cost {cost(f, x)!r} vs exact {exact!r}")
        if problems:
            bad += 1
            first = first or f"n={n} m={m} d={r.demand}: " + "; ".join(problems)
    record(1, "tri-criteria oracle unit/granular/augmenting/approximate", bad == 0,
           f"{cases} feasible cases, {bad} failures{'; ' + first if first else ''}")
    assert bad == 0, first


# ---------------------------------------------------------------- criterion 2


def test_c02_min_cost_matches_brute_force():
    rng = np.random.default_rng(202)
    cases = 0
    worst = 0.0
    while cases < 400:
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, 9))
        net = generate_random(int(rng.integers(1 << 30)), n, m, 0).network
        pairs = reachable_pairs(net)
        s, t = pairs[rng.integers(len(pairs))]
        r = Request(net.nodes[s], net.nodes[t], float(rng.uniform(1, 2 * net.c_max)), 1.0, 1)
        if not is_feasible(net, r, 1):
            continue
        x = rng.uniform(0, 5, m)
        best = path_min_cost(net, s, t, unit_capacities(net, r), x)
        if best is None:  # feasible only within the 1e-9 screening slack
            continue
        cases += 1
        worst = max(worst, abs(cost(min_cost_unit_flow(net, r, x), x) - best))
    ok = worst <= 1e-6
    record(2, "min-cost unit flow matches path-enumeration LP", ok,
           f"{cases} graphs, max |diff| = {worst:.3g}")
    assert ok


# ---------------------------------------------------------------- criteria 3-8


def test_c03_primal_dual_gap(base_reports):
    _check_group(3, "primal-dual gap per step and cumulative", base_reports,
                 ["gap_step", "gap_cumulative"])


def test_c04_primal_feasibility(base_reports):
    _check_group(4, "primal feasibility after every step", base_reports, ["primal_feasibility"])


def test_c05_beta_feasibility(base_reports):
    _check_group(5, "load within beta and the running-W bound", base_reports,
                 ["beta", "beta_running", "beta_bpb"])


def test_c06_alpha_competitive():
    corpus = [(k, sc) for k, sc in BASE if len(sc.requests) <= 10]
    worst, bad, first = 0.0, 0, ""
    for kind, sc in corpus:
        cfg = sc.engine_config()
        res = compare(sc, cfg)
        assert res["alpha"] == 1.5
        worst = max(worst, res["ratio"])
        if res["alg_benefit"] < res["opt_benefit"] / 1.5 - RATIO_TOL:
            bad += 1
            first = first or f"{kind} seed {sc.seed}: ALG {res['alg_benefit']} OPT {res['opt_benefit']}"
    ok = bad == 0 and len(corpus) >= 200
    record(6, "ALG >= OPT / 1.5 against brute force", ok,
           f"{len(corpus)} scenarios, worst OPT/ALG = {worst:.6g}{'; ' + first if first else ''}")
    assert ok, first


def test_c07_cost_bounds(base_reports):
    _check_group(7, "cost lower/upper bounds and exponent growth", base_reports,
                 ["cost_lower_bound", "cost_upper_bound", "exponent_growth", "exponent_le_1"])


def test_c08_structural(base_reports):
    _check_group(8, "all-or-nothing, monotone F, no retraction", base_reports,
                 ["all_or_nothing", "monotone_F", "monotone_x", "non_retraction", "z_sign"])


# ---------------------------------------------------------------- criterion 9


def test_c09_doubling_below_linear():
    rng = np.random.default_rng(909)
    cs = np.exp(rng.uniform(np.log(1e-3), np.log(1e6), 100_000))
    xs = cs * rng.random(100_000)
    xs[:100] = 0.0
    xs[100:200] = cs[100:200]
    bad = sum(not doubling_below_linear(float(c), float(x)) for c, x in zip(cs, xs))
    record(9, "c (2^(x/c) - 1) <= x on [0, c]", bad == 0, f"100000 pairs, {bad} failures")
    assert bad == 0


# ---------------------------------------------------------------- criterion 10


def test_c10_mixed_mode(mixed_reports):
    names = [
        "gap_step", "gap_cumulative", "primal_feasibility", "beta", "beta_running",
        "beta_bpb", "cost_lower_bound", "cost_upper_bound", "exponent_growth", "all_or_nothing", "monotone_F",
        "non_retraction", "single_path",
    ]
    reports = [rep for _, _, rep in mixed_reports]
    counts, fails = _tally(reports, names)
    low = high = low_accepted = 0
    for sc, cfg, rep in mixed_reports:
        for d in rep.state.decisions:
            if d.oracle == "path":
                low += 1
                low_accepted += d.accepted
            elif d.oracle == "tri":
                high += 1
    ok = not fails and low_accepted > 0 and high > 0 and counts["single_path"] == low
    detail = (f"{len(reports)} replays, {low} low-demand oracle calls "
              f"({low_accepted} accepted, all single-path), {high} high-demand calls")
    if fails:
        detail += f"; {len(fails)} violations, first: {fails[0]}"
    record(10, "mixed-demand dispatch passes criteria 3-8", ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- criterion 11


def test_c11_determinism(tmp_path):
    differing = 0
    for _, sc in BASE + MIXED:
        for fmt in (TEXT, MACHINE):
            a = format_trace(trace_records(*run_sequence(sc.network, sc.engine_config(), sc.requests)), fmt)
            b = format_trace(trace_records(*run_sequence(sc.network, sc.engine_config(), sc.requests)), fmt)
            differing += a != b
    # separate interpreters with different hash seeds
    cross = 0
    for i, (_, sc) in enumerate((BASE + MIXED)[::40]):
        path = tmp_path / f"s{i}.scn"
        path.write_text(dump_scenario(sc))
        outs = set()
        for hash_seed in ("1", "2"):
            for fmt in (TEXT, MACHINE):
                proc = subprocess.run(
                    [sys.executable, "-m", "onmcf", "run", "--scenario", str(path), "--format", fmt],
                    capture_output=True, check=True, env={"PYTHONHASHSEED": hash_seed, "PATH": ""},
                )
                outs.add((fmt, proc.stdout))
        cross += len(outs) != 2
    ok = differing == 0 and cross == 0
    record(11, "byte-identical traces across runs", ok,
           f"{2 * len(BASE + MIXED)} in-process pairs, {len(range(0, len(BASE + MIXED), 40))} "
           f"scenarios across processes; {differing + cross} mismatches")
    assert ok
