"""Trace records, run summaries and ALG-vs-OPT comparison reports."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .engine import (
    Decision,
    EngineConfig,
    EngineState,
    StepMetrics,
    alpha,
    beta_bound,
    beta_bound_bpb,
    benefit,
    max_load,
    run_sequence,
)
from .network import Network
from .offline import offline_optimal
from .scenario import Scenario, min_speedup

TEXT = "text"
MACHINE = "machine-readable"
FORMATS = (TEXT, MACHINE)

TRACE_FIELDS = (
    "request",
    "outcome",
    "oracle_cost",
    "z",
    "load_added",
    "benefit",
    "lp_value",
    "max_load",
    "W",
)


def g12(v: float) -> str:
    return format(float(v), ".12g")


@dataclass(frozen=True)
class TraceRecord:
    request_index: int
    outcome: str
    oracle_cost: float
    z_value: float
    load_added: tuple[tuple[int, float], ...]
    benefit: float
    lp_value: float
    max_load: float
    W: float

    @classmethod
    def build(cls, decision: Decision, m: StepMetrics) -> TraceRecord:
        added = ()
        if decision.load is not None:
            added = tuple((int(e), float(decision.load[e])) for e in np.flatnonzero(decision.load))
        return cls(
            decision.request_index,
            decision.outcome.value,
            decision.oracle_cost,
            decision.z_value,
            added,
            m.benefit,
            m.lp_value,
            m.max_load,
            m.W,
        )

    def to_text(self) -> str:
        added = ",".join(f"{e}:{g12(v)}" for e, v in self.load_added) or "-"
        cols = (
            str(self.request_index),
            self.outcome,
            g12(self.oracle_cost),
            g12(self.z_value),
            added,
            g12(self.benefit),
            g12(self.lp_value),
            g12(self.max_load),
            g12(self.W),
        )
        return "\t".join(cols)

    def to_json(self) -> str:
        record = dict(
            zip(
                TRACE_FIELDS,
                (
                    self.request_index,
                    self.outcome,
                    float(g12(self.oracle_cost)),
                    float(g12(self.z_value)),
                    {str(e): float(g12(v)) for e, v in self.load_added},
                    float(g12(self.benefit)),
                    float(g12(self.lp_value)),
                    float(g12(self.max_load)),
                    float(g12(self.W)),
                ),
            )
        )
        return json.dumps(record, separators=(",", ":"))


def trace_records(state: EngineState, history: list[StepMetrics]) -> list[TraceRecord]:
    return [TraceRecord.build(d, m) for d, m in zip(state.decisions, history)]


def format_trace(records: list[TraceRecord], fmt: str = TEXT) -> str:
    if fmt == MACHINE:
        lines = [r.to_json() for r in records]
    else:
        lines = ["#" + "\t".join(TRACE_FIELDS)] + [r.to_text() for r in records]
    return "\n".join(lines) + "\n"


def summarize(sc: Scenario, cfg: EngineConfig, state: EngineState) -> dict:
    net = sc.network
    counts = Counter(d.outcome.value for d in state.decisions)
    b_max = max((r.benefit for r in sc.requests), default=1.0)
    accepted = [d for d in state.decisions if d.accepted]
    bpb_max = max((d.request.bpb for d in accepted), default=0.0)
    tau_min = min_speedup(sc)
    return {
        "requests": len(sc.requests),
        "accepted": counts.get("accepted", 0),
        "rejected": counts.get("rejected", 0),
        "infeasible": counts.get("infeasible", 0),
        "benefit": benefit(state),
        "max_load": max_load(state, net),
        "alpha": alpha(cfg),
        "beta": beta_bound(cfg, net, b_max, tau_min),
        "beta_bpb": beta_bound_bpb(cfg, state.W, bpb_max, tau_min),
        "W": state.W,
        "min_speedup": tau_min,
    }


def format_mapping(d: dict, fmt: str = TEXT) -> str:
    if fmt == MACHINE:
        clean = {k: (float(g12(v)) if isinstance(v, float) else v) for k, v in d.items()}
        return json.dumps(clean, separators=(",", ":")) + "\n"
    out = []
    for k, v in d.items():
        out.append(f"{k} = {g12(v) if isinstance(v, float) else v}")
    return "\n".join(out) + "\n"


def compare(sc: Scenario, cfg: EngineConfig | None = None) -> dict:
    """Run the online algorithm and the brute-force optimum on one scenario.

    ``ratio`` is OPT/ALG, defined as 1 when both are 0 and infinite when only
    ALG is 0. ``within_alpha`` asserts ``ratio <= alpha + 1e-7``.
    """
    cfg = cfg or sc.engine_config()
    net: Network = sc.network
    state, _ = run_sequence(net, cfg, sc.requests)
    opt = offline_optimal(net, sc.requests)
    alg = benefit(state)
    if opt.total_benefit == 0 and alg == 0:
        ratio = 1.0
    elif alg == 0:
        ratio = float("inf")
    else:
        ratio = opt.total_benefit / alg
    a = alpha(cfg)
    summary = summarize(sc, cfg, state)
    return {
        "alg_benefit": alg,
        "opt_benefit": opt.total_benefit,
        "opt_served": " ".join(map(str, opt.served)) or "-",
        "ratio": ratio,
        "alpha": a,
        "within_alpha": ratio <= a + 1e-7,
        "max_load": summary["max_load"],
        "beta": summary["beta"],
        "within_beta": summary["max_load"] <= summary["beta"] + 1e-9,
        "min_speedup": summary["min_speedup"],
    }
