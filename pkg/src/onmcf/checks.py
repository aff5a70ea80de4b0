"""Replay a request sequence while asserting the algorithm's analytic guarantees.

Every property is checked after every step. Violations are collected rather
than raised so a single replay reports everything that went wrong.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .engine import (
    PRIMAL_TOL,
    Decision,
    EngineConfig,
    EngineState,
    StepMetrics,
    alpha,
    benefit,
    beta_bound,
    beta_bound_bpb,
    lp_value,
    metrics,
    process_request,
    verify_primal_feasibility,
)
from .flows import flow_value, is_simple_path
from .network import TOL, Network, Request, load_factors

GAP_TOL = 1e-7
BOUND_TOL = 1e-9
GRAIN_TOL = 1e-12


@dataclass(frozen=True)
class Violation:
    step: int
    check: str
    detail: str

    def __str__(self) -> str:
        return f"step {self.step}: {self.check}: {self.detail}"


@dataclass
class CheckReport:
    violations: list[Violation] = field(default_factory=list)
    counts: Counter = field(default_factory=Counter)
    history: list[StepMetrics] = field(default_factory=list)
    state: EngineState | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def failed(self, check: str) -> list[Violation]:
        return [v for v in self.violations if v.check == check]


class InvariantMonitor:
    """Wraps :func:`process_request` and checks each step against the previous one."""

    def __init__(self, net: Network, cfg: EngineConfig, *, primal: bool = True):
        self.net = net
        self.cfg = cfg
        self.primal = primal
        self.report = CheckReport()
        self.worst = cfg.worst()
        self.alpha = alpha(cfg)
        # running maxima feeding the live augmentation bounds
        self.b_max = 1.0
        self.tau_min = 1.0
        self.x_cap = 0.0
        self.bpb_max = 0.0
        self.accepted_tau_min = 1.0

    def _check(self, step: int, name: str, ok: bool, detail: str = "") -> None:
        self.report.counts[name] += 1
        if not ok:
            self.report.violations.append(Violation(step, name, detail))

    def step(self, state: EngineState, r: Request) -> Decision:
        net = self.net
        x0, F0 = state.x.copy(), state.F.copy()
        log0 = list(state.decisions)
        P0, B0 = lp_value(state, net), benefit(state)

        d = process_request(state, net, self.cfg, r)
        j = r.index
        self.b_max = max(self.b_max, r.benefit)
        tau, allowed = load_factors(net, r)
        self.tau_min = min(self.tau_min, float(tau[allowed].min()))

        P1, B1 = lp_value(state, net), benefit(state)
        dP, dB = P1 - P0, B1 - B0

        # non-preemption: the log only grows, earlier entries untouched
        self._check(
            j,
            "non_retraction",
            len(state.decisions) == len(log0) + 1
            and all(a is b for a, b in zip(state.decisions, log0)),
            "decision log rewritten",
        )
        self._check(j, "monotone_F", bool(np.all(state.F >= F0)), "accumulated flow decreased")
        self._check(j, "monotone_x", bool(np.all(state.x >= x0)), "edge cost decreased")

        if d.oracle_flow is not None:
            self._check_oracle(j, d, r)

        if d.accepted:
            self._check_accepted(j, d, r, x0, F0, state, dP, dB)
        else:
            self._check(
                j,
                "all_or_nothing",
                np.array_equal(state.F, F0) and d.load is None,
                "rejected request changed F",
            )
            self._check(j, "z_sign", j not in state.z, "rejected request has z")
            self._check(
                j,
                "gap_step",
                dP == 0 and dB == 0 and np.array_equal(state.x, x0),
                f"rejection changed P by {dP!r}",
            )

        self._check(
            j,
            "gap_cumulative",
            P1 <= self.alpha * B1 + GAP_TOL,
            f"value {P1!r} > alpha * benefit {self.alpha * B1!r}",
        )
        self._check_cost_lower_bound(j, state)
        self._check_beta(j, state)
        if self.primal:
            for s in verify_primal_feasibility(state, net):
                self._check(
                    j, "primal_feasibility", s.ok, f"request {s.index} slack {s.slack!r}"
                )
        self.report.history.append(metrics(state, net))
        return d

    def _check_oracle(self, j: int, d: Decision, r: Request) -> None:
        f = d.oracle_flow
        crit = d.criteria
        net = self.net
        self._check(j, "oracle_unit", abs(flow_value(f) - 1) <= TOL, f"|f| = {flow_value(f)!r}")
        grain = min((p.amount for p in f.paths), default=0.0)
        self._check(
            j,
            "oracle_granularity",
            grain >= crit.epsilon - GRAIN_TOL,
            f"path amount {grain!r} < eps {crit.epsilon!r}",
        )
        tau, allowed = load_factors(net, r)
        bound = np.where(allowed, crit.mu * net.capacities / (r.demand * tau), 0.0)
        self._check(
            j,
            "oracle_augmentation",
            bool(np.all(f.values <= bound + TOL)),
            "edge flow above mu * c_e / d",
        )
        if d.oracle == "path":
            self._check(
                j,
                "single_path",
                len(f.paths) == 1
                and is_simple_path(net, f.paths[0].edges, f.edge_flow.source, f.edge_flow.target)
                and f.paths[0].amount == 1.0,
                "low-demand request not routed on one simple path",
            )

    def _check_accepted(self, j, d: Decision, r: Request, x0, F0, state, dP, dB) -> None:
        net = self.net
        crit = d.criteria
        tau, _ = load_factors(net, r)
        f = d.oracle_flow
        self._check(
            j,
            "all_or_nothing",
            np.array_equal(d.load, r.demand * tau * f.values)
            and np.array_equal(state.F, F0 + d.load)
            and abs(flow_value(f) - 1) <= TOL,
            "accepted flow is not d times a unit flow",
        )
        self._check(j, "z_sign", state.z.get(j, 0.0) > 0, f"z = {state.z.get(j)!r}")
        self._check(j, "accept_threshold", r.demand * d.oracle_cost < crit.lam * r.benefit)
        step_alpha = crit.alpha
        self._check(
            j,
            "gap_step",
            abs(dB - r.benefit) <= TOL and dP <= step_alpha * r.benefit + GAP_TOL,
            f"dP {dP!r} > alpha * dF {step_alpha * dB!r}",
        )
        used = f.values > 0
        L = d.exponents[used]
        self._check(j, "exponent_le_1", bool(np.all(L <= 1 + TOL)), f"max L = {L.max()!r}")
        small = L <= 1
        lhs = (np.exp2(L[small]) - 1) * net.capacities[used][small]
        rhs = d.load[used][small] / crit.scale
        self._check(
            j,
            "exponent_growth",
            bool(np.all(lhs <= rhs + BOUND_TOL)),
            f"max excess {np.max(lhs - rhs, initial=0.0)!r}",
        )
        caps = 3 * crit.lam * r.benefit / (crit.epsilon * tau[used] * r.demand)
        self._check(
            j,
            "cost_upper_bound",
            bool(np.all(state.x[used] <= caps + BOUND_TOL)),
            f"max excess {np.max(state.x[used] - caps)!r}",
        )
        self.x_cap = max(self.x_cap, float(caps.max()))
        self.bpb_max = max(self.bpb_max, r.bpb)
        self.accepted_tau_min = min(self.accepted_tau_min, float(tau[used].min()))

    def _check_cost_lower_bound(self, j: int, state: EngineState) -> None:
        if state.W <= 0:
            return
        scale = self.worst.scale
        lower = (np.exp2(state.F / (scale * self.net.capacities)) - 1) / state.W
        self._check(
            j,
            "cost_lower_bound",
            bool(np.all(state.x >= lower - BOUND_TOL)),
            f"max deficit {np.max(lower - state.x)!r}",
        )

    def _check_beta(self, j: int, state: EngineState) -> None:
        net = self.net
        ratio = state.F / net.capacities
        beta = beta_bound(self.cfg, net, self.b_max, self.tau_min)
        self._check(
            j, "beta", bool(np.all(ratio <= beta + TOL)), f"load {ratio.max()!r} > beta {beta!r}"
        )
        running = self.worst.scale * math.log2(1 + state.W * self.x_cap)
        self._check(
            j,
            "beta_running",
            bool(np.all(ratio <= running + TOL)),
            f"load {ratio.max()!r} > running bound {running!r}",
        )
        bpb = beta_bound_bpb(self.cfg, state.W, self.bpb_max, self.accepted_tau_min)
        self._check(
            j,
            "beta_bpb",
            bool(np.all(ratio <= bpb + TOL)),
            f"load {ratio.max()!r} > bpb bound {bpb!r}",
        )


def replay_with_checks(
    net: Network, cfg: EngineConfig, requests: Iterable[Request], *, primal: bool = True
) -> CheckReport:
    monitor = InvariantMonitor(net, cfg, primal=primal)
    state = EngineState.initial(net)
    for r in requests:
        monitor.step(state, r)
    monitor.report.state = state
    return monitor.report


def doubling_below_linear(c: float, x: float) -> bool:
    """``c * (2^(x/c) - 1) <= x`` for ``x`` in ``[0, c]``, up to 1e-12."""
    return c * (2.0 ** (x / c) - 1) <= x + 1e-12


__all__ = [
    "CheckReport",
    "InvariantMonitor",
    "PRIMAL_TOL",
    "Violation",
    "doubling_below_linear",
    "replay_with_checks",
]
