"""The online primal-dual admission algorithm.

Requests are handled strictly in arrival order. A request that cannot be
routed even alone is rejected upfront; otherwise the oracle proposes a unit
flow ``f`` priced at the current edge costs ``x`` and the request is accepted
iff ``d * cost(f) < lambda * b``. Acceptance routes ``d * f`` permanently,
sets the request's dual-side variable ``z`` and raises ``x`` exponentially in
the relative load added to each used edge.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .flows import UnitFlow, cost
from .network import Network, Request, is_feasible, load_factors, validate_request
from .oracles import (
    OracleCriteria,
    OracleError,
    min_cost_unit_flow,
    request_costs,
    single_path_oracle,
    tri_criteria_oracle,
)

PRIMAL_TOL = 1e-7

Oracle = Callable[[Network, Request, np.ndarray], UnitFlow]


class Outcome(str, Enum):
    INFEASIBLE = "infeasible"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


class EngineError(RuntimeError):
    """Raised on out-of-order arrivals or an oracle failing on a feasible request."""


@dataclass(frozen=True)
class EngineConfig:
    """Oracle criteria in force and the oracle dispatch policy.

    With ``mixed_mode`` requests of demand at most ``low_demand_threshold``
    (normally the network's ``c_min``) go to the exact single-path oracle.
    By default such requests are still priced with the global ``criteria``,
    which the exact oracle satisfies as well; ``per_oracle_criteria`` prices
    them with ``(1, 1, 1)`` instead.
    """

    criteria: OracleCriteria
    mixed_mode: bool = False
    low_demand_threshold: float = 1.0
    per_oracle_criteria: bool = False

    @classmethod
    def for_network(
        cls,
        net: Network,
        *,
        criteria: OracleCriteria | None = None,
        mixed_mode: bool = False,
        per_oracle_criteria: bool = False,
    ) -> EngineConfig:
        return cls(
            criteria=criteria or OracleCriteria.tri_criteria(net.m),
            mixed_mode=mixed_mode,
            low_demand_threshold=net.c_min,
            per_oracle_criteria=per_oracle_criteria,
        )

    def in_use(self) -> list[OracleCriteria]:
        if self.mixed_mode and self.per_oracle_criteria:
            return [self.criteria, OracleCriteria.exact()]
        return [self.criteria]

    def worst(self) -> OracleCriteria:
        """Componentwise worst criteria over the oracles that may be dispatched."""
        crits = self.in_use()
        return OracleCriteria(
            max(c.lam for c in crits), max(c.mu for c in crits), min(c.epsilon for c in crits)
        )

    def dispatch(self, r: Request) -> tuple[str, Oracle, OracleCriteria]:
        if self.mixed_mode and r.demand <= self.low_demand_threshold:
            crit = OracleCriteria.exact() if self.per_oracle_criteria else self.criteria
            return "path", single_path_oracle, crit
        return "tri", tri_criteria_oracle, self.criteria


@dataclass(frozen=True, eq=False)
class Decision:
    """Outcome of one request.

    ``load`` is what acceptance added to ``F`` (``d * tau * f``); ``exponents``
    holds ``L_j(e)`` on the edges whose cost was raised.
    """

    request: Request
    outcome: Outcome
    oracle: str | None = None
    criteria: OracleCriteria | None = None
    oracle_flow: UnitFlow | None = None
    oracle_cost: float = 0.0
    z_value: float = 0.0
    benefit_delta: float = 0.0
    weight: float = 0.0
    load: np.ndarray | None = None
    exponents: np.ndarray | None = None

    @property
    def request_index(self) -> int:
        return self.request.index

    @property
    def accepted(self) -> bool:
        return self.outcome is Outcome.ACCEPTED


@dataclass(eq=False)
class EngineState:
    x: np.ndarray
    F: np.ndarray
    z: dict[int, float] = field(default_factory=dict)
    requests: list[Request] = field(default_factory=list)
    decisions: list[Decision] = field(default_factory=list)
    # max over accepted k of d_k * w(f_k)
    W: float = 0.0
    step: int = 0

    @classmethod
    def initial(cls, net: Network) -> EngineState:
        return cls(x=np.zeros(net.m), F=np.zeros(net.m))


@dataclass(frozen=True)
class StepMetrics:
    index: int
    benefit: float
    lp_value: float
    max_load: float
    W: float


def process_request(state: EngineState, net: Network, cfg: EngineConfig, r: Request) -> Decision:
    if r.index != state.step + 1:
        raise EngineError(f"request {r.index} arrived out of order (expected {state.step + 1})")
    validate_request(net, r)
    state.step = r.index
    state.requests.append(r)

    if not is_feasible(net, r, 1.0):
        decision = Decision(r, Outcome.INFEASIBLE)
        state.decisions.append(decision)
        return decision

    name, oracle, crit = cfg.dispatch(r)
    try:
        f = oracle(net, r, state.x)
    except OracleError as exc:
        raise EngineError(f"oracle failed on feasible request {r.index}: {exc}") from exc
    price = cost(f, request_costs(net, r, state.x))

    if not r.demand * price < crit.lam * r.benefit:
        decision = Decision(r, Outcome.REJECTED, name, crit, f, price)
        state.decisions.append(decision)
        return decision

    tau, _ = load_factors(net, r)
    load = r.demand * tau * f.values
    state.F = state.F + load
    z = r.benefit / r.demand - price / crit.scale
    state.z[r.index] = z
    w = float(np.dot(tau, f.values))
    used = f.values > 0
    exponents = np.where(used, load / (crit.scale * net.capacities), 0.0)
    growth = np.exp2(exponents[used])
    x = state.x.copy()
    x[used] = x[used] * growth + (growth - 1) / (r.demand * w)
    state.x = x
    state.W = max(state.W, r.demand * w)
    decision = Decision(
        r, Outcome.ACCEPTED, name, crit, f, price, z, r.benefit, w, load, exponents
    )
    state.decisions.append(decision)
    return decision


def benefit(state: EngineState) -> float:
    return sum(d.benefit_delta for d in state.decisions)


def lp_value(state: EngineState, net: Network) -> float:
    """Covering objective ``sum_k d_k z_k + sum_e c_e x_e`` at the current variables."""
    dz = sum(r.demand * state.z.get(r.index, 0.0) for r in state.requests)
    return dz + float(np.dot(net.capacities, state.x))


def max_load(state: EngineState, net: Network) -> float:
    return float(np.max(state.F / net.capacities, initial=0.0))


def metrics(state: EngineState, net: Network) -> StepMetrics:
    return StepMetrics(state.step, benefit(state), lp_value(state, net), max_load(state, net), state.W)


def run_sequence(
    net: Network,
    cfg: EngineConfig,
    requests: Iterable[Request],
    *,
    on_step: Callable[[EngineState, Decision], None] | None = None,
) -> tuple[EngineState, list[StepMetrics]]:
    state = EngineState.initial(net)
    history = []
    for r in requests:
        decision = process_request(state, net, cfg, r)
        if on_step is not None:
            on_step(state, decision)
        history.append(metrics(state, net))
    return state, history


@dataclass(frozen=True)
class PrimalSlack:
    index: int
    slack: float

    @property
    def ok(self) -> bool:
        return self.slack >= -PRIMAL_TOL


def verify_primal_feasibility(
    state: EngineState, net: Network, requests: Iterable[Request] | None = None
) -> list[PrimalSlack]:
    """Separation check of the covering constraints at the current ``x, z``.

    For each past feasible request the cheapest unit flow in its polytope is
    found exactly, so ``z_k + min_cost >= b_k / d_k`` covers every vertex.
    Infeasible requests have an empty polytope and no constraints.
    """
    if requests is None:
        requests = state.requests
    screened = {d.request_index for d in state.decisions if d.outcome is Outcome.INFEASIBLE}
    report = []
    for r in requests:
        if r.index in screened or not is_feasible(net, r, 1.0):
            continue
        f = min_cost_unit_flow(net, r, state.x)
        cheapest = cost(f, request_costs(net, r, state.x))
        report.append(PrimalSlack(r.index, state.z.get(r.index, 0.0) + cheapest - r.bpb))
    return report


def alpha(cfg: EngineConfig) -> float:
    """Competitive ratio ``1 + 1/max(lambda, mu)`` (worst over dispatched oracles)."""
    return max(c.alpha for c in cfg.in_use())


def beta_bound(cfg: EngineConfig, net: Network, b_max: float, tau_min: float = 1.0) -> float:
    """Capacity augmentation bound ``max(l,mu) * log2(1 + m^2 * 3 l c_max b_max / eps)``.

    ``tau_min`` is the smallest load factor (machine scheduling); it enters squared,
    once through the demand bound and once through the cost bound.
    """
    crit = cfg.worst()
    m = net.m
    inner = m * m * 3 * crit.lam * net.c_max * b_max / (crit.epsilon * tau_min**2)
    return crit.scale * math.log2(1 + inner)


def beta_bound_bpb(cfg: EngineConfig, W: float, bpb_max: float, tau_min: float = 1.0) -> float:
    """Augmentation bound in terms of the running ``W`` and the max benefit per unit demand."""
    crit = cfg.worst()
    return crit.scale * math.log2(1 + W * 3 * crit.lam / crit.epsilon * bpb_max / tau_min)


def with_indices(requests: Iterable[Request]) -> list[Request]:
    """Renumber requests 1, 2, ... in the given order."""
    return [replace(r, index=k) for k, r in enumerate(requests, start=1)]
