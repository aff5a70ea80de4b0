"""Min-cost unit-flow oracles.

Both oracles take edge costs ``x`` and return a :class:`~onmcf.flows.UnitFlow`
for a request. Costs are weighted by the request's load factors (all 1 outside
the machine-scheduling reduction), and the request's unusable edges get zero
capacity.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .flows import PathFlow, UnitFlow, EdgeFlow, decompose, flow_value, superpose
from .network import RESIDUE, TOL, Network, Request, load_factors, unit_capacities


class OracleError(RuntimeError):
    """The oracle's precondition does not hold (infeasible or disconnected request)."""


@dataclass(frozen=True)
class OracleCriteria:
    """``(lam, mu, epsilon)``: approximation, capacity augmentation, granularity."""

    lam: float
    mu: float
    epsilon: float

    def __post_init__(self):
        if max(self.lam, self.mu) < 1:
            raise ValueError("max(lambda, mu) must be at least 1")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")

    @property
    def scale(self) -> float:
        """``max(lambda, mu)``, the divisor in the dual updates."""
        return max(self.lam, self.mu)

    @property
    def alpha(self) -> float:
        return 1 + 1 / self.scale

    @classmethod
    def tri_criteria(cls, m: int) -> OracleCriteria:
        return cls(2.0, 2.0, granularity(m))

    @classmethod
    def exact(cls) -> OracleCriteria:
        return cls(1.0, 1.0, 1.0)


def granularity(m: int) -> float:
    """Path-removal threshold ``1 / (2 m^2)`` for a network with ``m`` edges."""
    return 1.0 / (2 * m * m)


def request_costs(net: Network, r: Request, x: np.ndarray) -> np.ndarray:
    tau, _ = load_factors(net, r)
    return np.asarray(x, dtype=float) * tau


def _unit_flow(net: Network, values: np.ndarray, s: int, t: int) -> UnitFlow:
    f = EdgeFlow(net, values, s, t)
    paths = decompose(f)
    rebuilt = superpose(net, paths, s, t)
    if np.max(np.abs(rebuilt.values - values), initial=0.0) > RESIDUE:
        # decomposition cancelled a cycle; report the cycle-free flow
        f = rebuilt
    return UnitFlow(f, tuple(paths))


def min_cost_unit_flow(net: Network, r: Request, x: np.ndarray) -> UnitFlow:
    """Exact min-cost unit flow in the request's polytope (edge bounds ``c_e / d``).

    Successive shortest paths on the residual network; Bellman-Ford handles the
    negative reverse arcs. Arcs are scanned in edge order, so among equal-cost
    paths the lower edge indices win.
    """
    caps = unit_capacities(net, r).tolist()
    costs = request_costs(net, r, x).tolist()
    if min(costs, default=0.0) < 0:
        raise ValueError("edge costs must be nonnegative")
    s, t = net.node_index(r.source), net.node_index(r.target)
    tails, heads = net.tails.tolist(), net.heads.tolist()
    m, n = net.m, net.n
    flow = [0.0] * m
    # arc 2e: forward on edge e, arc 2e+1: its reverse
    arcs = []
    for e in range(m):
        if caps[e] > 0:
            arcs.append(2 * e)
            arcs.append(2 * e + 1)
    remaining = 1.0
    inf = float("inf")
    while remaining > RESIDUE:
        dist = [inf] * n
        pred = [-1] * n
        dist[s] = 0.0
        for _ in range(n):
            changed = False
            for a in arcs:
                e = a >> 1
                if a & 1:
                    u, v, res, c = heads[e], tails[e], flow[e], -costs[e]
                else:
                    u, v, res, c = tails[e], heads[e], caps[e] - flow[e], costs[e]
                if res <= RESIDUE or dist[u] == inf:
                    continue
                nd = dist[u] + c
                if nd < dist[v] - 1e-13:
                    dist[v] = nd
                    pred[v] = a
                    changed = True
            if not changed:
                break
        if dist[t] == inf:
            break
        path = []
        v = t
        while v != s:
            a = pred[v]
            path.append(a)
            v = heads[a >> 1] if a & 1 else tails[a >> 1]
        delta = remaining
        for a in path:
            e = a >> 1
            delta = min(delta, flow[e] if a & 1 else caps[e] - flow[e])
        for a in path:
            e = a >> 1
            flow[e] = flow[e] - delta if a & 1 else flow[e] + delta
        remaining -= delta
    if remaining > TOL:
        raise OracleError(f"request {r.index} is infeasible (short by {remaining:.3g})")
    values = np.maximum(np.asarray(flow), 0.0)
    values[values <= RESIDUE] = 0.0
    if remaining > 0:
        values /= 1.0 - remaining
    return _unit_flow(net, values, s, t)


def tri_criteria_oracle(net: Network, r: Request, x: np.ndarray) -> UnitFlow:
    """``(2, 2, 1/(2m^2))``-criteria oracle.

    Takes the exact min-cost flow, drops every decomposition path carrying less
    than ``1/(2m^2)``, and stretches the surviving paths so the total is a unit
    flow again. If nothing is dropped the exact flow is returned as is.
    """
    f = min_cost_unit_flow(net, r, x)
    threshold = granularity(net.m)
    removed = [p for p in f.paths if p.amount < threshold]
    if not removed:
        return f
    kept = [p for p in f.paths if p.amount >= threshold]
    g = sum(p.amount for p in removed)
    total = flow_value(f)
    stretch = 1 + g / (total - g)
    scaled = tuple(PathFlow(p.edges, p.amount * stretch) for p in kept)
    s, t = f.edge_flow.source, f.edge_flow.target
    return UnitFlow(superpose(net, scaled, s, t), scaled)


def single_path_oracle(net: Network, r: Request, x: np.ndarray) -> UnitFlow:
    """Exact shortest-path oracle for low demands (``d <= c_min``): one path carrying 1."""
    if r.demand > net.c_min + TOL:
        raise OracleError(f"request {r.index}: demand {r.demand} exceeds c_min {net.c_min}")
    caps = unit_capacities(net, r)
    costs = request_costs(net, r, x)
    s, t = net.node_index(r.source), net.node_index(r.target)
    out: list[list[int]] = [[] for _ in range(net.n)]
    for e, u in enumerate(net.tails.tolist()):
        if caps[e] > 0:
            out[u].append(e)
    heads = net.heads.tolist()
    dist = {s: 0.0}
    pred: dict[int, int] = {}
    done = set()
    heap = [(0.0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == t:
            break
        for e in out[u]:
            v = heads[e]
            nd = d + float(costs[e])
            if v not in done and nd < dist.get(v, float("inf")):
                dist[v] = nd
                pred[v] = e
                heapq.heappush(heap, (nd, v))
    if t not in done:
        raise OracleError(f"request {r.index}: target unreachable")
    path = []
    v = t
    while v != s:
        e = pred[v]
        path.append(e)
        v = int(net.tails[e])
    path.reverse()
    p = PathFlow(tuple(path), 1.0)
    return UnitFlow(superpose(net, [p], s, t), (p,))
