"""Capacitated directed networks, flow requests and max-flow feasibility screening."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

TOL = 1e-9
# flows below this are floating-point residue
RESIDUE = 1e-12


class NetworkError(ValueError):
    """Raised when a network or request description violates an invariant.

    Attributes:
        errors: every violation found, not just the first one.
    """

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable directed multigraph with edge capacities ``c_e >= 1``.

    Edge identity is the position in ``tails``/``heads``/``capacities``, so
    parallel edges stay distinct. Use :func:`validate_network` to build one.
    """

    nodes: tuple[str, ...]
    tails: np.ndarray
    heads: np.ndarray
    capacities: np.ndarray
    index: Mapping[str, int] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.capacities)

    @property
    def c_min(self) -> float:
        return float(self.capacities.min()) if self.m else 1.0

    @property
    def c_max(self) -> float:
        return float(self.capacities.max()) if self.m else 1.0

    def edges(self) -> list[tuple[str, str, float]]:
        return [
            (self.nodes[u], self.nodes[v], float(c))
            for u, v, c in zip(self.tails, self.heads, self.capacities)
        ]

    def node_index(self, node: str) -> int:
        try:
            return self.index[node]
        except KeyError:
            raise NetworkError([f"unknown node {node!r}"]) from None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.nodes == other.nodes and self.edges() == other.edges()

    def __hash__(self) -> int:
        return hash((self.nodes, tuple(self.edges())))


@dataclass(frozen=True)
class Request:
    """A flow request ``(source, target, demand, benefit)`` arriving at ``index``.

    ``usage`` is only set by the machine-scheduling reduction: a sorted tuple of
    ``(edge, tau)`` pairs listing the edges this request may use and the load
    one unit of its flow puts on each. ``None`` means every edge, at load 1.
    """

    source: str
    target: str
    demand: float
    benefit: float
    index: int = 0
    usage: tuple[tuple[int, float], ...] | None = None

    @property
    def bpb(self) -> float:
        return self.benefit / self.demand


def validate_network(raw: Mapping) -> Network:
    """Build a :class:`Network` from ``{"nodes": [...], "edges": [(tail, head, cap), ...]}``.

    All violations are collected and raised together as a :class:`NetworkError`.
    """
    nodes = [str(v) for v in raw.get("nodes", ())]
    edges = list(raw.get("edges", ()))
    errors: list[str] = []
    if not nodes:
        errors.append("empty node set")
    if len(set(nodes)) != len(nodes):
        errors.append("duplicate node identifiers")
    index = {v: i for i, v in enumerate(nodes)}
    tails, heads, caps = [], [], []
    for k, edge in enumerate(edges):
        try:
            tail, head, cap = edge[0], edge[1], float(edge[2])
        except (TypeError, ValueError, IndexError):
            errors.append(f"edge {k}: malformed {edge!r}")
            continue
        tail, head = str(tail), str(head)
        for end in (tail, head):
            if end not in index:
                errors.append(f"edge {k}: dangling node reference {end!r}")
        if tail == head:
            errors.append(f"edge {k}: self-loop at {tail!r}")
        if not np.isfinite(cap) or cap < 1:
            errors.append(f"edge {k}: capacity {cap!r} below 1")
        tails.append(index.get(tail, -1))
        heads.append(index.get(head, -1))
        caps.append(cap)
    if errors:
        raise NetworkError(errors)
    arrays = (
        np.asarray(tails, dtype=np.intp),
        np.asarray(heads, dtype=np.intp),
        np.asarray(caps, dtype=float),
    )
    for a in arrays:
        a.setflags(write=False)
    return Network(tuple(nodes), *arrays, index=index)


def validate_request(net: Network, r: Request) -> Request:
    errors = []
    for end in (r.source, r.target):
        if end not in net.index:
            errors.append(f"request {r.index}: unknown node {end!r}")
    if r.source == r.target:
        errors.append(f"request {r.index}: source equals target")
    if not np.isfinite(r.demand) or r.demand < 1:
        errors.append(f"request {r.index}: demand {r.demand!r} below 1")
    if not np.isfinite(r.benefit) or r.benefit < 1:
        errors.append(f"request {r.index}: benefit {r.benefit!r} below 1")
    if r.usage is not None:
        if not r.usage:
            errors.append(f"request {r.index}: empty usable edge set")
        for e, tau in r.usage:
            if not 0 <= e < net.m:
                errors.append(f"request {r.index}: unknown edge {e}")
            if not 0 < tau <= 1:
                errors.append(f"request {r.index}: load factor {tau!r} outside (0, 1]")
    if errors:
        raise NetworkError(errors)
    return r


def load_factors(net: Network, r: Request) -> tuple[np.ndarray, np.ndarray]:
    """Per-edge ``(tau, allowed)`` arrays for request ``r``."""
    if r.usage is None:
        return np.ones(net.m), np.ones(net.m, dtype=bool)
    tau = np.ones(net.m)
    allowed = np.zeros(net.m, dtype=bool)
    for e, t in r.usage:
        tau[e] = t
        allowed[e] = True
    return tau, allowed


def unit_capacities(net: Network, r: Request, mu: float = 1.0) -> np.ndarray:
    """Edge bounds of the unit-flow polytope: ``mu * c_e / (d * tau_e)``, 0 where unusable."""
    tau, allowed = load_factors(net, r)
    return np.where(allowed, mu * net.capacities / (r.demand * tau), 0.0)


def max_flow(
    n: int,
    tails: np.ndarray,
    heads: np.ndarray,
    caps: np.ndarray,
    s: int,
    t: int,
) -> tuple[float, np.ndarray]:
    """Edmonds-Karp on real capacities. Returns ``(value, per-edge flow)``."""
    tl, hd, cap = tails.tolist(), heads.tolist(), [float(c) for c in caps]
    m = len(cap)
    flow = [0.0] * m
    # residual arc 2e is edge e forward, 2e+1 its reverse
    out: list[list[int]] = [[] for _ in range(n)]
    for e in range(m):
        out[tl[e]].append(2 * e)
        out[hd[e]].append(2 * e + 1)

    def residual(a: int) -> float:
        e = a >> 1
        return cap[e] - flow[e] if a % 2 == 0 else flow[e]

    value = 0.0
    while True:
        pred = [-1] * n
        seen = [False] * n
        seen[s] = True
        queue = deque([s])
        while queue and not seen[t]:
            u = queue.popleft()
            for a in out[u]:
                v = hd[a >> 1] if a % 2 == 0 else tl[a >> 1]
                if not seen[v] and residual(a) > RESIDUE:
                    seen[v] = True
                    pred[v] = a
                    queue.append(v)
        if not seen[t]:
            return value, np.asarray(flow)
        path = []
        v = t
        while v != s:
            a = pred[v]
            path.append(a)
            v = tl[a >> 1] if a % 2 == 0 else hd[a >> 1]
        delta = min(residual(a) for a in path)
        for a in path:
            if a % 2 == 0:
                flow[a >> 1] += delta
            else:
                flow[a >> 1] -= delta
        value += delta


def max_flow_value(net: Network, s: str, t: str, capacity_scale: float = 1.0) -> float:
    """Value of a maximum ``s -> t`` flow with every capacity multiplied by ``capacity_scale``."""
    si, ti = net.node_index(s), net.node_index(t)
    if si == ti:
        raise ValueError("source and target coincide")
    if capacity_scale <= 0:
        raise ValueError("capacity_scale must be positive")
    value, _ = max_flow(net.n, net.tails, net.heads, net.capacities * capacity_scale, si, ti)
    return value


def request_max_flow(net: Network, r: Request) -> float:
    """Largest demand ``r`` could carry alone, honouring its usable edges and load factors."""
    tau, allowed = load_factors(net, r)
    caps = np.where(allowed, net.capacities / tau, 0.0)
    value, _ = max_flow(
        net.n, net.tails, net.heads, caps, net.node_index(r.source), net.node_index(r.target)
    )
    return value


def is_feasible(net: Network, r: Request, mu: float = 1.0) -> bool:
    """True iff the min cut separating ``r``'s endpoints is at least ``d / mu``."""
    return request_max_flow(net, r) >= r.demand / mu - TOL


def reachable_pairs(net: Network) -> list[tuple[int, int]]:
    """All ordered ``(s, t)`` with ``s != t`` and ``t`` reachable from ``s``."""
    adj: list[list[int]] = [[] for _ in range(net.n)]
    for u, v in zip(net.tails, net.heads):
        adj[u].append(v)
    pairs = []
    for s in range(net.n):
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        pairs.extend((s, t) for t in sorted(seen) if t != s)
    return pairs


def network_from_edges(nodes: Iterable[str], edges: Iterable[tuple[str, str, float]]) -> Network:
    return validate_network({"nodes": list(nodes), "edges": list(edges)})
