"""Single-commodity flows: conservation, path decomposition, cost and weight."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .network import RESIDUE, TOL, Network


class FlowError(ValueError):
    """A flow violates conservation or a path is malformed."""


@dataclass(frozen=True, eq=False)
class EdgeFlow:
    """Per-edge flow amounts of an ``s -> t`` flow on ``net`` (dense, indexed by edge)."""

    net: Network
    values: np.ndarray
    source: int
    target: int

    def __mul__(self, k: float) -> EdgeFlow:
        return EdgeFlow(self.net, self.values * k, self.source, self.target)

    __rmul__ = __mul__

    def support(self) -> list[int]:
        return np.flatnonzero(self.values > 0).tolist()


@dataclass(frozen=True)
class PathFlow:
    edges: tuple[int, ...]
    amount: float


@dataclass(frozen=True, eq=False)
class UnitFlow:
    """A unit ``s -> t`` flow together with a path decomposition of it."""

    edge_flow: EdgeFlow
    paths: tuple[PathFlow, ...]

    @property
    def values(self) -> np.ndarray:
        return self.edge_flow.values


def zero_flow(net: Network, source: int, target: int) -> EdgeFlow:
    return EdgeFlow(net, np.zeros(net.m), source, target)


def net_outflow(f: EdgeFlow) -> np.ndarray:
    """Outflow minus inflow at every node."""
    net = f.net
    out = np.bincount(net.tails, weights=f.values, minlength=net.n)
    inn = np.bincount(net.heads, weights=f.values, minlength=net.n)
    return out - inn


def check_conservation(f: EdgeFlow, tol: float = TOL) -> None:
    if np.any(f.values < -tol):
        raise FlowError("negative edge flow")
    excess = net_outflow(f)
    inner = np.ones(f.net.n, dtype=bool)
    inner[[f.source, f.target]] = False
    if np.any(np.abs(excess[inner]) > tol):
        bad = int(np.flatnonzero(inner & (np.abs(excess) > tol))[0])
        raise FlowError(f"conservation violated at node {f.net.nodes[bad]!r}")
    if abs(excess[f.source] + excess[f.target]) > tol:
        raise FlowError("source outflow differs from target inflow")
    if excess[f.source] < -tol:
        raise FlowError("negative flow value")


def flow_value(f: EdgeFlow | UnitFlow) -> float:
    if isinstance(f, UnitFlow):
        f = f.edge_flow
    check_conservation(f)
    return float(net_outflow(f)[f.source])


def cost(f: EdgeFlow | UnitFlow, x: np.ndarray) -> float:
    """Linear cost ``sum_e x_e * f(e)``."""
    return float(np.dot(x, f.values))


def weight(f: EdgeFlow | UnitFlow) -> float:
    """Total flow summed over edges (a path of length k carrying 1 weighs k)."""
    return float(np.sum(f.values))


def path_nodes(net: Network, path: Sequence[int], source: int) -> list[int]:
    """Node sequence of ``path`` starting at ``source``; raises if edges don't chain."""
    nodes = [source]
    for e in path:
        if net.tails[e] != nodes[-1]:
            raise FlowError(f"edge {e} does not continue the path")
        nodes.append(int(net.heads[e]))
    return nodes


def is_simple_path(net: Network, path: Sequence[int], source: int, target: int) -> bool:
    try:
        nodes = path_nodes(net, path, source)
    except FlowError:
        return False
    return len(path) > 0 and nodes[-1] == target and len(set(nodes)) == len(nodes)


def superpose(net: Network, paths: Sequence[PathFlow], source: int, target: int) -> EdgeFlow:
    values = np.zeros(net.m)
    for p in paths:
        for e in p.edges:
            values[e] += p.amount
    return EdgeFlow(net, values, source, target)


def decompose(f: EdgeFlow, *, check: bool = True) -> list[PathFlow]:
    """Greedy path peeling.

    Walks from the source along positive edges (lowest index first). Reaching
    the target yields a path, whose bottleneck is subtracted; revisiting a node
    closes a cycle, which is cancelled and dropped. Every round zeroes at least
    one edge, so at most ``m`` paths come out.
    """
    if check:
        check_conservation(f)
    net = f.net
    rest = [float(v) if v > RESIDUE else 0.0 for v in f.values]
    out_edges: list[list[int]] = [[] for _ in range(net.n)]
    for e, u in enumerate(net.tails.tolist()):
        out_edges[u].append(e)
    heads = net.heads.tolist()
    paths: list[PathFlow] = []
    while True:
        node, walk, pos = f.source, [], {f.source: 0}
        while node != f.target:
            nxt = next((e for e in out_edges[node] if rest[e] > 0), None)
            if nxt is None:
                break
            walk.append(nxt)
            node = heads[nxt]
            if node in pos:
                cycle = walk[pos[node]:]
                _subtract(rest, cycle)
                del walk[pos[node]:]
                for v in [k for k, i in pos.items() if i > pos[node]]:
                    del pos[v]
            else:
                pos[node] = len(walk)
        if node != f.target:
            if not walk:
                # source exhausted; whatever remains is cycles
                break
            # dead end left by round-off: drop the residue edge and retry
            rest[walk[-1]] = 0.0
            continue
        amount = _subtract(rest, walk)
        paths.append(PathFlow(tuple(walk), amount))
    return paths


def _subtract(rest: list[float], edges: list[int]) -> float:
    amount = min(rest[e] for e in edges)
    for e in edges:
        rest[e] = rest[e] - amount
        if rest[e] <= RESIDUE:
            rest[e] = 0.0
    return amount
