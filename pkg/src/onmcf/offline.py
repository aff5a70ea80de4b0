"""Brute-force offline all-or-nothing optimum for desk-scale instances.

The offline solution may split flow arbitrarily but must serve every chosen
request at full demand within the original capacities. Joint feasibility of
a request set is a small linear program (HiGHS via scipy); the best set is
found by branch and bound over subsets.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .flows import EdgeFlow, flow_value
from .network import Network, Request, is_feasible, load_factors

FEAS_TOL = 1e-7

MAX_REQUESTS = 12
MAX_NODES = 12
MAX_EDGES = 24


class SizeLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OfflineSolution:
    served: tuple[int, ...]
    total_benefit: float
    witness: dict[int, EdgeFlow]


def _check_size(net: Network, count: int) -> None:
    if count > MAX_REQUESTS or net.n > MAX_NODES or net.m > MAX_EDGES:
        raise SizeLimitError(
            f"instance too large for brute force: {net.n} nodes, {net.m} edges, "
            f"{count} requests (limits {MAX_NODES}/{MAX_EDGES}/{MAX_REQUESTS})"
        )


def concurrent_feasible(net: Network, subset: Sequence[Request]) -> dict[int, EdgeFlow] | None:
    """Witness flows serving all of ``subset`` at full demand, or ``None`` if impossible.

    One flow variable per (request, usable edge). Minimising total flow keeps
    the witness free of circulations.
    """
    _check_size(net, len(subset))
    if not subset:
        return {}
    cols: list[tuple[int, int]] = []
    usage = []
    for k, r in enumerate(subset):
        tau, allowed = load_factors(net, r)
        usage.append(tau)
        cols.extend((k, e) for e in np.flatnonzero(allowed).tolist())
    nvar = len(cols)
    K = len(subset)
    A_eq = np.zeros((K * net.n, nvar))
    b_eq = np.zeros(K * net.n)
    A_ub = np.zeros((net.m, nvar))
    for col, (k, e) in enumerate(cols):
        A_eq[k * net.n + net.tails[e], col] += 1.0
        A_eq[k * net.n + net.heads[e], col] -= 1.0
        A_ub[e, col] = usage[k][e]
    for k, r in enumerate(subset):
        b_eq[k * net.n + net.node_index(r.source)] = r.demand
        b_eq[k * net.n + net.node_index(r.target)] = -r.demand
    res = linprog(
        np.ones(nvar),
        A_ub=A_ub,
        b_ub=np.asarray(net.capacities, dtype=float),
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-9},
    )
    if res.status == 2:
        return None
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    witness = {}
    for k, r in enumerate(subset):
        values = np.zeros(net.m)
        for col, (kk, e) in enumerate(cols):
            if kk == k:
                values[e] = max(res.x[col], 0.0)
        witness[r.index] = EdgeFlow(
            net, values, net.node_index(r.source), net.node_index(r.target)
        )
    if not witness_ok(net, subset, witness):
        raise RuntimeError("LP witness violates the capacity or demand tolerance")
    return witness


def witness_ok(net: Network, subset: Sequence[Request], witness: dict[int, EdgeFlow]) -> bool:
    used = np.zeros(net.m)
    for r in subset:
        f = witness[r.index]
        tau, allowed = load_factors(net, r)
        if np.any(f.values[~allowed] > 0):
            return False
        try:
            if abs(flow_value(f) - r.demand) > FEAS_TOL:
                return False
        except ValueError:
            return False
        used += tau * f.values
    return bool(np.all(used <= net.capacities + FEAS_TOL))


def offline_optimal(net: Network, requests: Sequence[Request]) -> OfflineSolution:
    """Maximum-benefit jointly feasible request set.

    Requests that cannot be routed even alone are dropped first. Ties on
    benefit go to the lexicographically smallest sorted index tuple.
    """
    _check_size(net, len(requests))
    cands = [r for r in requests if is_feasible(net, r, 1.0)]
    suffix = np.concatenate([np.cumsum([r.benefit for r in cands][::-1])[::-1], [0.0]])
    cache: dict[tuple[int, ...], dict | None] = {}

    def feasible(chosen: tuple[int, ...]):
        if chosen not in cache:
            cache[chosen] = concurrent_feasible(net, [cands[i] for i in chosen])
        return cache[chosen]

    best_key: tuple[float, tuple[int, ...]] = (0.0, ())
    best_set: tuple[int, ...] = ()

    def better(total: float, served: tuple[int, ...]) -> bool:
        b, s = best_key
        if total > b + 1e-9:
            return True
        return abs(total - b) <= 1e-9 and served < s

    def search(i: int, chosen: tuple[int, ...], total: float) -> None:
        nonlocal best_key, best_set
        if total + suffix[i] < best_key[0] - 1e-9:
            return
        if i == len(cands):
            served = tuple(cands[k].index for k in chosen)
            if better(total, served):
                best_key, best_set = (total, served), chosen
            return
        with_i = chosen + (i,)
        if feasible(with_i) is not None:
            search(i + 1, with_i, total + cands[i].benefit)
        search(i + 1, chosen, total)

    search(0, (), 0.0)
    witness = feasible(best_set) or {}
    served = tuple(sorted(cands[k].index for k in best_set))
    return OfflineSolution(served, float(sum(cands[k].benefit for k in best_set)), witness)
