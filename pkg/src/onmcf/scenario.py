"""Scenario files and deterministic scenario generators.

A scenario file has three sections::

    [network]
    nodes s a t
    s a 2
    a t 1.5
    [requests]
    s t 1.5 4
    s t 1 1 usage=0:1,1:0.5
    [config]
    mixed_mode = true

Edge lines are ``tail head capacity``; request lines are
``source target demand benefit`` in arrival order, optionally followed by
``usage=edge:tau,...`` restricting the request to those edges (the
machine-scheduling reduction). Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import EngineConfig
from .network import (
    Network,
    NetworkError,
    Request,
    reachable_pairs,
    validate_network,
    validate_request,
)
from .oracles import OracleCriteria

SECTIONS = ("network", "requests", "config")
BOOL_KEYS = ("mixed_mode", "per_oracle_criteria")
FLOAT_KEYS = ("lambda", "mu", "epsilon")


class ScenarioError(ValueError):
    """Malformed scenario text; ``line`` is 1-based (0 when not tied to a line)."""

    def __init__(self, message: str, line: int = 0, source: str = "<scenario>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


@dataclass
class Scenario:
    network: Network
    requests: list[Request]
    config: dict = field(default_factory=dict)
    seed: int | None = None

    def engine_config(self) -> EngineConfig:
        cfg = self.config
        criteria = None
        if any(k in cfg for k in FLOAT_KEYS):
            base = OracleCriteria.tri_criteria(self.network.m)
            criteria = OracleCriteria(
                float(cfg.get("lambda", base.lam)),
                float(cfg.get("mu", base.mu)),
                float(cfg.get("epsilon", base.epsilon)),
            )
        return EngineConfig.for_network(
            self.network,
            criteria=criteria,
            mixed_mode=bool(cfg.get("mixed_mode", False)),
            per_oracle_criteria=bool(cfg.get("per_oracle_criteria", False)),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.network == other.network
            and self.requests == other.requests
            and self.config == other.config
            and self.seed == other.seed
        )


def _real(token: str, what: str, line: int, source: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ScenarioError(f"{what}: expected a number, got {token!r}", line, source) from None
    if not np.isfinite(value):
        raise ScenarioError(f"{what}: non-finite value {token!r}", line, source)
    return value


def _parse_usage(token: str, line: int, source: str) -> tuple[tuple[int, float], ...]:
    if not token.startswith("usage="):
        raise ScenarioError(f"unexpected token {token!r}", line, source)
    pairs = {}
    for item in token[len("usage="):].split(","):
        try:
            e, tau = item.split(":")
            pairs[int(e)] = float(tau)
        except ValueError:
            raise ScenarioError(f"bad usage entry {item!r}", line, source) from None
    return tuple(sorted(pairs.items()))


def _parse_bool(value: str, line: int, source: str) -> bool:
    v = value.lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ScenarioError(f"expected true/false, got {value!r}", line, source)


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    section = None
    nodes: list[str] | None = None
    edges: list[tuple[str, str, float]] = []
    raw_requests: list[tuple[int, Request]] = []
    config: dict = {}
    seed = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ScenarioError(f"unknown section [{section}]", lineno, source)
            continue
        tokens = line.split()
        if section is None:
            raise ScenarioError("content before the first section header", lineno, source)
        if section == "network":
            if tokens[0] == "nodes":
                if nodes is not None:
                    raise ScenarioError("node list given twice", lineno, source)
                nodes = tokens[1:]
            elif len(tokens) == 3:
                edges.append((tokens[0], tokens[1], _real(tokens[2], "capacity", lineno, source)))
            else:
                raise ScenarioError("edge line must be 'tail head capacity'", lineno, source)
        elif section == "requests":
            if len(tokens) not in (4, 5):
                raise ScenarioError(
                    "request line must be 'source target demand benefit [usage=...]'",
                    lineno,
                    source,
                )
            usage = _parse_usage(tokens[4], lineno, source) if len(tokens) == 5 else None
            r = Request(
                tokens[0],
                tokens[1],
                _real(tokens[2], "demand", lineno, source),
                _real(tokens[3], "benefit", lineno, source),
                len(raw_requests) + 1,
                usage,
            )
            raw_requests.append((lineno, r))
        else:
            if "=" not in line:
                raise ScenarioError("config line must be 'key = value'", lineno, source)
            key, value = (s.strip() for s in line.split("=", 1))
            if key in FLOAT_KEYS:
                config[key] = _real(value, key, lineno, source)
            elif key in BOOL_KEYS:
                config[key] = _parse_bool(value, lineno, source)
            elif key == "seed":
                try:
                    seed = int(value)
                except ValueError:
                    raise ScenarioError(f"seed must be an integer, got {value!r}", lineno, source) from None
            else:
                raise ScenarioError(f"unknown config key {key!r}", lineno, source)
    if nodes is None:
        raise ScenarioError("missing 'nodes' line in [network]", 0, source)
    try:
        net = validate_network({"nodes": nodes, "edges": edges})
    except NetworkError as exc:
        raise ScenarioError("invalid network: " + "; ".join(exc.errors), 0, source) from None
    errors = []
    for lineno, r in raw_requests:
        try:
            validate_request(net, r)
        except NetworkError as exc:
            errors.extend(f"line {lineno}: {e}" for e in exc.errors)
    if errors:
        raise ScenarioError("invalid requests: " + "; ".join(errors), 0, source)
    return Scenario(net, [r for _, r in raw_requests], config, seed)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), str(path))


def _num(v: float) -> str:
    return repr(float(v))


def dump_scenario(sc: Scenario) -> str:
    lines = ["[network]", "nodes " + " ".join(sc.network.nodes)]
    lines += [f"{u} {v} {_num(c)}" for u, v, c in sc.network.edges()]
    lines.append("[requests]")
    for r in sc.requests:
        line = f"{r.source} {r.target} {_num(r.demand)} {_num(r.benefit)}"
        if r.usage is not None:
            line += " usage=" + ",".join(f"{e}:{_num(t)}" for e, t in r.usage)
        lines.append(line)
    lines.append("[config]")
    for key in FLOAT_KEYS:
        if key in sc.config:
            lines.append(f"{key} = {_num(sc.config[key])}")
    for key in BOOL_KEYS:
        if key in sc.config:
            lines.append(f"{key} = {'true' if sc.config[key] else 'false'}")
    if sc.seed is not None:
        lines.append(f"seed = {sc.seed}")
    return "\n".join(lines) + "\n"


def save_scenario(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(dump_scenario(sc))


def _uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return round(float(rng.uniform(lo, hi)), 3)


def generate_random(
    seed: int,
    n: int,
    m: int,
    j: int,
    demand_range: tuple[float, float] = (1.0, 3.0),
    benefit_range: tuple[float, float] = (1.0, 10.0),
    capacity_range: tuple[float, float] = (1.0, 3.0),
    *,
    mixed_mode: bool = False,
) -> Scenario:
    """Random scenario, a pure function of its arguments.

    When ``m >= n - 1`` the first edges chain a random node order so every
    node lies on a common path; the rest are uniform random ordered pairs.
    Request endpoints are drawn from pairs where the target is reachable.
    Values are rounded to 3 decimals.
    """
    if n < 2 or m < 1 or j < 0:
        raise ValueError("need n >= 2, m >= 1, j >= 0")
    for name, (lo, hi) in (
        ("demand", demand_range),
        ("benefit", benefit_range),
        ("capacity", capacity_range),
    ):
        if lo < 1 or hi < lo:
            raise ValueError(f"{name} range {lo, hi} must satisfy 1 <= lo <= hi")
    rng = np.random.default_rng(seed)
    nodes = [f"n{i}" for i in range(n)]
    edges = []
    if m >= n - 1:
        order = rng.permutation(n)
        edges = [(nodes[order[i]], nodes[order[i + 1]]) for i in range(n - 1)]
    while len(edges) < m:
        u, v = rng.choice(n, size=2, replace=False)
        edges.append((nodes[u], nodes[v]))
    net = validate_network(
        {"nodes": nodes, "edges": [(u, v, _uniform(rng, *capacity_range)) for u, v in edges]}
    )
    pairs = reachable_pairs(net)
    requests = []
    for k in range(1, j + 1):
        s, t = pairs[rng.integers(len(pairs))]
        requests.append(
            Request(
                nodes[s],
                nodes[t],
                _uniform(rng, *demand_range),
                _uniform(rng, *benefit_range),
                k,
            )
        )
    config = {"mixed_mode": True} if mixed_mode else {}
    return Scenario(net, requests, config, seed)


@dataclass(frozen=True)
class Job:
    """A job for the scheduling reduction.

    ``machines`` restricts the job to those machine indices (``None``: all);
    ``speedup`` maps machine index to the load one unit of the job adds there.
    """

    demand: float
    benefit: float
    machines: frozenset[int] | None = None
    speedup: Mapping[int, float] | None = None


def machine_scheduling_scenario(machines: Sequence[float], jobs: Sequence[Job]) -> Scenario:
    """Two nodes ``s``, ``t`` and one parallel edge per machine; each job is a request."""
    net = validate_network(
        {"nodes": ["s", "t"], "edges": [("s", "t", float(c)) for c in machines]}
    )
    requests = []
    for k, job in enumerate(jobs, start=1):
        allowed = sorted(job.machines) if job.machines is not None else list(range(net.m))
        if not allowed:
            raise NetworkError([f"job {k}: empty machine set"])
        speed = dict(job.speedup or {})
        usage = tuple((e, float(speed.get(e, 1.0))) for e in allowed)
        if len(allowed) == net.m and all(t == 1.0 for _, t in usage):
            usage = None
        r = Request("s", "t", float(job.demand), float(job.benefit), k, usage)
        requests.append(validate_request(net, r))
    return Scenario(net, requests)


def generate_scheduling(
    seed: int,
    machines: int,
    jobs: int,
    capacity_range: tuple[float, float] = (1.0, 3.0),
    demand_range: tuple[float, float] = (1.0, 4.0),
    benefit_range: tuple[float, float] = (1.0, 10.0),
    speedup_range: tuple[float, float] = (0.5, 1.0),
) -> Scenario:
    """Random restricted-assignment instance with machine-dependent speed-ups."""
    rng = np.random.default_rng(seed)
    caps = [_uniform(rng, *capacity_range) for _ in range(machines)]
    job_list = []
    for _ in range(jobs):
        size = int(rng.integers(1, machines + 1))
        allowed = frozenset(int(e) for e in rng.choice(machines, size=size, replace=False))
        speed = {e: max(_uniform(rng, *speedup_range), 0.001) for e in sorted(allowed)}
        job_list.append(
            Job(_uniform(rng, *demand_range), _uniform(rng, *benefit_range), allowed, speed)
        )
    sc = machine_scheduling_scenario(caps, job_list)
    sc.seed = seed
    return sc


def min_speedup(sc: Scenario) -> float:
    """Smallest load factor over allowed (job, machine) pairs; 1 without restrictions."""
    taus = [t for r in sc.requests if r.usage for _, t in r.usage]
    return min(taus, default=1.0)
