"""Signed, weighted causal DAGs and per-path d-separation analysis."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    weight: float
    noise_var: float = 1.0

    @property
    def sign(self) -> int:
        return 1 if self.weight > 0 else -1


class CausalGraph:
    """Immutable DAG; acyclicity, edge uniqueness and nonzero weights are checked on construction."""

    def __init__(self, nodes: Iterable[str], edges: Iterable[Edge]):
        self._nodes = tuple(nodes)
        if len(set(self._nodes)) != len(self._nodes):
            raise GraphError("duplicate node names")
        if any(not n for n in self._nodes):
            raise GraphError("node names must be non-empty")
        known = set(self._nodes)
        seen = {}
        for e in edges:
            for end in (e.src, e.dst):
                if end not in known:
                    raise GraphError(f"edge {e.src}->{e.dst} references unknown node {end!r}")
            if e.src == e.dst:
                raise GraphError(f"self-loop on {e.src!r}")
            if (e.src, e.dst) in seen:
                raise GraphError(f"duplicate edge {e.src}->{e.dst}")
            if e.weight == 0:
                raise GraphError(f"edge {e.src}->{e.dst} has zero weight")
            if e.noise_var < 0:
                raise GraphError(f"edge {e.src}->{e.dst} has negative noise variance")
            seen[(e.src, e.dst)] = e
        self._edges = dict(seen)
        self._out = {n: [] for n in self._nodes}
        self._in = {n: [] for n in self._nodes}
        for e in self._edges.values():
            self._out[e.src].append(e)
            self._in[e.dst].append(e)
        cycle = self._find_cycle()
        if cycle:
            raise GraphError("graph has a cycle: " + " -> ".join(cycle))

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def edges(self) -> list[Edge]:
        return list(self._edges.values())

    def edge(self, src: str, dst: str) -> Edge | None:
        return self._edges.get((src, dst))

    def in_edges(self, node: str) -> list[Edge]:
        return list(self._in[node])

    def out_edges(self, node: str) -> list[Edge]:
        return list(self._out[node])

    def neighbors(self, node: str) -> list[str]:
        return sorted({e.dst for e in self._out[node]} | {e.src for e in self._in[node]})

    def _require(self, node: str) -> None:
        if node not in self._out:
            raise GraphError(f"unknown node {node!r}")

    def _find_cycle(self) -> list[str] | None:
        WHITE, GREY, BLACK = 0, 1, 2
        color = {n: WHITE for n in self._nodes}
        stack: list[str] = []

        def visit(n):
            color[n] = GREY
            stack.append(n)
            for e in self._out[n]:
                if color[e.dst] == GREY:
                    return stack[stack.index(e.dst):] + [e.dst]
                if color[e.dst] == WHITE:
                    found = visit(e.dst)
                    if found:
                        return found
            stack.pop()
            color[n] = BLACK
            return None

        for n in self._nodes:
            if color[n] == WHITE:
                found = visit(n)
                if found:
                    return found
        return None

    def topological_order(self) -> list[str]:
        indeg = {n: len(self._in[n]) for n in self._nodes}
        ready = [n for n in self._nodes if indeg[n] == 0]
        order = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for e in self._out[n]:
                indeg[e.dst] -= 1
                if indeg[e.dst] == 0:
                    ready.append(e.dst)
        return order

    def descendants(self, node: str) -> frozenset[str]:
        return self._descendants[node]

    @cached_property
    def _descendants(self) -> dict[str, frozenset[str]]:
        out = {}
        for n in reversed(self.topological_order()):
            acc = set()
            for e in self._out[n]:
                acc.add(e.dst)
                acc |= out[e.dst]
            out[n] = frozenset(acc)
        return out

    def to_json(self) -> dict:
        return {
            "nodes": list(self._nodes),
            "edges": [
                {"src": e.src, "dst": e.dst, "weight": e.weight, "noise_var": e.noise_var}
                for e in self._edges.values()
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CausalGraph":
        try:
            nodes = [str(n) for n in obj["nodes"]]
            edges = [
                Edge(str(e["src"]), str(e["dst"]), float(e["weight"]), float(e.get("noise_var", 1.0)))
                for e in obj["edges"]
            ]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph object: {exc}") from None
        return cls(nodes, edges)

    def __repr__(self):
        return f"CausalGraph(nodes={len(self._nodes)}, edges={len(self._edges)})"


def load_graph(path) -> CausalGraph:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise GraphError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path}: invalid JSON: {exc}") from None
    return CausalGraph.from_json(obj)


def save_graph(g: CausalGraph, path) -> None:
    Path(path).write_text(json.dumps(g.to_json(), indent=2) + "\n", encoding="utf-8")


class Role(str, Enum):
    MEDIATOR = "mediator"
    FORK = "fork"
    COLLIDER = "collider"


@dataclass(frozen=True)
class PathStep:
    edge: Edge
    forward: bool  # True when the edge points away from the path start


@dataclass(frozen=True)
class CausalPath:
    nodes: tuple[str, ...]
    steps: tuple[PathStep, ...]
    roles: tuple[Role, ...] = field(init=False)

    def __post_init__(self):
        roles = []
        for k in range(1, len(self.nodes) - 1):
            into_from_left = self.steps[k - 1].forward
            into_from_right = not self.steps[k].forward
            if into_from_left and into_from_right:
                roles.append(Role.COLLIDER)
            elif not into_from_left and not into_from_right:
                roles.append(Role.FORK)
            else:
                roles.append(Role.MEDIATOR)
        object.__setattr__(self, "roles", tuple(roles))

    @property
    def endpoints(self) -> tuple[str, str]:
        return self.nodes[0], self.nodes[-1]

    @property
    def intermediates(self) -> tuple[str, ...]:
        return self.nodes[1:-1]

    @property
    def colliders(self) -> list[str]:
        return [n for n, r in zip(self.intermediates, self.roles) if r is Role.COLLIDER]

    @property
    def negative_edges(self) -> int:
        return sum(1 for s in self.steps if s.edge.weight < 0)

    def __str__(self):
        parts = [self.nodes[0]]
        for s, n in zip(self.steps, self.nodes[1:]):
            parts.append("->" if s.forward else "<-")
            parts.append(n)
        return "".join(parts)


def enumerate_paths(g: CausalGraph, a_i: str, a_j: str, max_length: int | None = None) -> list[CausalPath]:
    """All simple paths between two nodes in the skeleton of ``g``.

    Paths are sorted lexicographically by node sequence. ``max_length``
    caps the number of edges per path.
    """
    g._require(a_i)
    g._require(a_j)
    if a_i == a_j:
        return []
    out: list[CausalPath] = []
    nodes = [a_i]
    steps: list[PathStep] = []
    visited = {a_i}

    def dfs(u):
        if max_length is not None and len(steps) >= max_length:
            return
        for v in g.neighbors(u):
            if v in visited:
                continue
            e = g.edge(u, v)
            step = PathStep(e, True) if e is not None else PathStep(g.edge(v, u), False)
            nodes.append(v)
            steps.append(step)
            if v == a_j:
                out.append(CausalPath(tuple(nodes), tuple(steps)))
            else:
                visited.add(v)
                dfs(v)
                visited.discard(v)
            nodes.pop()
            steps.pop()

    dfs(a_i)
    out.sort(key=lambda p: p.nodes)
    return out


class Status(str, Enum):
    OPEN = "open"
    PROVISIONALLY_OPEN = "provisionally_open"
    BLOCKED_BY_COLLIDER = "blocked_by_collider"
    BLOCKED_BY_CONDITIONING = "blocked_by_conditioning"


@dataclass(frozen=True)
class PathStatus:
    status: Status
    sign: int
    open_nodes: int
    blocked_nodes: int
    colliders_active: bool = True

    @property
    def transmits(self) -> bool:
        return self.status in (Status.OPEN, Status.PROVISIONALLY_OPEN)


def _collider_active(g: CausalGraph, c: str, Z: frozenset[str]) -> bool:
    return c in Z or not g.descendants(c).isdisjoint(Z)


def path_status(p: CausalPath, Z: Iterable[str], g: CausalGraph) -> PathStatus:
    Z = frozenset(Z)
    a, b = p.endpoints
    if a in Z or b in Z:
        raise GraphError(f"path endpoint conditioned: {sorted(Z & {a, b})}")
    blocked = sum(1 for n in p.intermediates if n in Z)
    opened = len(p.intermediates) - blocked
    colliders = p.colliders
    active = [c for c in colliders if _collider_active(g, c, Z)]
    # A collider counts toward the sign only once it transmits.
    parity = p.negative_edges + len(active)
    sign = -1 if parity % 2 else 1
    if any(n in Z for n, r in zip(p.intermediates, p.roles) if r is not Role.COLLIDER):
        st = Status.BLOCKED_BY_CONDITIONING
    elif len(active) < len(colliders):
        st = Status.BLOCKED_BY_COLLIDER
    elif colliders:
        st = Status.PROVISIONALLY_OPEN
    else:
        st = Status.OPEN
    return PathStatus(st, sign, opened, blocked, len(active) == len(colliders))


def causal_weight(p: CausalPath) -> float:
    w = 1.0
    for s in p.steps:
        w *= s.edge.weight
    return w


def leaky_weight(p: CausalPath, status: PathStatus, lambda_o: float, lambda_b: float) -> float:
    """Causal weight attenuated per open (lambda_o) and conditioned (lambda_b) intermediate node.

    Paths with a collider that ``Z`` leaves inactive carry nothing.
    """
    check_lambdas(lambda_o, lambda_b)
    if not status.colliders_active:
        return 0.0
    return causal_weight(p) * lambda_o ** status.open_nodes * lambda_b ** status.blocked_nodes


def check_lambdas(lambda_o: float, lambda_b: float) -> None:
    if not (0.0 < lambda_o <= 1.0 and 0.0 <= lambda_b < 1.0 and lambda_b < lambda_o):
        raise ValueError(f"need 0 <= lambda_b < lambda_o <= 1, got ({lambda_o}, {lambda_b})")


def graph_from_edges(edges: Sequence[tuple], nodes: Sequence[str] | None = None) -> CausalGraph:
    """Build a graph from ``(src, dst, weight[, noise_var])`` tuples."""
    es = [Edge(*e) for e in edges]
    if nodes is None:
        seen = []
        for e in es:
            for n in (e.src, e.dst):
                if n not in seen:
                    seen.append(n)
        nodes = seen
    return CausalGraph(nodes, es)
