import itertools
import json

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from css_skyline import fixtures as F
from css_skyline.causal_graph import (
    CausalGraph, Edge, GraphError, Role, Status, causal_weight, enumerate_paths, graph_from_edges,
    leaky_weight, load_graph, path_status, save_graph,
)


def test_load_fork(tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"nodes": ["A", "X", "Y"], "edges": [
        {"src": "A", "dst": "X", "weight": 1}, {"src": "A", "dst": "Y", "weight": -1, "noise_var": 0.5}]}))
    g = load_graph(p)
    assert g.nodes == ("A", "X", "Y")
    assert g.edge("A", "Y").noise_var == 0.5 and g.edge("A", "X").noise_var == 1.0


def test_cycle_reported(tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"nodes": ["A", "X"], "edges": [
        {"src": "X", "dst": "A", "weight": 1}, {"src": "A", "dst": "X", "weight": 1}]}))
    with pytest.raises(GraphError, match="cycle: (X -> A -> X|A -> X -> A)"):
        load_graph(p)


@pytest.mark.parametrize("nodes,edges,msg", [
    (["A"], [Edge("A", "B", 1.0)], "unknown node"),
    (["A", "B"], [Edge("A", "B", 1.0), Edge("A", "B", 2.0)], "duplicate edge"),
    (["A", "B"], [Edge("A", "B", 0.0)], "zero weight"),
    (["A", "A"], [], "duplicate node"),
    (["A", "B"], [Edge("A", "B", 1.0, -1.0)], "negative noise"),
])
def test_graph_validation(nodes, edges, msg):
    with pytest.raises(GraphError, match=msg):
        CausalGraph(nodes, edges)


def test_round_trip(tmp_path):
    g = F.housing()
    save_graph(g, tmp_path / "h.json")
    back = load_graph(tmp_path / "h.json")
    assert back.to_json() == g.to_json()


def test_housing_has_confounders():
    g = F.housing()
    assert len(g.nodes) == 4
    paths = enumerate_paths(g, "Commute", "Price")
    forks = {n for p in paths for n, r in zip(p.intermediates, p.roles) if r is Role.FORK}
    assert forks == {"Distance_to_city_center", "Scenic_quality"}


def test_paths_chain_fork_collider():
    chain = F.positive_chain()
    (p,) = enumerate_paths(chain, "X", "Y")
    assert p.roles == (Role.MEDIATOR,)
    g = graph_from_edges([("A", "X", 1.0), ("A", "Y", 1.0), ("X", "Y", 1.0)])
    ps = enumerate_paths(g, "X", "Y")
    assert [str(p) for p in ps] == ["X<-A->Y", "X->Y"]
    assert ps[0].roles == (Role.FORK,)
    (c,) = enumerate_paths(F.positive_collider(), "X", "Y")
    assert c.roles == (Role.COLLIDER,)
    with pytest.raises(GraphError):
        enumerate_paths(g, "X", "Q")


def test_path_length_cap():
    g = F.two_confounder_fork()
    assert len(enumerate_paths(g, "X", "Z")) == 3
    assert [str(p) for p in enumerate_paths(g, "X", "Z", max_length=1)] == ["X->Z"]


def test_status_examples():
    fork = F.negative_fork()
    (p,) = enumerate_paths(fork, "X", "Y")
    assert path_status(p, (), fork).status is Status.OPEN
    assert path_status(p, {"A"}, fork).status is Status.BLOCKED_BY_CONDITIONING
    col = F.positive_collider()
    (c,) = enumerate_paths(col, "X", "Y")
    s0 = path_status(c, (), col)
    s1 = path_status(c, {"C"}, col)
    assert s0.status is Status.BLOCKED_BY_COLLIDER
    assert s1.status is Status.PROVISIONALLY_OPEN and s1.sign == -1 and s0.sign == 1
    g = graph_from_edges([("A", "X", 1), ("A", "C", 1), ("B", "C", 1), ("B", "Y", 1)])
    (q,) = enumerate_paths(g, "X", "Y")
    assert path_status(q, {"C"}, g).status is Status.PROVISIONALLY_OPEN
    assert path_status(q, {"A", "C"}, g).status is Status.BLOCKED_BY_CONDITIONING
    with pytest.raises(GraphError):
        path_status(q, {"X"}, g)


def test_collider_activated_by_descendant():
    g = graph_from_edges([("X", "C", 1), ("Y", "C", 1), ("C", "D", 1)])
    p = [p for p in enumerate_paths(g, "X", "Y")][0]
    s = path_status(p, {"D"}, g)
    assert s.status is Status.PROVISIONALLY_OPEN
    assert s.open_nodes == 1 and s.blocked_nodes == 0


def test_weights():
    g = graph_from_edges([("X", "M", 1.0), ("M", "Y", -1.0)])
    (p,) = enumerate_paths(g, "X", "Y")
    assert causal_weight(p) == -1.0
    g2 = graph_from_edges([("X", "M", 0.5), ("M", "Y", -0.5)])
    assert causal_weight(enumerate_paths(g2, "X", "Y")[0]) == -0.25
    d = graph_from_edges([("X", "Y", -1.0)])
    (e,) = enumerate_paths(d, "X", "Y")
    assert leaky_weight(e, path_status(e, (), d), 0.6, 0.4) == -1.0
    m = graph_from_edges([("X", "M", 1.0), ("M", "Y", 1.0)])
    (pm,) = enumerate_paths(m, "X", "Y")
    assert leaky_weight(pm, path_status(pm, {"M"}, m), 0.6, 0.4) == pytest.approx(0.4)
    two = graph_from_edges([("X", "M", 1.0), ("M", "N", -1.0), ("N", "Y", 1.0)])
    (pt,) = enumerate_paths(two, "X", "Y")
    assert leaky_weight(pt, path_status(pt, {"M"}, two), 0.6, 0.4) == pytest.approx(-0.24)
    with pytest.raises(ValueError):
        leaky_weight(pt, path_status(pt, (), two), 0.4, 0.6)


# ---- random small DAGs checked against networkx

@st.composite
def small_dags(draw, max_nodes=7):
    n = draw(st.integers(3, max_nodes))
    names = [f"N{i}" for i in range(n)]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    signs = draw(st.lists(st.sampled_from([1.0, -1.0, 0.5, -0.5]), min_size=len(pairs), max_size=len(pairs)))
    perm = draw(st.permutations(range(n)))
    edges = [(names[perm[i]], names[perm[j]], w) for (i, j), keep, w in zip(pairs, mask, signs) if keep]
    return graph_from_edges(edges, nodes=names)


def _nx(g):
    d = nx.DiGraph()
    d.add_nodes_from(g.nodes)
    d.add_edges_from((e.src, e.dst) for e in g.edges)
    return d


@given(small_dags(), st.data())
def test_paths_match_networkx(g, data):
    a, b = data.draw(st.lists(st.sampled_from(g.nodes), min_size=2, max_size=2, unique=True))
    ours = [p.nodes for p in enumerate_paths(g, a, b)]
    theirs = sorted(tuple(p) for p in nx.all_simple_paths(_nx(g).to_undirected(), a, b))
    assert ours == theirs
    for p in enumerate_paths(g, a, b):
        for k, (n, r) in enumerate(zip(p.intermediates, p.roles)):
            left, right = p.nodes[k], p.nodes[k + 2]
            into = (g.edge(left, n) is not None) + (g.edge(right, n) is not None)
            assert r is {2: Role.COLLIDER, 0: Role.FORK, 1: Role.MEDIATOR}[into]


@given(small_dags(), st.data())
def test_dseparation_matches_networkx(g, data):
    a, b = data.draw(st.lists(st.sampled_from(g.nodes), min_size=2, max_size=2, unique=True))
    rest = [n for n in g.nodes if n not in (a, b)]
    Z = set(data.draw(st.lists(st.sampled_from(rest), unique=True)) if rest else [])
    open_path = any(path_status(p, Z, g).transmits for p in enumerate_paths(g, a, b))
    assert open_path == (not nx.is_d_separator(_nx(g), {a}, {b}, Z))


@given(small_dags(), st.data())
def test_status_invariants(g, data):
    a, b = data.draw(st.lists(st.sampled_from(g.nodes), min_size=2, max_size=2, unique=True))
    rest = [n for n in g.nodes if n not in (a, b)]
    for p in enumerate_paths(g, a, b):
        s0 = path_status(p, (), g)
        assert (s0.status is Status.OPEN) == (not p.colliders)
        for r in range(len(rest) + 1):
            for Z in itertools.combinations(rest, r):
                s = path_status(p, Z, g)
                assert s.open_nodes + s.blocked_nodes == len(p.intermediates)
                active = sum(1 for c in p.colliders if c in Z or g.descendants(c) & set(Z))
                assert s.sign == (-1) ** (p.negative_edges + active)
                if s.status is Status.BLOCKED_BY_CONDITIONING:
                    for extra in rest:
                        assert path_status(p, set(Z) | {extra}, g).status is Status.BLOCKED_BY_CONDITIONING
                lw = leaky_weight(p, s, 1.0, 0.0)
                if s.status is Status.OPEN:
                    assert lw == causal_weight(p)
                if s.blocked_nodes:
                    assert lw == 0.0


def test_parallel_routes_counted():
    for k in range(1, 5):
        edges = []
        for i in range(k):
            edges += [("X", f"M{i}", 1.0), (f"M{i}", "Y", 1.0)]
        g = graph_from_edges(edges)
        assert len(enumerate_paths(g, "X", "Y")) == k
