import itertools

import networkx as nx
import numpy as np
import pytest

from conftest import ba_graph, make_graph, path_graph, random_graph
from persona_embed.egosplit import (
    ORIGINAL,
    PERSONA,
    build_persona_graph,
    cluster_ego,
    ego_network,
    persona_edge_bound_check,
    read_persona_map,
    write_persona_map,
)
from persona_embed.walks import WalkConfig, generate_corpus

TRIANGLE = [(0, 1), (1, 2), (2, 0)]


def components_bruteforce(n, edges):
    """Components by repeated relaxation of a label array."""
    label = list(range(n))
    changed = True
    while changed:
        changed = False
        for u, v in edges:
            m = min(label[u], label[v])
            if label[u] != m or label[v] != m:
                label[u] = label[v] = m
                changed = True
    groups = {}
    for i, lab in enumerate(label):
        groups.setdefault(lab, set()).add(i)
    return sorted(groups.values(), key=min)


def check_persona_graph(g, pg):
    """Exhaustive checks against the definition; returns nothing, asserts."""
    arcs = list(zip(g.src.tolist(), g.dst.tolist(), g.weight.tolist()))
    if not g.directed:
        arcs += [(v, u, w) for u, v, w in arcs]
    kinds = pg.edge_kind
    p_arcs = {}
    for s, d, w, k in zip(pg.graph.src.tolist(), pg.graph.dst.tolist(), pg.graph.weight.tolist(), kinds):
        assert (s, d) not in p_arcs
        p_arcs[(s, d)] = (w, int(k))

    # partition: clusters of each node split its neighbour set
    for v in range(g.n_nodes):
        nbrs = set(g.all_neighbors(v).tolist())
        clusters = [pg.p2c[p] for p in pg.v2p[v]]
        assert sum(len(c) for c in clusters) == len(nbrs)
        assert set().union(*clusters) == nbrs
        assert len(pg.v2p[v]) >= 1
        if nbrs:
            assert len(pg.v2p[v]) <= len(nbrs)
        for p in pg.v2p[v]:
            assert pg.owner[p] == v
    assert sum(len(ps) for ps in pg.v2p) == pg.n_personas

    # inheritance: exactly one persona pair per original arc, weight preserved
    total_in, total_out = 0.0, 0.0
    for u, v, w in arcs:
        matches = [
            (p, q)
            for p in pg.v2p[u]
            for q in pg.v2p[v]
            if v in pg.p2c[p] and u in pg.p2c[q]
        ]
        assert len(matches) == 1
        assert p_arcs[matches[0]] == (w, ORIGINAL)
        total_in += w
    total_out = sum(w for w, k in p_arcs.values() if k == ORIGINAL)
    assert total_out == pytest.approx(total_in, rel=0, abs=1e-9)
    assert sum(1 for _, k in p_arcs.values() if k == ORIGINAL) == len(arcs)

    # persona cliques with degree-scaled weights
    k_out = np.zeros(pg.n_personas)
    for (s, d), (w, k) in p_arcs.items():
        if k == ORIGINAL:
            k_out[s] += 1
    n_persona_arcs = 0
    for v in range(g.n_nodes):
        ps = list(pg.v2p[v])
        for a, b in itertools.permutations(ps, 2):
            w, k = p_arcs[(a, b)]
            assert k == PERSONA
            assert w == pytest.approx(pg.lam * max(k_out[a], 1))
            n_persona_arcs += 1
    assert n_persona_arcs == pg.n_persona_edges


def test_ego_network_examples():
    eg = ego_network(make_graph(TRIANGLE, labels=["A", "B", "C"]), 0)
    assert eg.labels == ["B", "C"] and eg.n_edges == 1
    eg = ego_network(make_graph([(0, 1), (1, 2)], labels=["A", "B", "C"]), 1)
    assert eg.labels == ["A", "C"] and eg.n_edges == 0
    eg = ego_network(make_graph([(0, i) for i in range(1, 5)]), 0)
    assert eg.n_nodes == 4 and eg.n_edges == 0


def test_ego_network_directed_uses_in_and_out():
    g = make_graph([(0, 1), (2, 0), (1, 2)], directed=True)
    eg = ego_network(g, 0)
    assert eg.n_nodes == 2 and eg.n_edges == 1


def test_ego_network_isolated():
    g = make_graph([(0, 1)], n=3)
    assert ego_network(g, 2).n_nodes == 0
    assert cluster_ego(ego_network(g, 2)) == []


@pytest.mark.parametrize("method", ["cc", "lp"])
def test_cluster_ego_simple(method):
    two = make_graph([], n=2)
    assert cluster_ego(two, method) == [{0}, {1}]
    edge = make_graph([(0, 1)])
    assert cluster_ego(edge, method) == [{0, 1}]


@pytest.mark.parametrize("method", ["cc", "lp"])
def test_cluster_ego_two_triangles(method):
    edges = TRIANGLE + [(3, 4), (4, 5), (5, 3)]
    eg = make_graph(edges)
    assert cluster_ego(eg, method, seed=3) == components_bruteforce(6, edges)


def test_cluster_ego_lp_partitions_and_is_deterministic():
    rng = np.random.default_rng(0)
    for _ in range(20):
        eg = random_graph(rng, 25, 0.15)
        a = cluster_ego(eg, "lp", seed=5)
        assert a == cluster_ego(eg, "lp", seed=5)
        assert sum(len(c) for c in a) == eg.n_nodes
        assert set().union(*a) == set(range(eg.n_nodes))
        # label propagation never merges across components
        comps = components_bruteforce(eg.n_nodes, list(eg.edge_set()))
        for c in a:
            assert any(c <= comp for comp in comps)


def test_cluster_ego_lp_splits_two_cliques_joined_by_edge():
    k5a = list(itertools.combinations(range(5), 2))
    k5b = [(u + 5, v + 5) for u, v in k5a]
    eg = make_graph(k5a + k5b + [(0, 5)])
    assert cluster_ego(eg, "cc") == [set(range(10))]
    assert cluster_ego(eg, "lp", seed=1) == [set(range(5)), set(range(5, 10))]


def test_unknown_method():
    with pytest.raises(ValueError):
        cluster_ego(make_graph(TRIANGLE), "louvain")


def test_bridge_node_splits_into_two_roles():
    # C joins triangle {A,B} and the D-E-F path
    labels = ["A", "B", "C", "D", "E", "F"]
    g = make_graph([(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (2, 5), (3, 4), (4, 5)], labels=labels)
    pg = build_persona_graph(g, "cc", 0.5)
    c1, c2 = pg.v2p[2]
    assert pg.p2c[c1] == {0, 1}
    assert pg.p2c[c2] == {3, 4, 5}
    assert len(pg.v2p[0]) == 1 and pg.p2c[pg.v2p[0][0]] == {1, 2}
    out = {labels[pg.owner[d]] for s, d, k in zip(pg.graph.src, pg.graph.dst, pg.edge_kind) if s == c1 and k == ORIGINAL}
    assert out == {"A", "B"}
    out = {labels[pg.owner[d]] for s, d, k in zip(pg.graph.src, pg.graph.dst, pg.edge_kind) if s == c2 and k == ORIGINAL}
    assert out == {"D", "E", "F"}
    check_persona_graph(g, pg)


def test_triangle_no_split():
    g = make_graph(TRIANGLE)
    pg = build_persona_graph(g, "cc", 0.5)
    assert pg.n_personas == 3
    assert pg.n_persona_edges == 0
    assert sorted(zip(pg.owner[pg.graph.src], pg.owner[pg.graph.dst])) == sorted(
        TRIANGLE + [(v, u) for u, v in TRIANGLE]
    )


def test_path3_split():
    g = make_graph([(0, 1), (1, 2)], labels=["A", "B", "C"])
    pg = build_persona_graph(g, "cc", 0.5)
    assert pg.n_personas == 4
    b1, b2 = pg.v2p[1]
    assert pg.p2c[b1] == {0} and pg.p2c[b2] == {2}
    arcs = {(s, d): w for s, d, w, k in zip(pg.graph.src, pg.graph.dst, pg.graph.weight, pg.edge_kind) if k == PERSONA}
    assert arcs == {(b1, b2): 0.5, (b2, b1): 0.5}
    check_persona_graph(g, pg)


def test_negative_lambda():
    with pytest.raises(ValueError):
        build_persona_graph(path_graph(3), "cc", -0.1)


def test_isolated_node_keeps_one_persona():
    g = make_graph([(0, 1)], n=3)
    pg = build_persona_graph(g, "cc", 0.5)
    assert len(pg.v2p[2]) == 1 and pg.p2c[pg.v2p[2][0]] == frozenset()


def test_directed_in_only_persona_gets_floor_weight():
    # 0 -> 1 and 2 -> 1: node 1 splits into two personas that only receive edges
    g = make_graph([(0, 1), (2, 1)], directed=True)
    pg = build_persona_graph(g, "cc", 0.5)
    assert len(pg.v2p[1]) == 2
    ws = pg.graph.weight[pg.edge_kind == PERSONA]
    assert ws.tolist() == [0.5, 0.5]
    check_persona_graph(g, pg)


def test_directed_reciprocal_edges_inherited_separately():
    g = make_graph([(0, 1), (1, 0), (1, 2)], directed=True)
    pg = build_persona_graph(g, "cc", 1.0)
    check_persona_graph(g, pg)


@pytest.mark.parametrize("method", ["cc", "lp"])
def test_invariants_random_graphs(method):
    rng = np.random.default_rng(11)
    for i in range(15):
        if i % 3 == 0:
            g = ba_graph(rng, 30, 2)
        else:
            g = random_graph(rng, 25, 0.12, directed=bool(i % 2))
        pg = build_persona_graph(g, method, float(rng.uniform(0, 2)), seed=i)
        check_persona_graph(g, pg)


def test_cc_clusters_match_networkx():
    rng = np.random.default_rng(5)
    g = random_graph(rng, 40, 0.1)
    pg = build_persona_graph(g, "cc", 0.5)
    nxg = nx.Graph(list(g.edge_set()))
    for v in range(g.n_nodes):
        if v not in nxg:
            continue
        expected = {frozenset(c) for c in nx.connected_components(nxg.subgraph(nxg[v]))}
        assert {pg.p2c[p] for p in pg.v2p[v]} == expected


def test_determinism():
    rng = np.random.default_rng(2)
    g = random_graph(rng, 40, 0.1)
    for method in ("cc", "lp"):
        a = build_persona_graph(g, method, 0.5, seed=4)
        b = build_persona_graph(g, method, 0.5, seed=4)
        assert a.graph.same_as(b.graph)
        assert a.p2c == b.p2c
        assert np.array_equal(a.edge_kind, b.edge_kind)


def test_lambda_zero_walker_never_crosses():
    g = path_graph(3)
    pg = build_persona_graph(g, "cc", 0.0)
    assert np.all(pg.graph.weight[pg.edge_kind == PERSONA] == 0.0)
    b1, b2 = pg.v2p[1]
    corpus = generate_corpus(pg.graph, WalkConfig(50, 20, seed=1))
    for walk in corpus:
        if walk[0] == b1:
            assert b2 not in walk.tolist()


def test_bound_check_triangle():
    rep = persona_edge_bound_check(build_persona_graph(make_graph(TRIANGLE), "cc", 0.5))
    assert rep.n_persona_edges == 0
    assert rep.within_bound
    assert rep.bound == pytest.approx(3**1.5)


def test_bound_check_reports_ratio():
    g = path_graph(3)
    rep = persona_edge_bound_check(build_persona_graph(g, "cc", 0.5))
    assert rep.n_persona_edges == 2 and rep.n_persona_pairs == 1
    assert rep.ratio == pytest.approx(2 / 2**1.5)
    assert rep.max_degree == 2
    assert not rep.assumption_holds  # 2 >= sqrt(2)


def test_persona_map_roundtrip(tmp_path):
    g = make_graph([(0, 1), (1, 2)], labels=["A", "B", "C"])
    pg = build_persona_graph(g, "cc", 0.5)
    path = tmp_path / "map.tsv"
    write_persona_map(pg, path)
    assert path.read_text().splitlines()[0] == "persona_id\toriginal_label\tcluster_members"
    rows = read_persona_map(path)
    assert rows == [(0, "A", ["B"]), (1, "B", ["A"]), (2, "B", ["C"]), (3, "C", ["B"])]
    assert pg.graph.labels == ["A__0", "B__0", "B__1", "C__0"]
