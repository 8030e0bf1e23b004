import numpy as np
import pytest
from scipy import stats

from conftest import make_graph, path_graph, random_graph
from persona_embed.egosplit import build_persona_graph
from persona_embed.walks import (
    WalkConfig,
    WalkCorpus,
    generate_corpus,
    walks_from,
    weighted_random_walk,
    write_corpus,
)


def test_isolated_start_is_immediate_dead_end():
    g = make_graph([], n=1)
    assert weighted_random_walk(g, 0, 10, np.random.default_rng(0)) == [0]


def test_two_cycle_is_deterministic():
    g = make_graph([(0, 1), (1, 0)], directed=True)
    assert weighted_random_walk(g, 0, 4, np.random.default_rng(0)) == [0, 1, 0, 1, 0]


def test_directed_dead_end_stops_early():
    g = make_graph([(0, 1), (1, 2)], directed=True)
    assert weighted_random_walk(g, 0, 10, np.random.default_rng(0)) == [0, 1, 2]


def test_bad_start():
    with pytest.raises(IndexError):
        weighted_random_walk(path_graph(3), 5, 3, np.random.default_rng(0))


def test_first_step_follows_weights():
    g = make_graph([(0, 1, 1.0), (0, 2, 3.0)], directed=True)
    rng = np.random.default_rng(7)
    firsts = np.array([weighted_random_walk(g, 0, 1, rng)[1] for _ in range(100_000)])
    assert abs(np.mean(firsts == 1) - 0.25) < 0.01
    assert abs(np.mean(firsts == 2) - 0.75) < 0.01


def test_transition_frequencies_chi_square():
    # star-ish node with four weighted arcs, long walks on a graph that always returns
    weights = [1.0, 2.0, 3.0, 4.0]
    edges = [(0, i + 1, w) for i, w in enumerate(weights)] + [(i + 1, 0, 1.0) for i in range(4)]
    g = make_graph(edges, directed=True)
    corpus = generate_corpus(g, WalkConfig(walks_per_node=500, walk_length=80, seed=3))
    counts = np.zeros(5)
    steps = 0
    for walk in corpus:
        w = walk.tolist()
        for a, b in zip(w, w[1:]):
            if a == 0:
                counts[b] += 1
                steps += 1
    assert steps >= 100_000
    expected = np.array(weights) / sum(weights) * counts[1:].sum()
    assert stats.chisquare(counts[1:], expected).pvalue > 0.01


def test_corpus_counts():
    g = path_graph(3)
    corpus = generate_corpus(g, WalkConfig(walks_per_node=2, walk_length=5, seed=0))
    assert len(corpus) == 6
    starts = [w[0] for w in corpus]
    assert sorted(starts) == [0, 0, 1, 1, 2, 2]
    # every pass starts each node exactly once
    assert sorted(starts[:3]) == [0, 1, 2]


def test_corpus_walks_are_paths_in_graph():
    g = random_graph(np.random.default_rng(1), 30, 0.1, directed=True)
    corpus = generate_corpus(g, WalkConfig(3, 10, seed=2))
    for walk in corpus:
        w = walk.tolist()
        assert len(w) <= 11
        for a, b in zip(w, w[1:]):
            assert g.has_edge(a, b)
        if len(w) < 11:
            assert len(g.neighbors(w[-1])) == 0


def test_corpus_deterministic():
    g = random_graph(np.random.default_rng(1), 30, 0.2)
    a = generate_corpus(g, WalkConfig(3, 10, seed=5))
    b = generate_corpus(g, WalkConfig(3, 10, seed=5))
    c = generate_corpus(g, WalkConfig(3, 10, seed=6))
    assert np.array_equal(a.walks, b.walks)
    assert not np.array_equal(a.walks, c.walks)


def test_corpus_thread_invariant():
    g = random_graph(np.random.default_rng(4), 60, 0.1)
    a = generate_corpus(g, WalkConfig(3, 20, seed=9, threads=0))
    b = generate_corpus(g, WalkConfig(3, 20, seed=9, threads=2))
    assert np.array_equal(a.walks, b.walks)
    assert np.array_equal(a.lengths, b.lengths)


def test_zero_lambda_persona_unreachable_bruteforce():
    pg = build_persona_graph(path_graph(3), "cc", 0.0)
    b1, b2 = pg.v2p[1]
    # reachability over arcs with positive weight only
    adj = {}
    for s, d, w in zip(pg.graph.src.tolist(), pg.graph.dst.tolist(), pg.graph.weight.tolist()):
        if w > 0:
            adj.setdefault(s, set()).add(d)
    seen, stack = {b1}, [b1]
    while stack:
        for nxt in adj.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    assert b2 not in seen
    corpus = generate_corpus(pg.graph, WalkConfig(200, 10, seed=0))
    for walk in corpus:
        if walk[0] == b1:
            assert set(walk.tolist()) <= seen


def test_invalid_config():
    with pytest.raises(ValueError):
        WalkConfig(walks_per_node=0)


def test_write_corpus(tmp_path):
    corpus = WalkCorpus.from_lists([[0, 1], [2]])
    write_corpus(corpus, ["a", "b", "c"], tmp_path / "walks.txt")
    assert (tmp_path / "walks.txt").read_text() == "a b\nc\n"
    assert corpus.to_lists() == [[0, 1], [2]]


def test_walks_from_independent_streams():
    g = make_graph([(0, 1, 1.0), (0, 2, 1.0)], directed=True)
    corpus = walks_from(g, [0] * 4000, 1, seed=1)
    assert len(corpus) == 4000
    assert abs(np.mean(corpus.walks[:, 1] == 1) - 0.5) < 0.05
    with pytest.raises(IndexError):
        walks_from(g, [3], 1)
