"""Link-prediction evaluation: connectivity-preserving splits, negatives, ROC-AUC."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from numba import njit
from scipy.stats import rankdata

from persona_embed.graph import Graph
from persona_embed.pipeline import Persona2VecConfig, embed_baseline, run_pipeline, single_persona_map

logger = logging.getLogger(__name__)

AGGREGATES = {"max": np.max, "min": np.min, "mean": np.mean}


@dataclass(eq=False)
class LinkPredSplit:
    """Held-out positives and sampled negatives for one evaluation round.

    ``train_mask`` selects the training edges among ``graph``'s edge arrays;
    ``e_test`` and ``e_neg`` are ``(k, 2)`` arrays of node ids.
    """

    graph: Graph
    train_mask: np.ndarray
    e_test: np.ndarray
    e_neg: np.ndarray
    seed: int

    @property
    def e_train(self) -> np.ndarray:
        return np.column_stack([self.graph.src[self.train_mask], self.graph.dst[self.train_mask]])

    def train_graph(self) -> Graph:
        return self.graph.edge_subgraph(self.train_mask)


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


@njit(cache=True)
def _reverse_spanning_forest(n, src, dst, order):
    """Kruskal over ``order`` reversed; marks the forest edges."""
    parent = np.arange(n)
    in_forest = np.zeros(len(src), dtype=np.bool_)
    for k in range(len(order) - 1, -1, -1):
        e = order[k]
        a = _find(parent, src[e])
        b = _find(parent, dst[e])
        if a != b:
            parent[a] = b
            in_forest[e] = True
    return in_forest


def removable_in_order(g: Graph, order: np.ndarray) -> np.ndarray:
    """Edges accepted when visiting ``order`` and removing each edge whose
    removal keeps the graph connected, given all earlier removals.

    Greedy deletion in a fixed order keeps exactly the complement of the
    spanning forest that Kruskal builds when scanning the same order
    backwards (matroid duality), so no per-edge connectivity test is needed.
    The result lists accepted edge indices in visiting order; any prefix of
    it is what the sequential procedure accepts before stopping.
    """
    order = np.asarray(order, dtype=np.int64)
    in_forest = _reverse_spanning_forest(g.n_nodes, g.src, g.dst, order)
    return order[~in_forest[order]]


def select_test_edges(g: Graph, test_fraction: float = 0.5, seed: int = 0) -> np.ndarray:
    """Indices of up to ``test_fraction`` of the edges whose removal keeps ``g`` connected.

    Edges are visited in a seeded random order; an edge is taken only if the
    remaining graph stays (weakly) connected given the edges taken before it.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    order = rng.permutation(g.n_edges)
    target = int(math.floor(test_fraction * g.n_edges))
    accepted = removable_in_order(g, order)
    if len(accepted) == 0:
        raise ValueError("no removable edges: every edge is a bridge")
    if len(accepted) < target:
        logger.warning("only %d of %d requested test edges keep the graph connected", len(accepted), target)
    return accepted[:target]


def split_edges(g: Graph, test_fraction: float = 0.5, seed: int = 0) -> LinkPredSplit:
    """Connectivity-preserving test edges plus the same number of sampled non-edges."""
    test_idx = select_test_edges(g, test_fraction, seed)
    train_mask = np.ones(g.n_edges, dtype=bool)
    train_mask[test_idx] = False
    e_test = np.column_stack([g.src[test_idx], g.dst[test_idx]])
    e_neg = sample_negatives(g, len(e_test), seed)
    return LinkPredSplit(g, train_mask, e_test, e_neg, seed)


def _pair_keys(g: Graph, u, v):
    if g.directed:
        return u * g.n_nodes + v
    return np.minimum(u, v) * g.n_nodes + np.maximum(u, v)


def sample_negatives(g: Graph, count: int, seed: int = 0) -> np.ndarray:
    """``count`` distinct non-adjacent node pairs, uniformly at random.

    Pairs are ordered for directed graphs and unordered otherwise; self
    pairs never appear.
    """
    n = g.n_nodes
    total_pairs = n * (n - 1) if g.directed else n * (n - 1) // 2
    available = total_pairs - g.n_edges
    if available <= 0:
        raise ValueError("no negative pairs available")
    if count > available:
        raise ValueError(f"requested {count} negatives but only {available} non-edges exist")
    if count == 0:
        return np.empty((0, 2), dtype=np.int64)
    rng = np.random.default_rng([seed, 0x4E47])
    existing = np.sort(_pair_keys(g, g.src, g.dst))

    if available <= 4 * count and total_pairs <= 10_000_000:
        u, v = np.nonzero(~np.eye(n, dtype=bool))
        if not g.directed:
            keep = u < v
            u, v = u[keep], v[keep]
        keys = _pair_keys(g, u, v)
        free = ~np.isin(keys, existing)
        pick = rng.choice(np.count_nonzero(free), size=count, replace=False)
        return np.column_stack([u[free][pick], v[free][pick]]).astype(np.int64)

    chosen_keys: list[np.ndarray] = []
    seen = np.empty(0, dtype=np.int64)
    pairs = []
    need = count
    while need > 0:
        batch = max(2 * need, 1024)
        u = rng.integers(0, n, batch)
        v = rng.integers(0, n, batch)
        ok = u != v
        u, v = u[ok], v[ok]
        if not g.directed:
            u, v = np.minimum(u, v), np.maximum(u, v)
        keys = u * n + v
        ok = ~np.isin(keys, existing) & ~np.isin(keys, seen)
        u, v, keys = u[ok], v[ok], keys[ok]
        _, first = np.unique(keys, return_index=True)
        first = np.sort(first)[:need]
        pairs.append(np.column_stack([u[first], v[first]]))
        chosen_keys.append(keys[first])
        seen = np.concatenate(chosen_keys)
        need -= len(first)
    return np.concatenate(pairs).astype(np.int64)


def score_pair(phi: np.ndarray, v2p: Sequence[np.ndarray], u: int, v: int, agg: str = "max") -> float:
    """Aggregate of dot products over all persona pairs of ``u`` and ``v``."""
    if not (0 <= u < len(v2p) and 0 <= v < len(v2p)):
        raise KeyError(f"unknown node in pair {(u, v)}")
    try:
        fn = AGGREGATES[agg]
    except KeyError:
        raise ValueError(f"unknown aggregate {agg!r}") from None
    return float(fn(phi[v2p[u]] @ phi[v2p[v]].T))


def score_pairs(phi, v2p, pairs, agg: str = "max") -> np.ndarray:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if all(len(p) == 1 for p in v2p):
        rows = np.concatenate(v2p)
        return np.einsum("ij,ij->i", phi[rows[pairs[:, 0]]], phi[rows[pairs[:, 1]]])
    return np.array([score_pair(phi, v2p, int(u), int(v), agg) for u, v in pairs])


def roc_auc(pos_scores, neg_scores) -> float:
    """Mann-Whitney estimate of ROC-AUC; ties count one half."""
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg = np.asarray(neg_scores, dtype=np.float64).ravel()
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("need at least one positive and one negative score")
    ranks = rankdata(np.concatenate([pos, neg]))
    u = ranks[: len(pos)].sum() - len(pos) * (len(pos) + 1) / 2.0
    return float(u / (len(pos) * len(neg)))


# (train graph, split, config) -> function scoring an (k, 2) array of pairs
ScorerFactory = Callable[[Graph, LinkPredSplit, Persona2VecConfig], Callable[[np.ndarray], np.ndarray]]


def persona_scorer(agg: str = "max") -> ScorerFactory:
    def factory(train_g, split, cfg):
        res = run_pipeline(train_g, cfg)
        phi = res.embedding.phi_in
        v2p = res.persona_graph.v2p
        factory.timings = res.timings
        return lambda pairs: score_pairs(phi, v2p, pairs, agg)

    return factory


def baseline_scorer() -> ScorerFactory:
    def factory(train_g, split, cfg):
        t0 = time.perf_counter()
        phi = embed_baseline(train_g, cfg).phi_in
        factory.timings = {"base": time.perf_counter() - t0}
        v2p = single_persona_map(train_g.n_nodes)
        return lambda pairs: score_pairs(phi, v2p, pairs)

    return factory


@dataclass
class EvalResult:
    aucs: list[float]
    seeds: list[int]
    n_test: list[int]
    n_neg: list[int]
    timings: list[dict[str, float]] = field(default_factory=list)

    @property
    def auc(self) -> float:
        return float(np.mean(self.aucs))

    @property
    def stderr(self) -> float:
        if len(self.aucs) < 2:
            return 0.0
        return float(np.std(self.aucs, ddof=1) / math.sqrt(len(self.aucs)))


def run_experiment(
    g: Graph,
    cfg: Persona2VecConfig = Persona2VecConfig(),
    test_fraction: float = 0.5,
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    agg: str = "max",
    no_split: bool = False,
    scorer: ScorerFactory | None = None,
) -> EvalResult:
    """Split, train on the training edges only, score positives vs negatives.

    One round per seed; the seed drives the split, the negatives and the
    embedding.
    """
    if scorer is None:
        scorer = baseline_scorer() if no_split else persona_scorer(agg)
    result = EvalResult([], [], [], [])
    for seed in seeds:
        t0 = time.perf_counter()
        split = split_edges(g, test_fraction, seed)
        timing = {"edge_split": time.perf_counter() - t0}
        train_g = split.train_graph()
        score = scorer(train_g, split, replace(cfg, seed=int(seed)))
        timing.update(getattr(scorer, "timings", {}))
        t0 = time.perf_counter()
        auc = roc_auc(score(split.e_test), score(split.e_neg))
        timing["score"] = time.perf_counter() - t0
        logger.info("seed %d: AUC %.4f", seed, auc)
        result.aucs.append(auc)
        result.seeds.append(int(seed))
        result.n_test.append(len(split.e_test))
        result.n_neg.append(len(split.e_neg))
        result.timings.append(timing)
    return result
