"""Weighted random walks (first-order, p = q = 1) and walk corpora."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np
from numba import njit, prange

from persona_embed._random import search_cumulative, stream_seed, uniform
from persona_embed.graph import Graph


@dataclass(frozen=True)
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 40
    seed: int = 0
    threads: int = 0  # 0 = single-threaded

    def __post_init__(self):
        if self.walks_per_node < 1 or self.walk_length < 1:
            raise ValueError("walks_per_node and walk_length must be positive")


@dataclass(eq=False)
class WalkCorpus:
    """Walks stored row-wise in a ``-1``-padded array.

    ``walks[i, :lengths[i]]`` is walk ``i``; each row has room for
    ``walk_length + 1`` nodes (the start plus ``walk_length`` steps).
    """

    walks: np.ndarray
    lengths: np.ndarray
    n_nodes: int

    def __len__(self):
        return len(self.lengths)

    def __iter__(self):
        for row, n in zip(self.walks, self.lengths):
            yield row[:n]

    def to_lists(self) -> list[list[int]]:
        return [w.tolist() for w in self]

    @classmethod
    def from_lists(cls, walks, n_nodes: int | None = None) -> "WalkCorpus":
        width = max((len(w) for w in walks), default=0)
        arr = np.full((len(walks), width), -1, dtype=np.int64)
        for i, w in enumerate(walks):
            arr[i, : len(w)] = w
        if n_nodes is None:
            n_nodes = int(arr.max(initial=-1)) + 1
        return cls(arr, np.array([len(w) for w in walks], dtype=np.int64), n_nodes)


@njit(cache=True)
def row_cumulative(indptr, weights):
    out = np.empty_like(weights)
    for v in range(len(indptr) - 1):
        acc = 0.0
        for e in range(indptr[v], indptr[v + 1]):
            acc += weights[e]
            out[e] = acc
    return out


def _walk_kernel(indptr, indices, cumw, starts, streams, t, seed, out, lengths):
    for k in prange(len(starts)):
        v = starts[k]
        state = stream_seed(seed, streams[k], v)
        out[k, 0] = v
        n = 1
        for _ in range(t):
            lo = indptr[v]
            hi = indptr[v + 1]
            if lo == hi:
                break
            total = cumw[hi - 1]
            if total <= 0.0:
                break
            state, u = uniform(state)
            v = indices[search_cumulative(cumw, lo, hi, u * total)]
            out[k, n] = v
            n += 1
        lengths[k] = n


_walk_serial = njit(cache=True)(_walk_kernel)
_walk_parallel = njit(cache=True, parallel=True)(_walk_kernel)


def _run_walks(g: Graph, starts, streams, t, seed, threads=0):
    cumw = row_cumulative(g.indptr, g.adj_weight)
    out = np.full((len(starts), t + 1), -1, dtype=np.int64)
    lengths = np.zeros(len(starts), dtype=np.int64)
    args = (
        g.indptr,
        g.indices,
        cumw,
        np.asarray(starts, dtype=np.int64),
        np.asarray(streams, dtype=np.int64),
        int(t),
        np.uint64(seed),
        out,
        lengths,
    )
    if threads and threads != 1:
        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
        _walk_parallel(*args)
    else:
        _walk_serial(*args)
    return out, lengths


def weighted_random_walk(g: Graph, start: int, t: int, rng: np.random.Generator) -> list[int]:
    """One walk of at most ``t`` steps; stops early where there is no way out."""
    if not 0 <= start < g.n_nodes:
        raise IndexError(f"start node {start} not in graph")
    seed = int(rng.integers(0, 2**63 - 1))
    out, lengths = _run_walks(g, [start], [0], t, seed)
    return out[0, : lengths[0]].tolist()


def generate_corpus(g: Graph, cfg: WalkConfig) -> WalkCorpus:
    """``walks_per_node`` passes, each starting one walk per node in shuffled order.

    Walk ``(pass, start)`` draws from its own random stream, so the corpus
    is the same for any thread count.
    """
    if g.n_nodes == 0:
        raise ValueError("cannot walk an empty graph")
    starts, passes = [], []
    for p in range(cfg.walks_per_node):
        starts.append(np.random.default_rng([cfg.seed, p]).permutation(g.n_nodes))
        passes.append(np.full(g.n_nodes, p, dtype=np.int64))
    out, lengths = _run_walks(
        g, np.concatenate(starts), np.concatenate(passes), cfg.walk_length, cfg.seed, cfg.threads
    )
    return WalkCorpus(out, lengths, g.n_nodes)


def walks_from(g: Graph, starts, t: int, seed: int = 0, threads: int = 0) -> WalkCorpus:
    """One walk per entry of ``starts``; entry ``i`` draws from stream ``i``."""
    starts = np.asarray(starts, dtype=np.int64)
    if len(starts) and (starts.min() < 0 or starts.max() >= g.n_nodes):
        raise IndexError("start node out of range")
    out, lengths = _run_walks(g, starts, np.arange(len(starts)), t, seed, threads)
    return WalkCorpus(out, lengths, g.n_nodes)


def write_corpus(corpus: WalkCorpus, labels: list[str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for walk in corpus:
            fh.write(" ".join(labels[v] for v in walk.tolist()))
            fh.write("\n")
