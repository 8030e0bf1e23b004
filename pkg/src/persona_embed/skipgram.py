"""Skip-gram with negative sampling (SGNS) over walk corpora.

The trainer keeps two matrices: ``phi_in`` (the node representation handed
back to callers) and ``phi_out`` (context vectors, training only). Training
can start from an existing :class:`EmbeddingMatrix`, which is how persona
vectors are fine-tuned from a base embedding.

Two execution modes share one kernel: with ``threads=0`` a single thread
applies every update in order and results are bit-reproducible; with
``threads > 0`` walks are processed concurrently and rows are updated
without locks (lost updates are tolerated).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np
from numba import njit, prange

from persona_embed._random import stream_seed, uniform
from persona_embed.walks import WalkCorpus

NOISE_POWER = 0.75


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 128
    window: int = 5
    learning_rate: float = 0.025
    epochs: int = 1
    negatives: int = 5
    seed: int = 0
    threads: int = 0
    min_lr_fraction: float = 1e-4

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.negatives < 1:
            raise ValueError("dim, window and negatives must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")


@dataclass(eq=False)
class EmbeddingMatrix:
    phi_in: np.ndarray
    phi_out: np.ndarray

    @property
    def dim(self) -> int:
        return self.phi_in.shape[1]

    def __len__(self):
        return self.phi_in.shape[0]

    def copy(self) -> "EmbeddingMatrix":
        return EmbeddingMatrix(self.phi_in.copy(), self.phi_out.copy())


def init_random(n: int, cfg: TrainConfig) -> EmbeddingMatrix:
    """``phi_in`` uniform in ``(-0.5/d, 0.5/d)``, ``phi_out`` zero."""
    if n < 1:
        raise ValueError("need at least one row")
    rng = np.random.default_rng(cfg.seed)
    phi_in = (rng.random((n, cfg.dim)) - 0.5) / cfg.dim
    return EmbeddingMatrix(phi_in, np.zeros((n, cfg.dim)))


@njit(cache=True)
def _sigmoid(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


@njit(cache=True, fastmath=True)
def _pair_update(phi_in, phi_out, center, context, negatives, alpha, buf):
    # negatives < 0 are skipped
    d = phi_in.shape[1]
    for i in range(d):
        buf[i] = 0.0
    for k in range(-1, len(negatives)):
        if k < 0:
            other = context
            label = 1.0
        else:
            other = negatives[k]
            if other < 0:
                continue
            label = 0.0
        f = 0.0
        for i in range(d):
            f += phi_in[center, i] * phi_out[other, i]
        g = label - _sigmoid(f)
        for i in range(d):
            buf[i] += g * phi_out[other, i]
        step = alpha * g
        for i in range(d):
            phi_out[other, i] += step * phi_in[center, i]
    for i in range(d):
        phi_in[center, i] += alpha * buf[i]


def sgns_pair_update(
    emb: EmbeddingMatrix, center: int, context: int, negatives, alpha: float
) -> EmbeddingMatrix:
    """Apply one SGNS step in place and return ``emb``.

    For the context (label 1) and each negative (label 0) the gradient
    coefficient is ``label - sigmoid(phi_in[center] . phi_out[other])``.
    Context rows move immediately; the centre row moves once at the end by
    the accumulated coefficient-weighted context vectors.
    """
    negs = np.asarray(negatives, dtype=np.int64).reshape(-1)
    buf = np.empty(emb.dim)
    _pair_update(emb.phi_in, emb.phi_out, int(center), int(context), negs, float(alpha), buf)
    return emb


@dataclass(frozen=True)
class NoiseTable:
    """Walker alias table for the ``counts ** 0.75`` noise distribution."""

    prob: np.ndarray
    alias: np.ndarray
    p: np.ndarray

    @classmethod
    def from_counts(cls, counts) -> "NoiseTable":
        w = np.asarray(counts, dtype=np.float64) ** NOISE_POWER
        total = w.sum()
        if not total > 0:
            raise ValueError("noise distribution has no mass")
        p = w / total
        prob, alias = _build_alias(p * len(p))
        return cls(prob, alias, p)

    def draw(self, n: int, seed: int) -> np.ndarray:
        return _draw_many(self.prob, self.alias, n, np.uint64(seed))


@njit(cache=True)
def _build_alias(scaled):
    n = len(scaled)
    prob = np.ones(n)
    alias = np.arange(n)
    small = np.empty(n, dtype=np.int64)
    large = np.empty(n, dtype=np.int64)
    ns = nl = 0
    q = scaled.copy()
    for i in range(n):
        if q[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        l = large[nl - 1]
        prob[s] = q[s]
        alias[s] = l
        q[l] = (q[l] + q[s]) - 1.0
        if q[l] < 1.0:
            nl -= 1
            small[ns] = l
            ns += 1
    # leftovers are 1 up to rounding
    return prob, alias


@njit(cache=True)
def _draw_alias(prob, alias, state):
    state, u = uniform(state)
    x = u * len(prob)
    i = int(x)
    if i >= len(prob):
        i = len(prob) - 1
    if x - i < prob[i]:
        return state, i
    return state, alias[i]


@njit(cache=True)
def _draw_many(prob, alias, n, seed):
    out = np.empty(n, dtype=np.int64)
    state = stream_seed(seed, 0, 0)
    for k in range(n):
        state, out[k] = _draw_alias(prob, alias, state)
    return out


@njit(cache=True)
def _walk_pair_counts(lengths, window):
    out = np.zeros(len(lengths) + 1, dtype=np.int64)
    for k in range(len(lengths)):
        n = lengths[k]
        c = 0
        for i in range(n):
            c += min(n - 1, i + window) - max(0, i - window)
        out[k + 1] = out[k] + c
    return out


def _train_kernel(
    walks, lengths, offsets, epochs, window, n_neg, alpha0, min_frac, prob, alias, seed, phi_in, phi_out
):
    n_walks = len(lengths)
    per_epoch = offsets[n_walks]
    total = float(per_epoch * epochs)
    d = phi_in.shape[1]
    for ep in range(epochs):
        for k in prange(n_walks):
            buf = np.empty(d)
            negs = np.empty(n_neg, dtype=np.int64)
            state = stream_seed(seed, ep, k)
            pair = ep * per_epoch + offsets[k]
            n = lengths[k]
            for i in range(n):
                center = walks[k, i]
                for j in range(max(0, i - window), min(n, i + window + 1)):
                    if j == i:
                        continue
                    context = walks[k, j]
                    alpha = alpha0 * max(1.0 - pair / total, min_frac)
                    for s in range(n_neg):
                        state, neg = _draw_alias(prob, alias, state)
                        negs[s] = -1 if neg == context else neg
                    _pair_update(phi_in, phi_out, center, context, negs, alpha, buf)
                    pair += 1


_train_serial = njit(cache=True, fastmath=True)(_train_kernel)
_train_parallel = njit(cache=True, fastmath=True, parallel=True)(_train_kernel)


def context_pairs(walk, window: int) -> list[tuple[int, int]]:
    """(center, context) pairs a walk contributes, in training order."""
    walk = list(walk)
    n = len(walk)
    return [
        (walk[i], walk[j])
        for i in range(n)
        for j in range(max(0, i - window), min(n, i + window + 1))
        if j != i
    ]


def train(
    corpus: WalkCorpus,
    cfg: TrainConfig,
    init: EmbeddingMatrix | None = None,
    noise_counts=None,
) -> EmbeddingMatrix:
    """Train SGNS on ``corpus`` and return a new :class:`EmbeddingMatrix`.

    Every node within ``cfg.window`` positions of a centre is a context.
    Negatives come from ``noise_counts ** 0.75``; callers usually pass node
    degrees, and without it corpus occurrence counts are used. The learning
    rate decays linearly per processed pair down to
    ``learning_rate * min_lr_fraction``.
    """
    if len(corpus) == 0:
        raise ValueError("empty walk corpus")
    n = corpus.n_nodes
    if init is None:
        emb = init_random(n, cfg)
    else:
        if len(init) < n:
            raise ValueError(f"init has {len(init)} rows, corpus needs {n}")
        if init.dim != cfg.dim:
            raise ValueError(f"init has dimension {init.dim}, config says {cfg.dim}")
        emb = init.copy()
    if cfg.epochs == 0:
        return emb
    if noise_counts is None:
        valid = corpus.walks[corpus.walks >= 0]
        noise_counts = np.bincount(valid, minlength=len(emb))
    noise = NoiseTable.from_counts(noise_counts)
    offsets = _walk_pair_counts(corpus.lengths, cfg.window)
    if offsets[-1] == 0:
        return emb
    args = (
        corpus.walks,
        corpus.lengths,
        offsets,
        cfg.epochs,
        cfg.window,
        cfg.negatives,
        cfg.learning_rate,
        cfg.min_lr_fraction,
        noise.prob,
        noise.alias,
        np.uint64(cfg.seed),
        emb.phi_in,
        emb.phi_out,
    )
    if cfg.threads and cfg.threads != 1:
        numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))
        _train_parallel(*args)
    else:
        _train_serial(*args)
    return emb


def write_embedding(phi: np.ndarray, labels: list[str], path: str | Path) -> None:
    """word2vec-style text: ``N d`` header, then ``label v1 .. vd`` per row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{phi.shape[0]} {phi.shape[1]}\n")
        for label, row in zip(labels, phi):
            fh.write(label + " " + " ".join(repr(float(x)) for x in row) + "\n")


def read_embedding(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        n, d = map(int, fh.readline().split())
        labels, rows = [], []
        for line in fh:
            parts = line.split()
            labels.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    phi = np.array(rows, dtype=np.float64).reshape(n, d)
    return labels, phi
