"""Base embedding, persona warm start and persona fine-tuning."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from persona_embed.egosplit import PersonaGraph, build_persona_graph
from persona_embed.graph import Graph
from persona_embed.skipgram import EmbeddingMatrix, TrainConfig, train
from persona_embed.walks import WalkConfig, generate_corpus

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StageConfig:
    walks_per_node: int
    walk_length: int
    window: int
    epochs: int = 1


@dataclass(frozen=True)
class Persona2VecConfig:
    lam: float = 0.5
    dim: int = 128
    base: StageConfig = StageConfig(walks_per_node=10, walk_length=40, window=5)
    persona: StageConfig = StageConfig(walks_per_node=5, walk_length=80, window=2)
    learning_rate: float = 0.025
    negatives: int = 5
    clustering: str = "cc"
    seed: int = 0
    threads: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Persona2VecConfig":
        d = dict(d)
        for key in ("base", "persona"):
            if isinstance(d.get(key), dict):
                d[key] = StageConfig(**d[key])
        return cls(**d)


@dataclass
class PipelineResult:
    persona_graph: PersonaGraph | None
    embedding: EmbeddingMatrix
    base: EmbeddingMatrix
    timings: dict[str, float] = field(default_factory=dict)


def _embed(g: Graph, stage: StageConfig, cfg: Persona2VecConfig, seed: int, init=None):
    corpus = generate_corpus(
        g, WalkConfig(stage.walks_per_node, stage.walk_length, seed=seed, threads=cfg.threads)
    )
    tcfg = TrainConfig(
        dim=cfg.dim,
        window=stage.window,
        learning_rate=cfg.learning_rate,
        epochs=stage.epochs,
        negatives=cfg.negatives,
        seed=seed,
        threads=cfg.threads,
    )
    return train(corpus, tcfg, init=init, noise_counts=g.degree())


def warm_start(pg: PersonaGraph, base: EmbeddingMatrix) -> EmbeddingMatrix:
    """Copy every node's base vectors onto each of its personas."""
    return EmbeddingMatrix(base.phi_in[pg.owner].copy(), base.phi_out[pg.owner].copy())


def embed_baseline(g: Graph, cfg: Persona2VecConfig = Persona2VecConfig()) -> EmbeddingMatrix:
    """Single-vector embedding of ``g`` with the base-stage settings."""
    return _embed(g, cfg.base, cfg, cfg.seed)


def run_pipeline(g: Graph, cfg: Persona2VecConfig = Persona2VecConfig()) -> PipelineResult:
    """Split, embed the original graph, warm-start personas, fine-tune."""
    timings = {}
    t0 = time.perf_counter()
    pg = build_persona_graph(g, cfg.clustering, cfg.lam, cfg.seed)
    timings["split"] = time.perf_counter() - t0
    logger.info("persona graph: %d personas, %d persona edges", pg.n_personas, pg.n_persona_edges)

    t0 = time.perf_counter()
    base = _embed(g, cfg.base, cfg, cfg.seed)
    timings["base"] = time.perf_counter() - t0

    init = warm_start(pg, base)
    t0 = time.perf_counter()
    # distinct stream from the base stage
    emb = _embed(pg.graph, cfg.persona, cfg, cfg.seed + 1, init=init)
    timings["persona"] = time.perf_counter() - t0
    return PipelineResult(pg, emb, base, timings)


def persona2vec(
    g: Graph, cfg: Persona2VecConfig = Persona2VecConfig()
) -> tuple[PersonaGraph, EmbeddingMatrix]:
    """Persona graph and fine-tuned persona embedding of ``g``."""
    res = run_pipeline(g, cfg)
    return res.persona_graph, res.embedding


def embed_persona_from_scratch(
    g: Graph, cfg: Persona2VecConfig = Persona2VecConfig()
) -> tuple[PersonaGraph, EmbeddingMatrix]:
    """Persona-graph embedding from random init (ablation of the warm start)."""
    pg = build_persona_graph(g, cfg.clustering, cfg.lam, cfg.seed)
    return pg, _embed(pg.graph, cfg.persona, cfg, cfg.seed + 1)


def single_persona_map(n: int) -> list[np.ndarray]:
    """Identity node-to-persona map used when no splitting happens."""
    return [np.array([v], dtype=np.int64) for v in range(n)]
