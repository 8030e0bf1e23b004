"""Multi-role node embeddings via ego-network splitting and warm-started skip-gram."""

from persona_embed.egosplit import PersonaGraph, build_persona_graph, cluster_ego, ego_network
from persona_embed.graph import Graph, is_connected, largest_component, load_edge_list, save_edge_list
from persona_embed.linkpred import roc_auc, run_experiment, sample_negatives, score_pair, split_edges
from persona_embed.pipeline import Persona2VecConfig, embed_baseline, persona2vec
from persona_embed.skipgram import EmbeddingMatrix, TrainConfig, init_random, sgns_pair_update, train
from persona_embed.walks import WalkConfig, WalkCorpus, generate_corpus, walks_from, weighted_random_walk

__version__ = "0.1.0"

__all__ = [
    "EmbeddingMatrix",
    "Graph",
    "Persona2VecConfig",
    "PersonaGraph",
    "TrainConfig",
    "WalkConfig",
    "WalkCorpus",
    "build_persona_graph",
    "cluster_ego",
    "ego_network",
    "embed_baseline",
    "generate_corpus",
    "init_random",
    "is_connected",
    "largest_component",
    "load_edge_list",
    "persona2vec",
    "roc_auc",
    "run_experiment",
    "sample_negatives",
    "save_edge_list",
    "score_pair",
    "sgns_pair_update",
    "split_edges",
    "train",
    "walks_from",
    "weighted_random_walk",
]
