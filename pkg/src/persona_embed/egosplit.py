"""Ego-network splitting: turn every node into one persona per local cluster.

Each node's ego-network (its neighbours, ego removed) is partitioned by a
non-overlapping clustering. Every cluster becomes a persona; an original
edge ``(u, v)`` is inherited by the persona of ``u`` whose cluster holds
``v`` and the persona of ``v`` whose cluster holds ``u``. Personas of the
same node are then linked by a complete set of directed *persona edges*
weighted ``lam * max(k_out, 1)``, where ``k_out`` counts the persona's
inherited outgoing edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit
from scipy.sparse import csgraph

from persona_embed._random import stream_seed, uniform
from persona_embed.graph import Graph

ORIGINAL, PERSONA = 0, 1

_METHOD_ALIASES = {
    "cc": "cc",
    "connected-components": "cc",
    "connected_components": "cc",
    "lp": "lp",
    "label-propagation": "lp",
    "label_propagation": "lp",
}

LP_MAX_SWEEPS = 100


def resolve_method(method: str) -> str:
    try:
        return _METHOD_ALIASES[method]
    except KeyError:
        raise ValueError(
            f"unknown local clustering {method!r}; expected one of {sorted(set(_METHOD_ALIASES))}"
        ) from None


@dataclass(eq=False)
class PersonaGraph:
    """Persona graph plus the bookkeeping that ties it to the original graph.

    Attributes:
        graph: directed persona graph; edge ``i`` is ``graph.src[i] -> graph.dst[i]``.
        original: the graph that was split.
        v2p: per original node, the ordered array of its persona ids.
        p2c: per persona, the frozenset of original neighbour ids in its cluster.
        owner: per persona, the original node it was split from.
        edge_kind: per edge of ``graph``, ``ORIGINAL`` or ``PERSONA``.
        lam: persona-edge weight factor.
    """

    graph: Graph
    original: Graph
    v2p: list[np.ndarray]
    p2c: list[frozenset]
    owner: np.ndarray
    edge_kind: np.ndarray
    lam: float

    @property
    def n_personas(self) -> int:
        return self.graph.n_nodes

    @property
    def n_persona_edges(self) -> int:
        """Persona arcs, counting each ordered pair once."""
        return int(np.count_nonzero(self.edge_kind == PERSONA))

    def original_out_degree(self) -> np.ndarray:
        mask = self.edge_kind == ORIGINAL
        return np.bincount(self.graph.src[mask], minlength=self.n_personas)

    def n_split_nodes(self) -> int:
        return sum(1 for ps in self.v2p if len(ps) > 1)


def ego_network(g: Graph, v: int) -> Graph:
    """Induced subgraph on the neighbours of ``v`` (in and out), ego removed.

    Local id ``i`` of the result is original node ``g.all_neighbors(v)[i]``;
    the ``labels`` of the result carry the original labels.
    """
    return g.subgraph(g.all_neighbors(v))


def cluster_ego(eg: Graph, method: str = "cc", seed: int = 0) -> list[set[int]]:
    """Partition an ego-network into disjoint clusters covering all its nodes.

    Edges are treated as undirected. Clusters are returned ordered by their
    smallest member (local ids of ``eg``).
    """
    method = resolve_method(method)
    if eg.n_nodes == 0:
        return []
    a = eg.undirected_adjacency()
    a.sort_indices()
    labels = _cluster_labels(a, method, seed, 0)
    return [set(members.tolist()) for members in _group(labels)]


def _cluster_labels(a, method, seed, salt):
    if method == "cc":
        return csgraph.connected_components(a, directed=False)[1]
    return _label_propagation(
        a.indptr.astype(np.int64), a.indices.astype(np.int64), a.shape[0], seed, salt, LP_MAX_SWEEPS
    )


def _group(labels):
    """Groups of positions sharing a label, ordered by first position."""
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    cluster = rank[inverse]
    order = np.argsort(cluster, kind="stable")
    bounds = np.flatnonzero(np.diff(cluster[order])) + 1
    return np.split(order, bounds)


@njit(cache=True)
def _label_propagation(indptr, indices, n, seed, salt, max_sweeps):
    labels = np.arange(n)
    order = np.arange(n)
    counts = np.zeros(n, dtype=np.int64)
    state = stream_seed(seed, salt, 0x1AB)
    for _ in range(max_sweeps):
        for i in range(n - 1, 0, -1):
            state, u = uniform(state)
            j = int(u * (i + 1))
            order[i], order[j] = order[j], order[i]
        changed = False
        for k in range(n):
            i = order[k]
            lo, hi = indptr[i], indptr[i + 1]
            if lo == hi:
                continue
            best = -1
            best_count = 0
            for e in range(lo, hi):
                counts[labels[indices[e]]] += 1
            for e in range(lo, hi):
                lab = labels[indices[e]]
                c = counts[lab]
                if c > best_count or (c == best_count and lab < best):
                    best, best_count = lab, c
            for e in range(lo, hi):
                counts[labels[indices[e]]] = 0
            if best != labels[i]:
                labels[i] = best
                changed = True
        if not changed:
            break
    return labels


def build_persona_graph(
    g: Graph, method: str = "cc", lam: float = 0.5, seed: int = 0
) -> PersonaGraph:
    """Split every node of ``g`` into personas and wire up the persona graph.

    Nodes without neighbours keep a single persona with an empty cluster.
    Undirected inputs yield both arcs for each inherited edge.
    """
    if not lam >= 0:
        raise ValueError(f"lam must be non-negative, got {lam}")
    method = resolve_method(method)
    n = g.n_nodes
    a = g.undirected_adjacency()
    a.sort_indices()
    indptr = a.indptr.astype(np.int64)
    indices = a.indices.astype(np.int64)

    # persona id for every (node, neighbour) slot of the symmetric adjacency
    slot_persona = np.empty(len(indices), dtype=np.int64)
    v2p: list[np.ndarray] = []
    p2c: list[frozenset] = []
    owner: list[int] = []
    for v in range(n):
        lo, hi = indptr[v], indptr[v + 1]
        nbrs = indices[lo:hi]
        if len(nbrs) == 0:
            v2p.append(np.array([len(owner)], dtype=np.int64))
            p2c.append(frozenset())
            owner.append(v)
            continue
        sub = a[nbrs][:, nbrs]
        labels = _cluster_labels(sub, method, seed, v)
        ids = []
        for members in _group(labels):
            pid = len(owner)
            ids.append(pid)
            owner.append(v)
            p2c.append(frozenset(nbrs[members].tolist()))
            slot_persona[lo + members] = pid
        v2p.append(np.array(ids, dtype=np.int64))
    n_personas = len(owner)

    if g.directed:
        a_src, a_dst, a_w = g.src, g.dst, g.weight
    else:
        a_src = np.concatenate([g.src, g.dst])
        a_dst = np.concatenate([g.dst, g.src])
        a_w = np.concatenate([g.weight, g.weight])
    slot_key = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr)) * n + indices
    p_src = slot_persona[np.searchsorted(slot_key, a_src * n + a_dst)]
    p_dst = slot_persona[np.searchsorted(slot_key, a_dst * n + a_src)]

    k_out = np.bincount(p_src, minlength=n_personas)
    pe_src, pe_dst = [], []
    for ps in v2p:
        if len(ps) < 2:
            continue
        i, j = np.meshgrid(ps, ps, indexing="ij")
        off = i != j
        pe_src.append(i[off])
        pe_dst.append(j[off])
    if pe_src:
        pe_src = np.concatenate(pe_src)
        pe_dst = np.concatenate(pe_dst)
    else:
        pe_src = pe_dst = np.empty(0, dtype=np.int64)
    pe_w = lam * np.maximum(k_out[pe_src], 1).astype(np.float64)

    owner_arr = np.asarray(owner, dtype=np.int64)
    labels = [
        f"{g.labels[v]}__{k}" for v, ps in enumerate(v2p) for k in range(len(ps))
    ]
    pgraph = Graph(
        n_nodes=n_personas,
        src=np.concatenate([p_src, pe_src]),
        dst=np.concatenate([p_dst, pe_dst]),
        weight=np.concatenate([a_w, pe_w]),
        directed=True,
        labels=labels,
    )
    kind = np.concatenate(
        [np.full(len(p_src), ORIGINAL, dtype=np.int8), np.full(len(pe_src), PERSONA, dtype=np.int8)]
    )
    return PersonaGraph(
        graph=pgraph, original=g, v2p=v2p, p2c=p2c, owner=owner_arr, edge_kind=kind, lam=float(lam)
    )


@dataclass(frozen=True)
class BoundReport:
    n_persona_edges: int
    n_edges: int
    bound: float
    max_degree: int
    sqrt_edges: float
    within_bound: bool
    assumption_holds: bool

    @property
    def ratio(self) -> float:
        return self.n_persona_edges / self.bound if self.bound else 0.0

    @property
    def n_persona_pairs(self) -> int:
        """Persona edges counted as unordered pairs."""
        return self.n_persona_edges // 2


def persona_edge_bound_check(pg: PersonaGraph) -> BoundReport:
    """Compare the persona-edge count against ``|E| ** 1.5``.

    ``within_bound`` is only meaningful when ``assumption_holds``, i.e. every
    degree is below ``sqrt(|E|)``.
    """
    g = pg.original
    m = g.n_edges
    deg = g.degree()
    max_deg = int(deg.max(initial=0))
    bound = float(m) ** 1.5
    n_pe = pg.n_persona_edges
    return BoundReport(
        n_persona_edges=n_pe,
        n_edges=m,
        bound=bound,
        max_degree=max_deg,
        sqrt_edges=math.sqrt(m),
        within_bound=n_pe <= bound,
        assumption_holds=max_deg < math.sqrt(m),
    )


def write_persona_map(pg: PersonaGraph, path: str | Path) -> None:
    """TSV of ``persona_id``, ``original_label`` and comma-joined cluster members."""
    labels = pg.original.labels
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("persona_id\toriginal_label\tcluster_members\n")
        for pid in range(pg.n_personas):
            members = ",".join(labels[u] for u in sorted(pg.p2c[pid]))
            fh.write(f"{pid}\t{labels[pg.owner[pid]]}\t{members}\n")


def read_persona_map(path: str | Path) -> list[tuple[int, str, list[str]]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != ["persona_id", "original_label", "cluster_members"]:
            raise ValueError(f"{path}: unexpected header {header}")
        for line in fh:
            pid, label, members = line.rstrip("\n").split("\t")
            rows.append((int(pid), label, members.split(",") if members else []))
    return rows
