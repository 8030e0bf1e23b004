"""Sparse in-memory graphs, edge-list I/O and connectivity helpers."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

logger = logging.getLogger(__name__)


class EdgeListError(ValueError):
    """Raised for malformed edge-list input."""


def label_sort_key(label: str):
    """Numeric labels sort numerically and before non-numeric ones."""
    try:
        return (0, int(label), "")
    except ValueError:
        return (1, 0, label)


@dataclass(eq=False)
class Graph:
    """Immutable weighted graph over dense integer node ids.

    Edges are stored once each in ``src``/``dst``/``weight``. Undirected graphs
    keep ``src < dst`` and expose a symmetric adjacency through ``indptr`` /
    ``indices`` / ``adj_weight`` (CSR over out-neighbours). Directed graphs
    additionally carry the in-neighbour CSR.
    """

    n_nodes: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    directed: bool = False
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.src = np.asarray(self.src, dtype=np.int64)
        self.dst = np.asarray(self.dst, dtype=np.int64)
        self.weight = np.asarray(self.weight, dtype=np.float64)
        if not self.labels:
            self.labels = [str(i) for i in range(self.n_nodes)]
        if len(self.labels) != self.n_nodes:
            raise ValueError("labels must have one entry per node")
        if self.directed:
            a_src, a_dst, a_w = self.src, self.dst, self.weight
        else:
            a_src = np.concatenate([self.src, self.dst])
            a_dst = np.concatenate([self.dst, self.src])
            a_w = np.concatenate([self.weight, self.weight])
        self.indptr, self.indices, self.adj_weight = _csr(self.n_nodes, a_src, a_dst, a_w)
        if self.directed:
            self.in_indptr, self.in_indices, self.in_weight = _csr(
                self.n_nodes, self.dst, self.src, self.weight
            )
        else:
            self.in_indptr, self.in_indices, self.in_weight = (
                self.indptr,
                self.indices,
                self.adj_weight,
            )

    @classmethod
    def from_edges(
        cls,
        src: Sequence[int],
        dst: Sequence[int],
        weight: Sequence[float] | None = None,
        n_nodes: int | None = None,
        directed: bool = False,
        labels: list[str] | None = None,
    ) -> "Graph":
        """Build a graph, dropping self-loops and summing duplicate edges."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        weight = np.ones(len(src)) if weight is None else np.asarray(weight, dtype=np.float64)
        if n_nodes is None:
            n_nodes = int(max(src.max(initial=-1), dst.max(initial=-1)) + 1)
        loops = src == dst
        if loops.any():
            logger.warning("dropped %d self-loops", int(loops.sum()))
            src, dst, weight = src[~loops], dst[~loops], weight[~loops]
        if not directed:
            src, dst = np.minimum(src, dst), np.maximum(src, dst)
        key = src * n_nodes + dst
        uniq, first, inverse = np.unique(key, return_index=True, return_inverse=True)
        if len(uniq) < len(key):
            logger.warning("merged %d duplicate edges", len(key) - len(uniq))
        # keep first-appearance order of edges
        order = np.argsort(first, kind="stable")
        summed = np.bincount(inverse, weights=weight, minlength=len(uniq))
        return cls(
            n_nodes=int(n_nodes),
            src=src[first][order],
            dst=dst[first][order],
            weight=summed[order],
            directed=directed,
            labels=list(labels) if labels is not None else [],
        )

    @property
    def n_edges(self) -> int:
        return len(self.src)

    def out_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_indptr)

    def degree(self) -> np.ndarray:
        """Number of incident edges (in + out for directed graphs)."""
        if self.directed:
            return self.out_degree() + self.in_degree()
        return self.out_degree()

    def neighbors(self, v: int) -> np.ndarray:
        """Out-neighbours of ``v``."""
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def all_neighbors(self, v: int) -> np.ndarray:
        """Union of in- and out-neighbours, sorted."""
        out = self.neighbors(v)
        if not self.directed:
            return np.sort(out)
        inn = self.in_indices[self.in_indptr[v] : self.in_indptr[v + 1]]
        return np.union1d(out, inn)

    def undirected_adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1-pattern CSR matrix carrying summed weights."""
        a = sparse.coo_matrix(
            (
                np.concatenate([self.weight, self.weight]),
                (np.concatenate([self.src, self.dst]), np.concatenate([self.dst, self.src])),
            ),
            shape=(self.n_nodes, self.n_nodes),
        ).tocsr()
        a.sum_duplicates()
        return a

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < len(row) and row[i] == v)

    def subgraph(self, nodes: Iterable[int]) -> "Graph":
        """Induced subgraph with ids re-densified in ascending old-id order."""
        nodes = np.unique(np.fromiter(nodes, dtype=np.int64))
        remap = np.full(self.n_nodes, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        keep = (remap[self.src] >= 0) & (remap[self.dst] >= 0)
        return Graph(
            n_nodes=len(nodes),
            src=remap[self.src[keep]],
            dst=remap[self.dst[keep]],
            weight=self.weight[keep],
            directed=self.directed,
            labels=[self.labels[i] for i in nodes],
        )

    def edge_subgraph(self, mask: np.ndarray) -> "Graph":
        """Same node set, only the edges selected by boolean ``mask``."""
        return Graph(
            n_nodes=self.n_nodes,
            src=self.src[mask],
            dst=self.dst[mask],
            weight=self.weight[mask],
            directed=self.directed,
            labels=list(self.labels),
        )

    def same_as(self, other: "Graph") -> bool:
        return (
            self.directed == other.directed
            and self.n_nodes == other.n_nodes
            and self.labels == other.labels
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.weight, other.weight)
        )


def _csr(n, src, dst, w):
    order = np.lexsort((dst, src))
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst[order].astype(np.int64), w[order].astype(np.float64)


def load_edge_list(path: str | Path, directed: bool = False) -> Graph:
    """Read a whitespace-separated ``src dst [weight]`` edge list.

    Node labels are relabelled to ``0..n-1`` in order of first appearance;
    the original tokens are kept in ``Graph.labels``.
    """
    ids: dict[str, int] = {}
    src, dst, weight = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) not in (2, 3):
                raise EdgeListError(f"{path}:{lineno}: expected 'src dst [weight]', got {s!r}")
            w = 1.0
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise EdgeListError(f"{path}:{lineno}: bad weight {parts[2]!r}") from None
                if not w > 0 or not np.isfinite(w):
                    raise EdgeListError(f"{path}:{lineno}: weight must be positive, got {w}")
            for tok in parts[:2]:
                if tok not in ids:
                    ids[tok] = len(ids)
            src.append(ids[parts[0]])
            dst.append(ids[parts[1]])
            weight.append(w)
    return Graph.from_edges(src, dst, weight, n_nodes=len(ids), directed=directed, labels=list(ids))


def save_edge_list(g: Graph, path: str | Path) -> None:
    weighted = bool(np.any(g.weight != 1.0))
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, w in zip(g.src.tolist(), g.dst.tolist(), g.weight.tolist()):
            if weighted:
                fh.write(f"{g.labels[u]} {g.labels[v]} {w!r}\n")
            else:
                fh.write(f"{g.labels[u]} {g.labels[v]}\n")


def component_labels(g: Graph, removed: np.ndarray | None = None) -> tuple[int, np.ndarray]:
    """Weakly connected components, optionally ignoring edges where ``removed`` is set."""
    keep = np.ones(g.n_edges, dtype=bool) if removed is None else ~removed
    a = sparse.coo_matrix(
        (np.ones(int(keep.sum())), (g.src[keep], g.dst[keep])), shape=(g.n_nodes, g.n_nodes)
    )
    return csgraph.connected_components(a, directed=True, connection="weak")


def largest_component(g: Graph) -> Graph:
    """Induced subgraph on the largest (weakly) connected component.

    Ties between equally large components go to the one holding the smallest
    original label.
    """
    if g.n_nodes == 0:
        raise ValueError("empty graph")
    n_comp, comp = component_labels(g)
    if n_comp == 1:
        return g
    sizes = np.bincount(comp)
    best = np.flatnonzero(sizes == sizes.max())
    if len(best) > 1:
        smallest = {}
        for node, c in enumerate(comp.tolist()):
            if sizes[c] == sizes.max():
                key = label_sort_key(g.labels[node])
                if c not in smallest or key < smallest[c]:
                    smallest[c] = key
        winner = min(smallest, key=smallest.__getitem__)
    else:
        winner = int(best[0])
    return g.subgraph(np.flatnonzero(comp == winner))


def edge_mask(g: Graph, edges: Iterable[tuple[int, int]]) -> np.ndarray:
    """Boolean mask over ``g``'s edge arrays selecting the given pairs."""
    lookup = {}
    for i, (u, v) in enumerate(zip(g.src.tolist(), g.dst.tolist())):
        lookup[(u, v)] = i
    mask = np.zeros(g.n_edges, dtype=bool)
    for u, v in edges:
        key = (u, v) if g.directed else (min(u, v), max(u, v))
        try:
            mask[lookup[key]] = True
        except KeyError:
            raise ValueError(f"edge {(u, v)} not in graph") from None
    return mask


def is_connected(g: Graph, removed: Iterable[tuple[int, int]] = ()) -> bool:
    """True iff ``g`` minus the ``removed`` edges is (weakly) connected."""
    if g.n_nodes <= 1:
        return True
    n_comp, _ = component_labels(g, edge_mask(g, removed))
    return n_comp == 1
