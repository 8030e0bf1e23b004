"""Download and normalise the benchmark graphs.

Raw files are converted to plain edge lists ``<data_dir>/<name>.txt``. No
checksums are pinned upstream, so the first successful download records the
SHA-256 of the raw file in ``<data_dir>/checksums.json`` and later fetches
must match it.
"""

from __future__ import annotations

import gzip
import hashlib
import json
import logging
import os
import shutil
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from persona_embed.graph import Graph, largest_component, load_edge_list

logger = logging.getLogger(__name__)

DATA_ENV = "PERSONA_EMBED_DATA"


@dataclass(frozen=True)
class Dataset:
    name: str
    url: str
    directed: bool
    # (|V|, |E|) of the largest component
    expected_size: tuple[int, int]
    sha256: str | None = None


DATASETS = {
    d.name: d
    for d in [
        Dataset("ppi", "http://snap.stanford.edu/node2vec/Homo_sapiens.mat", False, (3863, 38705)),
        Dataset("ca-HepTh", "https://snap.stanford.edu/data/ca-HepTh.txt.gz", False, (9877, 25998)),
        Dataset("ca-AstroPh", "https://snap.stanford.edu/data/ca-AstroPh.txt.gz", False, (17903, 197301)),
        Dataset("wiki-vote", "https://snap.stanford.edu/data/wiki-Vote.txt.gz", True, (7066, 103633)),
        Dataset("soc-epinions", "https://snap.stanford.edu/data/soc-Epinions1.txt.gz", True, (75877, 508836)),
    ]
}


def data_dir(path: str | Path | None = None) -> Path:
    return Path(path or os.environ.get(DATA_ENV, "data"))


def dataset_path(name: str, root: str | Path | None = None) -> Path:
    return data_dir(root) / f"{name}.txt"


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _mat_to_edge_list(raw: Path, out: Path) -> None:
    from scipy.io import loadmat
    from scipy import sparse

    net = sparse.coo_matrix(loadmat(raw)["network"])
    keep = net.row < net.col
    with open(out, "w", encoding="utf-8") as fh:
        for u, v in zip(net.row[keep].tolist(), net.col[keep].tolist()):
            fh.write(f"{u} {v}\n")


def fetch(name: str, root: str | Path | None = None, force: bool = False) -> Path:
    """Download ``name`` into the data directory and return the edge-list path."""
    try:
        ds = DATASETS[name]
    except KeyError:
        raise ValueError(f"unknown dataset {name!r}; known: {sorted(DATASETS)}") from None
    root = data_dir(root)
    root.mkdir(parents=True, exist_ok=True)
    out = dataset_path(name, root)
    if out.exists() and not force:
        return out
    raw = root / Path(ds.url).name
    logger.info("downloading %s", ds.url)
    with urllib.request.urlopen(ds.url, timeout=60) as resp, open(raw, "wb") as fh:
        shutil.copyfileobj(resp, fh)

    digest = sha256_file(raw)
    registry_path = root / "checksums.json"
    registry = json.loads(registry_path.read_text()) if registry_path.exists() else {}
    expected = ds.sha256 or registry.get(name)
    if expected and expected != digest:
        raise ValueError(f"checksum mismatch for {name}: {digest} != {expected}")
    registry[name] = digest
    registry_path.write_text(json.dumps(registry, indent=2, sort_keys=True))

    if raw.suffix == ".mat":
        _mat_to_edge_list(raw, out)
    elif raw.suffix == ".gz":
        with gzip.open(raw, "rb") as src, open(out, "wb") as dst:
            shutil.copyfileobj(src, dst)
    else:
        shutil.copyfile(raw, out)
    return out


def load_dataset(name: str, root: str | Path | None = None) -> Graph:
    """Largest (weakly) connected component of a fetched dataset."""
    ds = DATASETS[name]
    path = dataset_path(name, root)
    if not path.exists():
        raise FileNotFoundError(
            f"dataset {name!r} not found at {path}; run `persona-embed fetch --name {name}`"
        )
    g = largest_component(load_edge_list(path, directed=ds.directed))
    if (g.n_nodes, g.n_edges) != ds.expected_size:
        logger.warning(
            "%s: got |V|=%d |E|=%d, expected %s", name, g.n_nodes, g.n_edges, ds.expected_size
        )
    return g


def karate_club() -> Graph:
    """Zachary's karate club with the usual 1-based member labels."""
    edges = np.array(_KARATE_EDGES)
    labels = [str(i) for i in range(1, 35)]
    return Graph.from_edges(edges[:, 0] - 1, edges[:, 1] - 1, n_nodes=34, labels=labels)


_KARATE_EDGES = [
    (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (1, 7), (1, 8), (1, 9), (1, 11), (1, 12),
    (1, 13), (1, 14), (1, 18), (1, 20), (1, 22), (1, 32), (2, 3), (2, 4), (2, 8),
    (2, 14), (2, 18), (2, 20), (2, 22), (2, 31), (3, 4), (3, 8), (3, 9), (3, 10),
    (3, 14), (3, 28), (3, 29), (3, 33), (4, 8), (4, 13), (4, 14), (5, 7), (5, 11),
    (6, 7), (6, 11), (6, 17), (7, 17), (9, 31), (9, 33), (9, 34), (10, 34), (14, 34),
    (15, 33), (15, 34), (16, 33), (16, 34), (19, 33), (19, 34), (20, 34), (21, 33),
    (21, 34), (23, 33), (23, 34), (24, 26), (24, 28), (24, 30), (24, 33), (24, 34),
    (25, 26), (25, 28), (25, 32), (26, 32), (27, 30), (27, 34), (28, 34), (29, 32),
    (29, 34), (30, 33), (30, 34), (31, 33), (31, 34), (32, 33), (32, 34), (33, 34),
]
