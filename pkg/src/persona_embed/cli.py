"""Command-line entry point: ``split``, ``embed``, ``linkpred`` and ``fetch``.

Every option can also be set through an environment variable named
``PERSONA_EMBED_<OPTION>`` (upper case, dashes as underscores); explicit
flags win. Each run writes a JSON manifest next to its outputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from persona_embed import datasets
from persona_embed.egosplit import build_persona_graph, persona_edge_bound_check, write_persona_map
from persona_embed.graph import EdgeListError, largest_component, load_edge_list, save_edge_list
from persona_embed.linkpred import run_experiment
from persona_embed.pipeline import Persona2VecConfig, embed_baseline, run_pipeline
from persona_embed.skipgram import write_embedding

logger = logging.getLogger("persona_embed")

ENV_PREFIX = "PERSONA_EMBED_"
SCHEMA_VERSION = 1

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=0, help="0 = deterministic single thread")
    parser.add_argument("--log-level", default="INFO")


def _graph_args(parser):
    parser.add_argument("--input", required=True, help="edge list: 'src dst [weight]' per line")
    parser.add_argument("--directed", action="store_true")


def _model_args(parser):
    parser.add_argument("--lambda", dest="lam", type=float, default=0.5)
    parser.add_argument("--dim", type=int, default=128)
    parser.add_argument("--clustering", choices=["cc", "lp"], default="cc")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="persona-embed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("split", help="build the persona graph and export the persona map")
    _graph_args(p)
    p.add_argument("--clustering", choices=["cc", "lp"], default="cc")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--output", required=True, help="output path prefix")
    _common(p)

    p = sub.add_parser("embed", help="embed a graph (persona pipeline or plain baseline)")
    _graph_args(p)
    p.add_argument("--no-split", action="store_true", help="plain single-vector embedding")
    _model_args(p)
    p.add_argument("--output", required=True, help="output path prefix")
    _common(p)

    p = sub.add_parser("linkpred", help="link-prediction evaluation")
    _graph_args(p)
    p.add_argument("--no-split", action="store_true")
    _model_args(p)
    p.add_argument("--seeds", type=int, default=5, help="number of evaluation rounds")
    p.add_argument("--agg", choices=["max", "min", "mean"], default="max")
    p.add_argument("--test-fraction", type=float, default=0.5)
    p.add_argument("--report", required=True, help="JSON report path")
    _common(p)

    p = sub.add_parser("fetch", help="download benchmark datasets")
    p.add_argument("--name", choices=sorted(datasets.DATASETS) + ["all"], required=True)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--force", action="store_true")
    p.add_argument("--log-level", default="INFO")

    for sp in sub.choices.values():
        _apply_env_defaults(sp)
    return parser


def _apply_env_defaults(parser):
    for action in parser._actions:
        if not action.option_strings or action.dest == "help":
            continue
        env = ENV_PREFIX + action.option_strings[-1].lstrip("-").replace("-", "_").upper()
        if env not in os.environ:
            continue
        raw = os.environ[env]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        else:
            value = action.type(raw) if action.type else raw
        action.default = value
        action.required = False


def _config(args) -> Persona2VecConfig:
    if args.seed < 0:
        raise UsageError("--seed must be non-negative")
    return Persona2VecConfig(
        lam=args.lam, dim=args.dim, clustering=args.clustering, seed=args.seed, threads=args.threads
    )


def _write_manifest(path: Path, args, argv, config: dict, artifacts: list[Path], timings: dict):
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "argv": list(argv),
        "config": config,
        "input": {"path": str(args.input), "sha256": datasets.sha256_file(args.input)},
        "seed": args.seed,
        "artifacts": {str(p): datasets.sha256_file(p) for p in artifacts},
        "timings": timings,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


def _prefix_path(prefix: str, suffix: str) -> Path:
    p = Path(prefix + suffix)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _cmd_split(args, argv):
    g = load_edge_list(args.input, directed=args.directed)
    t0 = time.perf_counter()
    pg = build_persona_graph(g, args.clustering, args.lam, args.seed)
    timings = {"split": time.perf_counter() - t0}
    pmap = _prefix_path(args.output, ".personas.tsv")
    pedges = _prefix_path(args.output, ".persona_graph.txt")
    write_persona_map(pg, pmap)
    save_edge_list(pg.graph, pedges)
    report = persona_edge_bound_check(pg)
    logger.info(
        "%d nodes -> %d personas, %d persona edges (%.4g of |E|^1.5)",
        g.n_nodes,
        pg.n_personas,
        pg.n_persona_edges,
        report.ratio,
    )
    config = {"clustering": args.clustering, "lam": args.lam, "seed": args.seed, "directed": args.directed}
    _write_manifest(_prefix_path(args.output, ".manifest.json"), args, argv, config, [pmap, pedges], timings)


def _cmd_embed(args, argv):
    g = load_edge_list(args.input, directed=args.directed)
    cfg = _config(args)
    artifacts = []
    emb_path = _prefix_path(args.output, ".emb")
    if args.no_split:
        t0 = time.perf_counter()
        phi = embed_baseline(g, cfg).phi_in
        timings = {"base": time.perf_counter() - t0}
        write_embedding(phi, g.labels, emb_path)
    else:
        res = run_pipeline(g, cfg)
        timings = res.timings
        write_embedding(res.embedding.phi_in, res.persona_graph.graph.labels, emb_path)
        pmap = _prefix_path(args.output, ".personas.tsv")
        write_persona_map(res.persona_graph, pmap)
        artifacts.append(pmap)
    artifacts.insert(0, emb_path)
    config = dict(cfg.to_dict(), no_split=args.no_split, directed=args.directed)
    _write_manifest(_prefix_path(args.output, ".manifest.json"), args, argv, config, artifacts, timings)


def _cmd_linkpred(args, argv):
    if args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    g = load_edge_list(args.input, directed=args.directed)
    full = (g.n_nodes, g.n_edges)
    g = largest_component(g)
    if (g.n_nodes, g.n_edges) != full:
        logger.info("using largest component: |V|=%d |E|=%d", g.n_nodes, g.n_edges)
    cfg = _config(args)
    seeds = list(range(args.seed, args.seed + args.seeds))
    t0 = time.perf_counter()
    res = run_experiment(
        g, cfg, test_fraction=args.test_fraction, seeds=seeds, agg=args.agg, no_split=args.no_split
    )
    wall = time.perf_counter() - t0
    config = dict(cfg.to_dict(), agg=args.agg, no_split=args.no_split, test_fraction=args.test_fraction)
    report = {
        "schema_version": SCHEMA_VERSION,
        "dataset": Path(args.input).stem,
        "directed": args.directed,
        "n_nodes": g.n_nodes,
        "n_edges": g.n_edges,
        "config": config,
        "per_seed": [
            {"seed": s, "auc": a, "n_test": nt, "n_neg": nn, "timings": t}
            for s, a, nt, nn, t in zip(res.seeds, res.aucs, res.n_test, res.n_neg, res.timings)
        ],
        "auc": res.auc,
        "stderr": res.stderr,
        "wall_time": wall,
    }
    report_path = Path(args.report)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(json.dumps(report, indent=2))
    logger.info("AUC %.4f +/- %.4f over %d seeds", res.auc, res.stderr, len(seeds))
    manifest_path = report_path.with_name(report_path.stem + ".manifest.json")
    _write_manifest(manifest_path, args, argv, config, [report_path], {"wall": wall})


def _cmd_fetch(args, argv):
    names = sorted(datasets.DATASETS) if args.name == "all" else [args.name]
    for name in names:
        path = datasets.fetch(name, args.data_dir, force=args.force)
        logger.info("%s -> %s", name, path)


COMMANDS = {"split": _cmd_split, "embed": _cmd_embed, "linkpred": _cmd_linkpred, "fetch": _cmd_fetch}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        COMMANDS[args.command](args, argv)
    except UsageError as exc:
        print(f"persona-embed: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EdgeListError, FileNotFoundError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
