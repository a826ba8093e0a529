"""Command-line surface: dataset conversion, training, streaming, sweeps,
benchmarks, and artifact export.

Configuration is a flat key/value namespace: built-in defaults, overridden
by --config FILE entries, overridden by per-key command-line flags.
"""

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from . import datasets
from .evaluation import evaluate_embedding
from .experiments import (ExperimentConfig, bench_walk, run_all, run_seq,
                          sweep_mu, sweep_table_update, write_records_csv,
                          write_records_jsonl)
from .graph import GraphError
from .io import (DatasetBundle, DatasetFormatError, atomic_write, export_embedding,
                 import_embedding, load_checkpoint, load_dataset,
                 load_node_dictionary, parse_config_file, save_checkpoint,
                 save_node_dictionary)
from .oselm import OselmModel, embedding_snapshot
from .sgd import sgd_embedding_snapshot

_PATH_KEYS = {
    "edges": None,
    "labels": None,
    "node_dict": None,
    "out": "runs",
}

_EXPERIMENT_DEFAULTS = {f.name: f.default for f in fields(ExperimentConfig)}
_SCHEMA = dict(_EXPERIMENT_DEFAULTS, **_PATH_KEYS)

_INT_OR_NEVER = ("refresh_every", "eval_every")
_BOOL_KEYS = ("regularized",)


def _coerce(key: str, raw: str):
    if key not in _SCHEMA:
        raise ValueError(f"unknown configuration key {key!r}")
    if key in _INT_OR_NEVER:
        return None if raw.lower() in ("never", "none") else int(raw)
    if key in _BOOL_KEYS:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"bad boolean for {key!r}: {raw!r}")
    default = _SCHEMA[key]
    if isinstance(default, bool):
        raise AssertionError(key)
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def _add_config_flags(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help="flat key = value configuration file")
    for key in _SCHEMA:
        flag = "--" + key.replace("_", "-")
        sub.add_argument(flag, dest=key, default=argparse.SUPPRESS, metavar="V",
                         help=f"override config key {key}")


def _resolve_config(args) -> dict:
    cfg = dict(_SCHEMA)
    if getattr(args, "config", None):
        for key, raw in parse_config_file(args.config).items():
            cfg[key] = _coerce(key, raw)
    for key in _SCHEMA:
        if hasattr(args, key):
            val = getattr(args, key)
            cfg[key] = _coerce(key, val) if isinstance(val, str) else val
    return cfg


def _experiment_config(cfg: dict, scenario: str) -> ExperimentConfig:
    kwargs = {k: cfg[k] for k in _EXPERIMENT_DEFAULTS}
    kwargs["scenario"] = scenario
    return ExperimentConfig(**kwargs)


def _echo_config(cfg: dict):
    print("effective configuration:")
    for key in sorted(cfg):
        val = cfg[key]
        print(f"  {key} = {'never' if val is None and key in _INT_OR_NEVER else val}")


def _load_bundle(cfg: dict):
    if not cfg["edges"]:
        raise ValueError("an edge file is required (--edges or config key 'edges')")
    bundle = DatasetBundle(edges=Path(cfg["edges"]),
                           labels=Path(cfg["labels"]) if cfg["labels"] else None,
                           dictionary=Path(cfg["node_dict"]) if cfg["node_dict"] else None)
    return load_dataset(bundle)


def _write_outputs(out_dir: Path, cfg: dict, records, model=None, embedding=None,
                   mapping=None):
    out_dir.mkdir(parents=True, exist_ok=True)
    for rec in records:
        rec.config.update({k: cfg[k] for k in _PATH_KEYS})
    write_records_jsonl(records, out_dir / "metrics.jsonl")
    write_records_csv(records, out_dir / "metrics.csv")
    if model is not None:
        save_checkpoint(model, out_dir / "model.ckpt")
    if embedding is not None and mapping is not None:
        export_embedding(embedding, mapping, out_dir / "embedding.txt")
    if mapping is not None:
        save_node_dictionary(mapping, out_dir / "node_dict.txt")


def _print_record(rec):
    print(f"[{rec.scenario}] model={rec.config['model']} dims={rec.config['dims']} "
          f"mu={rec.config['mu']} update={rec.config['update']} "
          f"refresh={rec.config['refresh_every']}: "
          f"micro F1 {rec.micro_f1_mean:.4f} +/- {rec.micro_f1_std:.4f}, "
          f"macro F1 {rec.macro_f1_mean:.4f} +/- {rec.macro_f1_std:.4f} "
          f"({rec.walks_trained} walks)")


def _cmd_run(args, scenario: str) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg)
    ecfg = _experiment_config(cfg, scenario)
    g, labels, mapping = _load_bundle(cfg)
    if labels is None:
        raise ValueError("a label file is required for evaluation")
    result = (run_seq if scenario == "seq" else run_all)(g, labels, ecfg)
    _write_outputs(Path(cfg["out"]), cfg, [result.record],
                   model=result.model, embedding=result.embedding, mapping=mapping)
    _print_record(result.record)
    print(f"artifacts written to {cfg['out']}")
    return 0


def _cmd_sweep_mu(args) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg)
    ecfg = _experiment_config(cfg, "all")
    g, labels, mapping = _load_bundle(cfg)
    mu_values = [float(x) for x in args.mu_values.split(",") if x]
    records = sweep_mu(g, labels, ecfg, mu_values)
    _write_outputs(Path(cfg["out"]), cfg, records)
    for rec in records:
        _print_record(rec)
    return 0


def _cmd_sweep_table(args) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg)
    ecfg = _experiment_config(cfg, "seq")
    g, labels, mapping = _load_bundle(cfg)
    refresh = [None if x.lower() in ("never", "none") else int(x)
               for x in args.refresh_values.split(",") if x]
    records = sweep_table_update(g, labels, ecfg, refresh)
    _write_outputs(Path(cfg["out"]), cfg, records)
    for rec in records:
        _print_record(rec)
    return 0


def _cmd_bench(args) -> int:
    from dataclasses import replace

    cfg = _resolve_config(args)
    _echo_config(cfg)
    ecfg = _experiment_config(cfg, "all")
    g, _, _ = _load_bundle(cfg)
    rows = []
    for model in ("proposed", "original"):
        rows.append(bench_walk(g, replace(ecfg, model=model), args.reps))
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    header = list(rows[0].keys())

    def write(fh):
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(row[k]) for k in header) + "\n")

    atomic_write(out_dir / "bench.csv", write)
    for row in rows:
        print(f"{row['model']:>9s} d={row['dims']}: mean {row['mean_ms']:.3f} ms, "
              f"median {row['median_ms']:.3f} ms, p95 {row['p95_ms']:.3f} ms "
              f"per walk ({row['contexts']} contexts)")
    ratio = rows[1]["median_ms"] / rows[0]["median_ms"]
    print(f"original/proposed median ratio: {ratio:.2f}x")
    return 0


def _cmd_eval(args) -> int:
    embedding, ids = import_embedding(args.embedding)
    class_of = {}
    for lineno, line in enumerate(open(args.labels), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DatasetFormatError(f"{args.labels}:{lineno}: expected 'node_id class_id'")
        class_of[parts[0]] = int(parts[1])
    try:
        labels = [class_of[i] for i in ids]
    except KeyError as e:
        raise DatasetFormatError(f"no label for embedding row {e}") from None
    summary = evaluate_embedding(embedding, labels, trials=args.trials, seed=args.seed)
    report = summary.as_dict()
    report["per_class_f1"] = summary.reports[-1].f1.tolist()
    print(json.dumps(report, indent=2))
    if args.out:
        atomic_write(Path(args.out), lambda fh: fh.write(json.dumps(report, indent=2) + "\n"))
    return 0


def _cmd_export(args) -> int:
    model = load_checkpoint(args.checkpoint)
    snapshot = (embedding_snapshot(model) if isinstance(model, OselmModel)
                else sgd_embedding_snapshot(model))
    mapping = load_node_dictionary(args.node_dict) if args.node_dict else {
        str(i): i for i in range(snapshot.shape[0])}
    export_embedding(snapshot, mapping, args.out)
    print(f"wrote {snapshot.shape[0]} x {snapshot.shape[1]} embedding to {args.out}")
    return 0


def _cmd_convert(args) -> int:
    out_dir = Path(args.out)
    if args.format == "synthetic":
        g, labels = datasets.synthetic_community_graph(
            args.nodes, args.edge_count,
            datasets.CORA_CLASS_SIZES if args.nodes == datasets.CORA_NODES
            else _even_classes(args.nodes, args.classes),
            homophily=args.homophily, seed=args.seed)
        bundle = datasets.write_bundle(g, labels, out_dir, name=args.name)
        stats = datasets.dataset_stats(g, labels)
    elif args.format == "citation":
        bundle, stats = datasets.convert_citation_raw(args.content, args.cites,
                                                      out_dir, name=args.name)
    else:
        bundle, stats = datasets.convert_edge_list(args.edges, out_dir,
                                                   labels_path=args.labels,
                                                   name=args.name)
    print(f"wrote {bundle.edges}")
    for key, val in stats.items():
        print(f"  {key}: {val}")
    return 0


def _even_classes(nodes: int, k: int):
    base = nodes // k
    sizes = [base] * k
    for i in range(nodes - base * k):
        sizes[i] += 1
    return tuple(sizes)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqembed",
        description="Sequentially trainable node2vec embeddings for dynamic graphs")
    subs = parser.add_subparsers(dest="command")

    conv = subs.add_parser("convert", help="normalize or generate a dataset")
    conv.add_argument("--format", choices=("synthetic", "citation", "edgelist"),
                      required=True)
    conv.add_argument("--out", required=True)
    conv.add_argument("--name", default="dataset")
    conv.add_argument("--seed", type=int, default=0)
    conv.add_argument("--nodes", type=int, default=datasets.CORA_NODES)
    conv.add_argument("--edge-count", type=int, default=datasets.CORA_EDGES)
    conv.add_argument("--classes", type=int, default=len(datasets.CORA_CLASS_SIZES))
    conv.add_argument("--homophily", type=float, default=0.85)
    conv.add_argument("--content", help="citation format: node/class table")
    conv.add_argument("--cites", help="citation format: edge pair list")
    conv.add_argument("--edges", help="edgelist format: raw edge file")
    conv.add_argument("--labels", help="edgelist format: raw label file")
    conv.set_defaults(func=_cmd_convert)

    for name, scenario, help_text in (
            ("train", "all", "train on the full static graph"),
            ("stream", "seq", "forest start plus per-edge sequential training")):
        sub = subs.add_parser(name, help=help_text)
        _add_config_flags(sub)
        sub.set_defaults(func=lambda a, s=scenario: _cmd_run(a, s))

    smu = subs.add_parser("sweep-mu", help="scale-factor sweep plus random-input baseline")
    _add_config_flags(smu)
    smu.add_argument("--mu-values", default="0.001,0.005,0.01,0.05,0.1")
    smu.set_defaults(func=_cmd_sweep_mu)

    stu = subs.add_parser("sweep-table-update", help="alias-table refresh cadence sweep")
    _add_config_flags(stu)
    stu.add_argument("--refresh-values", default="1,100,10000,never")
    stu.set_defaults(func=_cmd_sweep_table)

    ben = subs.add_parser("bench", help="per-walk training time, both models")
    _add_config_flags(ben)
    ben.add_argument("--reps", type=int, default=100)
    ben.set_defaults(func=_cmd_bench)

    ev = subs.add_parser("eval", help="classify nodes from an embedding file")
    ev.add_argument("--embedding", required=True)
    ev.add_argument("--labels", required=True)
    ev.add_argument("--trials", type=int, default=3)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out")
    ev.set_defaults(func=_cmd_eval)

    ex = subs.add_parser("export", help="checkpoint to text embedding")
    ex.add_argument("--checkpoint", required=True)
    ex.add_argument("--node-dict")
    ex.add_argument("--out", required=True)
    ex.set_defaults(func=_cmd_export)
    return parser


def cli_dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    if not getattr(args, "func", None):
        parser.print_usage()
        return 2
    try:
        return args.func(args)
    except (DatasetFormatError, GraphError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
