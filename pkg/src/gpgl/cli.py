"""Command-line interface.

Subcommands cover the full pipeline: layout and augment compute grid
layouts for a dataset, export packs them into a tensor container, stats
summarises a corpus, render draws layouts as SVG, train runs the
cross-validated CNN, bench times the layout stage.

Artifact files are deterministic for fixed flags and inputs; run
summaries that include wall time go to stdout only. Failures print one
JSON object to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .augment import AugmentedSet, augment
from .datasets import GraphDataset, dataset_stats, export_tensors, featurize, load_tudataset
from .errors import GpglError
from .graph import Graph
from .grid import build_grid_tensor, vertex_loss_ratio
from .layout import LayoutParams, layout_graph
from .nn.network import NetworkConfig
from .nn.train import load_container_training_set, train
from .render import render_graph_svg
from .tensor_io import manifest_path_for

__all__ = ["main", "build_parser"]


def _json_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _add_layout_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("layout")
    group.add_argument("--alpha", type=float, default=1.25, help="separation radius")
    group.add_argument(
        "--lambda", dest="lam", type=float, default=1000.0, help="penalty weight"
    )
    group.add_argument("--gamma", type=float, default=0.1, help="rescale floor")
    group.add_argument(
        "--rescale", action="store_true", help="rescale between the two stages"
    )
    group.add_argument("--max-iters", type=int, default=2000)
    group.add_argument("--grad-tol", type=float, default=1e-4)
    group.add_argument("--seed", type=int, default=0)


def _add_jobs_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--jobs",
        type=int,
        default=None,
        help="worker processes (default: GPGL_JOBS env var, else 1)",
    )


def _params_from_args(args: argparse.Namespace) -> LayoutParams:
    return LayoutParams(
        alpha=args.alpha,
        lam=args.lam,
        gamma=args.gamma,
        enable_rescale=args.rescale,
        max_iters=args.max_iters,
        grad_tol=args.grad_tol,
        seed=args.seed,
    )


def _resolve_jobs(args: argparse.Namespace) -> int:
    if getattr(args, "jobs", None) is not None:
        jobs = args.jobs
    else:
        jobs = int(os.environ.get("GPGL_JOBS", "1"))
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    return jobs


def _augment_job(task: tuple[int, Graph, LayoutParams, int]) -> AugmentedSet:
    graph_id, g, p, k = task
    return augment(g, p, k, graph_id=graph_id)


def _augment_dataset(
    ds: GraphDataset, p: LayoutParams, k: int, jobs: int
) -> list[AugmentedSet]:
    tasks = [(i, g, p, k) for i, g in enumerate(ds.graphs)]
    if jobs == 1:
        return [_augment_job(t) for t in tasks]
    with multiprocessing.Pool(jobs) as pool:
        return list(pool.imap(_augment_job, tasks, chunksize=8))


def _write_run_files(
    out_dir: Path, sets: list[AugmentedSet], p: LayoutParams, k: int
) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    graphs_doc = []
    diag_lines = []
    for s in sets:
        runs = []
        for lay in s.layouts:
            if lay.failed:
                runs.append({"seed": lay.seed, "error": lay.error})
                diag_lines.append(
                    _json_line({"graph_id": s.graph_id, "seed": lay.seed, "error": lay.error})
                )
            else:
                runs.append({"seed": lay.seed, "cells": lay.grid.cells.tolist()})
                diag_lines.append(
                    _json_line(
                        {
                            "graph_id": s.graph_id,
                            "seed": lay.seed,
                            **lay.diagnostics.to_dict(),
                        }
                    )
                )
        graphs_doc.append({"graph_id": s.graph_id, "k": s.k, "layouts": runs})
    doc = {
        "params": {
            "alpha": p.alpha,
            "lambda": p.lam,
            "gamma": p.gamma,
            "enable_rescale": p.enable_rescale,
            "max_iters": p.max_iters,
            "grad_tol": p.grad_tol,
            "seed": p.seed,
        },
        "k": k,
        "graphs": graphs_doc,
    }
    (out_dir / "layouts.json").write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n"
    )
    (out_dir / "diagnostics.jsonl").write_text("\n".join(diag_lines) + "\n")


def _summary(sets: list[AugmentedSet], ds: GraphDataset, elapsed: float) -> dict:
    lost = 0
    total = 0
    failed = 0
    for s in sets:
        for lay in s.layouts:
            if lay.failed:
                failed += 1
                continue
            lost += lay.diagnostics.lost_vertices
            total += ds.graphs[s.graph_id].num_vertices
    return {
        "graphs": len(sets),
        "layouts": sum(s.k for s in sets) - failed,
        "failed": failed,
        "vertex_loss_percent": (100.0 * lost / total) if total else 0.0,
        "wall_time_s": elapsed,
    }


def _cmd_layout(args: argparse.Namespace) -> int:
    ds = load_tudataset(args.dataset)
    p = _params_from_args(args)
    start = time.perf_counter()
    sets = _augment_dataset(ds, p, 1, _resolve_jobs(args))
    elapsed = time.perf_counter() - start
    _write_run_files(Path(args.out), sets, p, 1)
    print(_json_line(_summary(sets, ds, elapsed)))
    return 0


def _cmd_augment(args: argparse.Namespace) -> int:
    ds = load_tudataset(args.dataset)
    p = _params_from_args(args)
    start = time.perf_counter()
    sets = _augment_dataset(ds, p, args.k, _resolve_jobs(args))
    elapsed = time.perf_counter() - start
    _write_run_files(Path(args.out), sets, p, args.k)
    print(_json_line(_summary(sets, ds, elapsed)))
    return 0


def _parse_window(text: str) -> tuple[int, int]:
    if "x" in text:
        h, w = text.split("x", 1)
        return int(h), int(w)
    side = int(text)
    return side, side


def _cmd_export(args: argparse.Namespace) -> int:
    ds = featurize(load_tudataset(args.dataset), mode=args.features)
    p = _params_from_args(args)
    start = time.perf_counter()
    sets = _augment_dataset(ds, p, args.k, _resolve_jobs(args))
    window = _parse_window(args.window)
    entries, reports = export_tensors(
        sets, ds, args.out, window=window, merge=args.merge
    )
    elapsed = time.perf_counter() - start
    summary = _summary(sets, ds, elapsed)
    summary["tensors"] = len(entries)
    summary["container"] = str(args.out)
    summary["manifest"] = str(manifest_path_for(args.out))
    summary["vertex_loss_percent"] = vertex_loss_ratio(reports)
    print(_json_line(summary))
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    ds = load_tudataset(args.dataset)
    stats = dataset_stats(ds)
    if args.json:
        print(_json_line(stats.to_dict()))
        return 0
    print(f"dataset       {stats.name}")
    print(f"graphs        {stats.num_graphs}")
    print(f"classes       {stats.num_classes}")
    print(f"avg nodes     {stats.avg_nodes:.2f}")
    print(f"avg edges     {stats.avg_edges:.2f}")
    print(f"avg degree    {stats.avg_degree:.2f}")
    print(f"max degree    {stats.max_degree}")
    print(f"feature dim   {stats.feature_dim}")
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    ds = load_tudataset(args.dataset)
    p = _params_from_args(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    indices = range(len(ds.graphs)) if args.graph is None else [args.graph]
    for i in indices:
        if not 0 <= i < len(ds.graphs):
            raise IndexError(f"graph index {i} out of range 0..{len(ds.graphs) - 1}")
        grid, _ = layout_graph(ds.graphs[i], p)
        svg = render_graph_svg(ds.graphs[i], grid, cell_size=args.cell_size)
        (out_dir / f"graph_{i}.svg").write_text(svg)
    print(_json_line({"rendered": len(list(indices)), "out": str(out_dir)}))
    return 0


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _cmd_train(args: argparse.Namespace) -> int:
    tensors, labels, graph_ids = load_container_training_set(args.tensors)
    config = NetworkConfig(
        conv_channels=_parse_int_list(args.channels),
        fc_sizes=_parse_int_list(args.fc),
        scales=args.scales,
        global_pool=args.global_pool,
        dropout=args.dropout,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        patience=args.patience,
        seed=args.seed,
    )
    start = time.perf_counter()
    result = train(
        tensors,
        labels,
        graph_ids,
        config,
        n_folds=args.folds,
        checkpoint_dir=args.checkpoint_dir,
    )
    elapsed = time.perf_counter() - start
    if args.out:
        Path(args.out).write_text(
            json.dumps(result.to_dict(), sort_keys=True, indent=2) + "\n"
        )
    print(
        _json_line(
            {
                "layout_accuracy": result.layout_accuracy,
                "graph_accuracy": result.graph_accuracy,
                "folds": args.folds,
                "wall_time_s": elapsed,
            }
        )
    )
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    ds = load_tudataset(args.dataset)
    p = _params_from_args(args)
    n = len(ds.graphs) if args.limit is None else min(args.limit, len(ds.graphs))
    times = []
    lost = 0
    total = 0
    for i in range(n):
        start = time.perf_counter()
        _, diag = layout_graph(ds.graphs[i], p)
        times.append(time.perf_counter() - start)
        lost += diag.lost_vertices
        total += ds.graphs[i].num_vertices
    arr = np.array(times)
    print(
        _json_line(
            {
                "dataset": ds.name,
                "graphs": n,
                "total_s": float(arr.sum()),
                "mean_s": float(arr.mean()),
                "median_s": float(np.median(arr)),
                "p95_s": float(np.percentile(arr, 95)),
                "vertex_loss_percent": 100.0 * lost / total,
            }
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpgl",
        description="Grid layouts of graphs and CNN classification on them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_layout = sub.add_parser("layout", help="one grid layout per graph")
    p_layout.add_argument("--dataset", required=True, help="dataset directory")
    p_layout.add_argument("--out", required=True, help="output directory")
    _add_layout_flags(p_layout)
    _add_jobs_flag(p_layout)
    p_layout.set_defaults(func=_cmd_layout)

    p_aug = sub.add_parser("augment", help="k layouts per graph")
    p_aug.add_argument("--dataset", required=True)
    p_aug.add_argument("--out", required=True)
    p_aug.add_argument("-k", type=int, default=5, help="layouts per graph")
    _add_layout_flags(p_aug)
    _add_jobs_flag(p_aug)
    p_aug.set_defaults(func=_cmd_augment)

    p_exp = sub.add_parser("export", help="augment and pack tensors")
    p_exp.add_argument("--dataset", required=True)
    p_exp.add_argument("--out", required=True, help="container file path")
    p_exp.add_argument("-k", type=int, default=5)
    p_exp.add_argument(
        "--features",
        choices=("auto", "one_hot_label", "one_hot_degree"),
        default="auto",
    )
    p_exp.add_argument("--window", default="64", help="window size, N or HxW")
    p_exp.add_argument("--merge", choices=("average", "max"), default="average")
    _add_layout_flags(p_exp)
    _add_jobs_flag(p_exp)
    p_exp.set_defaults(func=_cmd_export)

    p_stats = sub.add_parser("stats", help="corpus summary statistics")
    p_stats.add_argument("--dataset", required=True)
    p_stats.add_argument("--json", action="store_true")
    p_stats.set_defaults(func=_cmd_stats)

    p_render = sub.add_parser("render", help="draw layouts as SVG")
    p_render.add_argument("--dataset", required=True)
    p_render.add_argument("--out", required=True, help="output directory")
    p_render.add_argument("--graph", type=int, default=None, help="single graph index")
    p_render.add_argument("--cell-size", type=int, default=40)
    _add_layout_flags(p_render)
    p_render.set_defaults(func=_cmd_render)

    p_train = sub.add_parser("train", help="cross-validated CNN training")
    p_train.add_argument("--tensors", required=True, help="container file")
    p_train.add_argument("--out", default=None, help="results JSON path")
    p_train.add_argument("--checkpoint-dir", default=None)
    p_train.add_argument("--folds", type=int, default=10)
    p_train.add_argument("--channels", default="64,128,256")
    p_train.add_argument("--fc", default="256,128")
    p_train.add_argument("--scales", type=int, default=3)
    p_train.add_argument("--global-pool", choices=("max", "mean"), default="max")
    p_train.add_argument("--dropout", type=float, default=0.3)
    p_train.add_argument("--lr", type=float, default=1e-4)
    p_train.add_argument("--batch-size", type=int, default=10)
    p_train.add_argument("--epochs", type=int, default=100)
    p_train.add_argument("--patience", type=int, default=10)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.set_defaults(func=_cmd_train)

    p_bench = sub.add_parser("bench", help="layout timing over a dataset")
    p_bench.add_argument("--dataset", required=True)
    p_bench.add_argument("--limit", type=int, default=None)
    _add_layout_flags(p_bench)
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GpglError, OSError, ValueError, IndexError, KeyError) as exc:
        sys.stderr.write(
            _json_line({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
