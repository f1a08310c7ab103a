"""Command-line interface: ``generate``, ``cluster``, ``check`` and ``project``.

Exit codes: 0 success, 1 I/O failure, 2 invalid input or configuration.
"""
import argparse
import dataclasses
import datetime as _dt
import json
import os
import sys

import numpy as np

from . import __version__
from .graph_io import (GeneratorError, GeneratorSpec, ParseError,
                       build_similarity, generate_two_cluster_er,
                       largest_connected_component, prune_degree_one,
                       read_edge_list, write_edge_list, write_labels)
from .objective import validate_membership
from .secondorder import refine
from .simplex import project_simplex
from .solvers import INITS, METHODS, SolverConfig, load_config, solve


class UsageError(Exception):
    """Invalid input or configuration (exit code 2)."""


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _fmt(x):
    return f"{x:.17g}"


def _write_manifest(path, manifest):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _load_graph(path, prune):
    graph, _ = read_edge_list(path)
    graph = largest_connected_component(graph)
    if prune:
        graph = prune_degree_one(graph)
        if graph.num_nodes == 0:
            raise UsageError("graph is empty after degree-1 pruning (try --no-prune)")
    return graph


def write_membership(path, X, node_ids):
    C = X.shape[0]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id," + ",".join(f"x_{k + 1}" for k in range(C)) + "\n")
        for j, nid in enumerate(node_ids):
            fh.write(f"{nid}," + ",".join(_fmt(v) for v in X[:, j]) + "\n")


def read_membership(path):
    """Read ``node_id,x_1,...,x_C`` rows; returns ``(node_ids, X)`` with X of shape (C, N)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise UsageError(f"{path}: empty membership file")
    header = lines[0].split(",")
    if header[0] != "node_id" or len(header) < 2:
        raise UsageError(f"{path}: bad header {lines[0]!r}")
    C = len(header) - 1
    ids, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != C + 1:
            raise UsageError(f"{path}:{lineno}: expected {C + 1} fields")
        try:
            ids.append(int(parts[0]))
            rows.append([float(v) for v in parts[1:]])
        except ValueError:
            raise UsageError(f"{path}:{lineno}: malformed row {line!r}") from None
    return np.array(ids, dtype=np.int64), np.array(rows, dtype=float).T.reshape(C, -1)


def cmd_generate(args):
    try:
        spec = GeneratorSpec(args.n1, args.p1, args.n2, args.p2, args.k_inter, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    started = _now()
    try:
        graph, labels = generate_two_cluster_er(spec)
    except GeneratorError as exc:
        raise UsageError(str(exc)) from None
    os.makedirs(args.out, exist_ok=True)
    write_edge_list(graph, os.path.join(args.out, "graph.txt"))
    write_labels(labels, os.path.join(args.out, "labels.csv"))
    _write_manifest(os.path.join(args.out, "manifest.json"), {
        "command": "generate",
        "spec": dataclasses.asdict(spec),
        "seed": spec.seed,
        "version": __version__,
        "started": started,
        "finished": _now(),
        "num_nodes": graph.num_nodes,
        "num_edges": graph.num_edges,
        "label_counts_pre_prune": {"1": spec.n1, "2": spec.n2},
        "label_counts": {"1": int(np.sum(labels == 1)), "2": int(np.sum(labels == 2))},
    })
    print(f"nodes: {graph.num_nodes}  edges: {graph.num_edges}  "
          f"labels: {int(np.sum(labels == 1))}/{int(np.sum(labels == 2))}")
    return 0


def _solver_config(args):
    overrides = {
        "step_size": args.step, "max_iter": args.max_iter, "tol": args.tol,
        "method": args.method, "init": args.init, "init_row": args.init_row,
        "seed": args.seed, "trace_every": args.trace_every,
        "fista_restart": True if args.fista_restart else None,
        "threads": args.threads,
    }
    try:
        if args.config:
            return load_config(args.config, **overrides)
        return SolverConfig(**{k: v for k, v in overrides.items() if v is not None})
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def cmd_cluster(args):
    config = _solver_config(args)
    if args.c < 1:
        raise UsageError("--c must be >= 1")
    if config.init == "given":
        raise UsageError("init 'given' is only available from the library API")
    started = _now()
    graph = _load_graph(args.graph, prune=not args.no_prune)
    S = build_similarity(graph)
    X, trace = solve(S, args.c, config)

    os.makedirs(args.out, exist_ok=True)
    write_membership(os.path.join(args.out, "membership.csv"), X, graph.origin)
    with open(os.path.join(args.out, "trace.csv"), "w", encoding="utf-8") as fh:
        fh.write(trace.to_csv(timing=not args.no_timing))
    resolved = config.to_dict()
    resolved["step_size"] = trace.step_size
    resolved["threads"] = args.threads
    _write_manifest(os.path.join(args.out, "manifest.json"), {
        "command": "cluster",
        "inputs": [os.path.abspath(args.graph)],
        "clusters": args.c,
        "prune": not args.no_prune,
        "config": resolved,
        "seed": config.seed,
        "version": __version__,
        "started": started,
        "finished": _now(),
        "termination": trace.reason,
        "iterations": trace.n_iter,
        "final_loss": trace.final_loss,
        "num_nodes": graph.num_nodes,
    })
    print(f"final loss: {_fmt(trace.final_loss)}")
    print(f"iterations: {trace.n_iter} (effective: {trace.effective_iterations})")
    print(f"termination: {trace.reason}")
    return 0


def cmd_check(args):
    graph = _load_graph(args.graph, prune=not args.no_prune)
    ids, X = read_membership(args.membership)
    pos = {int(o): j for j, o in enumerate(graph.origin)}
    if len(ids) != graph.num_nodes or set(ids.tolist()) != set(pos):
        raise UsageError(f"membership covers {len(ids)} nodes but the graph has "
                         f"{graph.num_nodes} (or node ids differ)")
    order = np.empty(graph.num_nodes, dtype=np.int64)
    order[[pos[int(i)] for i in ids]] = np.arange(len(ids))
    X = X[:, order]
    try:
        validate_membership(X, atol=1e-6)
    except ValueError as exc:
        raise UsageError(f"membership is not column-stochastic: {exc}") from None
    S = build_similarity(graph)
    report = refine(X, S, tau_probe=args.tau_probe, eps=args.eps, budget=args.budget,
                    n_random=args.random_directions, seed=args.seed, threads=args.threads)
    va = report.pop("verdict_a")
    report.pop("verdict_b")
    if va.witness is not None and va.status == "refuted_condition_a":
        k, i = np.nonzero(va.witness)
        report["condition_a"]["witness_support"] = [
            {"node_id": int(graph.origin[ii]), "cluster": int(kk) + 1,
             "value": float(va.witness[kk, ii])} for kk, ii in zip(k, i)]
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_project(args):
    try:
        x = [float(tok) for tok in args.vector.split(",")]
        y = project_simplex(x)
    except ValueError as exc:
        raise UsageError(f"cannot parse vector {args.vector!r}: {exc}") from None
    print(",".join(f"{v:.17g}" for v in y))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="fuzzclust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthetic two-cluster Erdos-Renyi graph")
    g.add_argument("--n1", type=int, required=True)
    g.add_argument("--p1", type=float, required=True)
    g.add_argument("--n2", type=int, required=True)
    g.add_argument("--p2", type=float, required=True)
    g.add_argument("--k-inter", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=".", help="output directory")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("cluster", help="fuzzy clustering of an edge-list graph")
    c.add_argument("graph")
    c.add_argument("--c", type=int, default=2, help="number of clusters")
    c.add_argument("--method", choices=METHODS)
    c.add_argument("--step", help="step size, or 'auto'")
    c.add_argument("--tol", type=float)
    c.add_argument("--max-iter", type=int)
    c.add_argument("--init", choices=[i for i in INITS if i != "given"])
    c.add_argument("--init-row", type=int, help="0-based row for --init row_one")
    c.add_argument("--seed", type=int)
    c.add_argument("--trace-every", type=int)
    c.add_argument("--fista-restart", action="store_true")
    c.add_argument("--config", help="key=value file; flags override it")
    c.add_argument("--no-prune", action="store_true", help="skip degree-1 pruning")
    c.add_argument("--no-timing", action="store_true",
                   help="leave elapsed_ms empty so traces are reproducible byte for byte")
    c.add_argument("--threads", help="worker threads (integer or 'max')")
    c.add_argument("--out", default=".", help="output directory")
    c.set_defaults(func=cmd_cluster)

    k = sub.add_parser("check", help="first- and second-order screening of a membership")
    k.add_argument("graph")
    k.add_argument("membership")
    k.add_argument("--no-prune", action="store_true")
    k.add_argument("--tau-probe", type=float)
    k.add_argument("--eps", type=float, default=1e-6, help="fixed-point residual tolerance")
    k.add_argument("--budget", type=int, default=10000)
    k.add_argument("--random-directions", type=int, default=0)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--threads")
    k.add_argument("--out", help="also write the JSON report here")
    k.set_defaults(func=cmd_check)

    p = sub.add_parser("project", help="project a vector onto the unit simplex")
    p.add_argument("vector", help="comma-separated reals, e.g. 1.2,-0.3,0.1")
    p.set_defaults(func=cmd_project)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
