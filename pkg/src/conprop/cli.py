"""Command-line interface.

Subcommands: `graph gen`, `run`, `analyze`, `compare`, `adaptive`.
Exit codes: 0 on success, 1 on configuration errors, 2 when some sweep
cells failed but the sweep itself completed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import adaptive as adaptive_mod
from . import analysis, baseline, graphs
from .config import ConfigError, ExperimentConfig, load_config
from .sweep import SweepResult, build_cell_graph, emit, run_experiment

log = logging.getLogger("conprop")


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="experiment config file")
    parser.add_argument("--out-dir", help="output directory (overrides out.dir)")
    parser.add_argument("--threads", type=int, default=1, help="concurrent sweep cells")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")


def _graph_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=["cycle", "torus", "regular", "tree"])
    parser.add_argument("--n", type=int)
    parser.add_argument("--d", type=int)
    parser.add_argument("--m", type=int)
    parser.add_argument("--side", type=int)
    parser.add_argument("--shape", choices=["path", "balanced", "random"], default="random")
    parser.add_argument("--arity", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)


def _graph_from_flags(args) -> graphs.Graph:
    if args.family == "cycle":
        return graphs.generate_cycle(args.n)
    if args.family == "torus":
        return graphs.generate_torus(args.m, args.side)
    if args.family == "regular":
        return graphs.generate_random_regular(args.n, args.d, args.seed)
    if args.family == "tree":
        return graphs.generate_tree(args.n, shape=args.shape, seed=args.seed, arity=args.arity)
    raise ConfigError("--family is required without --config")


def _load(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for this command")
    config = load_config(args.config)
    if args.out_dir:
        config.values["out.dir"] = args.out_dir
    return config


def _cmd_graph_gen(args) -> int:
    graph = _graph_from_flags(args)
    if args.out:
        graphs.write_edge_list(graph, args.out)
        log.info("wrote %s (%d nodes, %d edges)", args.out, graph.n, graph.num_undirected)
    else:
        sys.stdout.write(f"n {graph.n}\n")
        for i, j in graph.undirected_edges:
            sys.stdout.write(f"{i} {j}\n")
    return 0


def _cmd_run(args) -> int:
    config = _load(args)
    print(f"sweep: {config.cell_count()} cell(s)", file=sys.stderr)
    result = run_experiment(config, threads=args.threads)
    written = emit(result, config.values["out.dir"], fmt="both", config=config)
    for path in written:
        log.info("wrote %s", path)
    if result.failed:
        for cell in result.failed:
            print(f"cell {cell.key}: {cell.error}", file=sys.stderr)
        return 2
    return 0


def _analyze_graph(graph: graphs.Graph, laziness: float = 0.5) -> dict:
    report = analysis.MixingReport()
    d = graph.regular_degree()
    if d is not None and d >= 2:
        proc = analysis.edge_process(graph)
        report = report.merged(analysis.cesaro_mixing_time(proc.p_hat, proc.p_star))
    report = report.merged(
        analysis.pairwise_mixing_time(baseline.metropolis_matrix(graph, laziness))
    )
    return {
        "tau_star": report.tau_star,
        "attained_t": report.attained_t,
        "tau2": report.tau2,
        "lambda2": report.lambda2,
        "n": graph.n,
        "d": d,
    }


def _cmd_analyze(args) -> int:
    out_dir = Path(args.out_dir) if args.out_dir else None
    if args.config:
        config = _load(args)
        reports = []
        for cell in config.cells():
            graph = build_cell_graph(cell)
            entry = _analyze_graph(graph, cell.get("pairwise.laziness", 0.5))
            entry["key"] = list(cell["cell.key"])
            reports.append(entry)
        payload = json.dumps(reports, indent=2)
    else:
        graph = _graph_from_flags(args)
        payload = json.dumps(_analyze_graph(graph), indent=2)
    print(payload)
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "analysis.json").write_text(payload + "\n")
    return 0


def _cmd_compare(args) -> int:
    config = _load(args)
    has_beta = "cp.beta" in config.values or "sweep.beta" in config.values
    if config.values.get("cp.beta-rule") != "mixing-bound" and not has_beta:
        raise ConfigError("compare needs cp.beta (or cp.beta-rule = mixing-bound)")
    print(f"sweep: {config.cell_count()} cell(s) x 2 protocols", file=sys.stderr)

    runs = {}
    for protocol in ("cp", "pairwise"):
        variant = ExperimentConfig(values=dict(config.values), source_path=config.source_path)
        variant.values["protocol"] = protocol
        if protocol == "pairwise":
            variant.values.pop("cp.beta", None)
            variant.values.pop("sweep.beta", None)
        runs[protocol] = run_experiment(variant, threads=args.threads)

    out = Path(config.values["out.dir"])
    out.mkdir(parents=True, exist_ok=True)
    all_cells = runs["cp"].cells + runs["pairwise"].cells
    emit(SweepResult(cells=all_cells), out, fmt="both", config=config)

    lines = ["family,n,d,seed,epsilon,t_eps_cp,t_eps_pairwise,tau_star,tau2"]
    for cp_cell, pw_cell in zip(runs["cp"].cells, runs["pairwise"].cells):
        def fmt(v):
            return "" if v is None else (f"{v:.12g}" if isinstance(v, float) else str(v))

        lines.append(
            ",".join(
                [
                    fmt(cp_cell.family),
                    fmt(cp_cell.n),
                    fmt(cp_cell.d),
                    fmt(cp_cell.seed),
                    fmt(cp_cell.epsilon),
                    fmt(cp_cell.t_eps),
                    fmt(pw_cell.t_eps),
                    fmt(cp_cell.tau_star),
                    fmt(pw_cell.tau2 if pw_cell.tau2 is not None else cp_cell.tau2),
                ]
            )
        )
    (out / "comparison.csv").write_text("\n".join(lines) + "\n")
    failed = runs["cp"].failed + runs["pairwise"].failed
    if failed:
        for cell in failed:
            print(f"cell {cell.key}: {cell.error}", file=sys.stderr)
        return 2
    return 0


def _cmd_adaptive(args) -> int:
    out_dir = Path(args.out_dir or "results")
    if args.config:
        config = _load(args)
        if config.values["protocol"] != "cp-adaptive":
            raise ConfigError("the adaptive command needs protocol = cp-adaptive")
        result = run_experiment(config, threads=args.threads)
        emit(result, config.values["out.dir"], fmt="both", config=config)
        return 2 if result.failed else 0
    if args.epsilon is None:
        raise ConfigError("--epsilon is required without --config")
    graph = _graph_from_flags(args)
    rng = np.random.default_rng(args.y_seed)
    y = rng.random(graph.n)
    trace = adaptive_mod.run_adaptive(graph, y, args.epsilon, tau_cap=args.tau_cap)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace.write_csv(out_dir / "adaptive.trace.csv")
    trace.write_terminal_json(out_dir / "adaptive.terminal.json")
    print(
        json.dumps(
            {
                "final_t": trace.final_t,
                "final_err": trace.final_err,
                "phases": int(trace.phase[-1]) + 1,
                "reason": trace.reason,
            },
            indent=2,
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conprop",
        description="Consensus-propagation simulator and mixing-time analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_graph = sub.add_parser("graph", help="graph utilities")
    graph_sub = p_graph.add_subparsers(dest="graph_command", required=True)
    p_gen = graph_sub.add_parser("gen", help="generate a graph file")
    _graph_flags(p_gen)
    p_gen.add_argument("--out", help="edge-list output path (stdout if omitted)")
    _common_flags(p_gen)
    p_gen.set_defaults(func=_cmd_graph_gen)

    p_run = sub.add_parser("run", help="run an experiment config")
    _common_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_an = sub.add_parser("analyze", help="mixing-time report for a graph or sweep")
    _common_flags(p_an)
    _graph_flags(p_an)
    p_an.set_defaults(func=_cmd_analyze)

    p_cmp = sub.add_parser("compare", help="run cp and pairwise on the same cells")
    _common_flags(p_cmp)
    p_cmp.set_defaults(func=_cmd_compare)

    p_ad = sub.add_parser("adaptive", help="doubling-search run")
    _common_flags(p_ad)
    _graph_flags(p_ad)
    p_ad.add_argument("--epsilon", type=float, help="target accuracy")
    p_ad.add_argument("--tau-cap", type=float, default=65536.0)
    p_ad.add_argument("--y-seed", type=int, default=0, help="seed for uniform observations")
    p_ad.set_defaults(func=_cmd_adaptive)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
