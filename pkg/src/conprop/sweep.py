"""Sweep execution: expand a config into cells, run them, emit results.

Cells are independent and may run on a thread pool; results are collected
and written in cell-key order so outputs are reproducible regardless of
completion order. A failing cell is recorded, not fatal to the sweep.
"""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import adaptive, analysis, baseline, engine, graphs
from .config import ConfigError, ExperimentConfig
from .trace import RunTrace

__all__ = ["CellResult", "SweepResult", "run_experiment", "emit", "build_cell_graph", "SUMMARY_COLUMNS"]

log = logging.getLogger("conprop")

SUMMARY_COLUMNS = (
    "family",
    "n",
    "d",
    "seed",
    "protocol",
    "beta",
    "epsilon",
    "t_eps",
    "tau_star",
    "tau2",
    "wall_ms",
)


@dataclass
class CellResult:
    key: tuple
    family: str
    n: int | None = None
    d: int | None = None
    seed: int | None = None
    protocol: str | None = None
    beta: float | None = None
    epsilon: float | None = None
    t_eps: int | None = None
    tau_star: float | None = None
    tau2: float | None = None
    wall_ms: float | None = None
    error: str | None = None
    trace: RunTrace | None = None

    def row(self) -> dict:
        return {c: getattr(self, c) for c in SUMMARY_COLUMNS}


@dataclass
class SweepResult:
    cells: list[CellResult]

    @property
    def failed(self) -> list[CellResult]:
        return [c for c in self.cells if c.error is not None]


def build_cell_graph(cell: dict) -> graphs.Graph:
    family = cell["graph.family"]
    if family == "cycle":
        return graphs.generate_cycle(cell["graph.n"])
    if family == "torus":
        return graphs.generate_torus(cell["graph.m"], cell["graph.side"])
    if family == "regular":
        return graphs.generate_random_regular(cell["graph.n"], cell["graph.d"], cell["graph.seed"])
    if family == "tree":
        return graphs.generate_tree(
            cell["graph.n"],
            shape=cell.get("graph.shape", "random"),
            seed=cell.get("graph.seed", 0),
            arity=cell.get("graph.arity", 2),
        )
    return graphs.read_edge_list(cell["graph.file"])


def _build_y(cell: dict, n: int) -> np.ndarray:
    source = cell["y.source"]
    if source == "uniform":
        return np.random.default_rng(cell["y.seed"]).random(n)
    if source == "constant":
        return np.full(n, cell["y.value"])
    values = [float(s) for s in Path(cell["y.file"]).read_text().split()]
    if len(values) != n:
        raise ConfigError(f"y.file has {len(values)} values, graph has {n} nodes")
    return np.asarray(values)


def _build_schedule(cell: dict) -> engine.Schedule:
    kind = cell["schedule.kind"]
    if kind == "synchronous":
        return engine.Schedule.synchronous()
    if kind == "round-robin":
        return engine.Schedule.round_robin()
    if kind == "random-subset":
        return engine.Schedule.random_subset(cell["schedule.p"], cell["schedule.seed"])
    return engine.Schedule.from_file(cell["schedule.file"])


def _mixing_bound_beta(graph: graphs.Graph, cell: dict) -> tuple[float, int]:
    """beta and a horizon from the proven bounds; the mixing-time guess is
    the cycle bound n/sqrt(2) for degree 2 and the exactly computed value
    otherwise."""
    d = graph.regular_degree()
    if d is None:
        raise ConfigError("cp.beta-rule=mixing-bound requires a regular graph")
    eps = cell["epsilon"]
    if d == 2:
        tau_guess = graph.n / math.sqrt(2.0)
    else:
        proc = analysis.edge_process(graph)
        tau_guess = analysis.cesaro_mixing_time(proc.p_hat, proc.p_star).tau_star
    tau_guess = max(tau_guess, 1.0)
    beta = adaptive.beta_for(tau_guess, eps, d)
    horizon = adaptive.t_star_for(beta, tau_guess, eps, d)
    return beta, horizon


def run_cell(cell: dict) -> CellResult:
    """Execute one sweep cell: build the instance, run the protocol, attach
    the analysis columns."""
    start = time.perf_counter()
    result = CellResult(
        key=cell["cell.key"],
        family=cell["graph.family"],
        protocol=cell["protocol"],
        seed=cell.get("graph.seed", cell.get("y.seed")),
        epsilon=cell.get("epsilon"),
    )
    try:
        graph = build_cell_graph(cell)
        result.n = graph.n
        result.d = graph.regular_degree()
        y = _build_y(cell, graph.n)
        protocol = cell["protocol"]
        epsilon = cell.get("epsilon")

        trace = None
        if protocol == "cp":
            if cell["cp.beta-rule"] == "mixing-bound":
                beta, horizon = _mixing_bound_beta(graph, cell)
            else:
                beta, horizon = cell["cp.beta"], 50 * graph.n
            max_t = cell.get("stop.max-t", horizon)
            config = engine.ProtocolConfig(
                beta=beta,
                weights=graphs.EdgeWeights.uniform(graph),
                y=y,
                K0=cell.get("cp.k0", 0.0),
            )
            stop = engine.StopRule(
                max_t=max_t,
                eps_mu=cell.get("stop.eps-mu"),
                eps_target=cell.get("stop.eps-target"),
            )
            trace = engine.run(
                graph,
                config,
                _build_schedule(cell),
                stop,
                record_x=cell.get("out.trace-x", False),
            )
            result.beta = beta
        elif protocol == "pairwise":
            P = baseline.metropolis_matrix(graph, cell["pairwise.laziness"])
            stop = engine.StopRule(
                max_t=cell.get("stop.max-t", 50 * graph.n),
                eps_target=cell.get("stop.eps-target"),
            )
            trace = baseline.run_pairwise(P, y, stop)
        elif protocol == "cp-adaptive":
            trace = adaptive.run_adaptive(
                graph,
                y,
                epsilon,
                tau_cap=cell["adaptive.tau-cap"],
                record_x=cell.get("out.trace-x", False),
            )
            result.beta = adaptive.beta_for(
                2.0 ** int(trace.phase[-1]), epsilon, graph.regular_degree()
            )
        if trace is not None and epsilon is not None:
            result.t_eps = trace.first_sustained_below(epsilon)
        result.trace = trace

        if cell.get("analysis.enabled", protocol == "none"):
            if result.d is not None and result.d >= 2:
                proc = analysis.edge_process(graph)
                report = analysis.cesaro_mixing_time(proc.p_hat, proc.p_star)
                result.tau_star = report.tau_star
            P = baseline.metropolis_matrix(graph, cell["pairwise.laziness"])
            result.tau2 = analysis.pairwise_mixing_time(P).tau2
    except Exception as exc:  # recorded per cell, sweep continues
        result.error = f"{type(exc).__name__}: {exc}"
    result.wall_ms = (time.perf_counter() - start) * 1000.0
    return result


def run_experiment(config: ExperimentConfig, threads: int = 1) -> SweepResult:
    """Run every cell of the sweep (order-insensitive, deterministic given
    seeds) and return results sorted by cell key."""
    cells = config.cells()
    log.info("sweep: %d cell(s)", len(cells))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(cell) for cell in cells]
    results.sort(key=lambda r: r.key)
    return SweepResult(cells=results)


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def emit(
    result: SweepResult,
    out_dir: str | Path,
    fmt: str = "csv",
    config: ExperimentConfig | None = None,
) -> list[Path]:
    """Write the summary table (CSV and/or JSON), per-cell traces, and any
    failure details; returns the paths written.

    Unavailable fields are emitted empty (CSV) or null (JSON), never NaN.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    write_trace = config.get("out.trace", True) if config is not None else True
    trace_x = config.get("out.trace-x", False) if config is not None else False
    if write_trace:
        for cell in result.cells:
            if cell.trace is None:
                continue
            stem = "cell-" + "-".join(str(k) for k in cell.key) if cell.key else "cell"
            tpath = out / f"{stem}.trace.csv"
            cell.trace.write_csv(tpath, include_x=trace_x)
            written.append(tpath)
            if cell.protocol in ("cp", "cp-adaptive"):
                jpath = out / f"{stem}.terminal.json"
                cell.trace.write_terminal_json(jpath)
                written.append(jpath)

    rows = [cell.row() for cell in result.cells]
    if fmt in ("csv", "both"):
        path = out / "summary.csv"
        lines = [",".join(SUMMARY_COLUMNS)]
        for row in rows:
            lines.append(",".join(_format_value(row[c]) for c in SUMMARY_COLUMNS))
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    if fmt in ("json", "both"):
        path = out / "summary.json"
        path.write_text(json.dumps(rows, indent=2) + "\n")
        written.append(path)

    if result.failed:
        path = out / "failures.json"
        payload = [{"key": list(c.key), "error": c.error} for c in result.failed]
        path.write_text(json.dumps(payload, indent=2) + "\n")
        written.append(path)
    return written
