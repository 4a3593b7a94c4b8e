"""Experiment configuration: a flat key-value text format with dotted keys.

Strict parsing: unknown keys, type mismatches, missing requirements, and
contradictory combinations are all rejected with messages naming the key.
Every random choice must have an explicit seed somewhere in the file.

Example::

    # cp on cycles, sweeping size and seed
    graph.family = cycle
    graph.n = 16
    protocol = cp
    cp.beta = 10
    epsilon = 0.05
    schedule.kind = synchronous
    stop.max-t = 2000
    y.source = uniform
    y.seed = 1
    sweep.n = 16,32,64
    sweep.seed = 1,2,3
    out.dir = results
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Raised for any malformed or contradictory experiment configuration."""


def _parse_bool(s: str) -> bool:
    if s in ("true", "yes", "1"):
        return True
    if s in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true/false, got {s!r}")


def _parse_list(item_parser):
    def parse(s: str):
        return tuple(item_parser(part.strip()) for part in s.split(",") if part.strip())

    return parse


def _choice(*options: str):
    def parse(s: str) -> str:
        if s not in options:
            raise ValueError(f"expected one of {options}, got {s!r}")
        return s

    return parse


# key -> value parser; this is the complete set of recognized keys
_SCHEMA = {
    "graph.family": _choice("cycle", "torus", "regular", "tree", "file"),
    "graph.n": int,
    "graph.d": int,
    "graph.m": int,
    "graph.side": int,
    "graph.shape": _choice("path", "balanced", "random"),
    "graph.arity": int,
    "graph.seed": int,
    "graph.file": str,
    "y.source": _choice("uniform", "constant", "file"),
    "y.seed": int,
    "y.value": float,
    "y.file": str,
    "protocol": _choice("cp", "cp-adaptive", "pairwise", "none"),
    "epsilon": float,
    "cp.beta": float,
    "cp.beta-rule": _choice("fixed", "mixing-bound"),
    "cp.k0": float,
    "adaptive.tau-cap": float,
    "pairwise.laziness": float,
    "schedule.kind": _choice("synchronous", "round-robin", "random-subset", "file"),
    "schedule.p": float,
    "schedule.seed": int,
    "schedule.file": str,
    "stop.max-t": int,
    "stop.eps-mu": float,
    "stop.eps-target": float,
    "analysis.enabled": _parse_bool,
    "sweep.n": _parse_list(int),
    "sweep.side": _parse_list(int),
    "sweep.beta": _parse_list(float),
    "sweep.epsilon": _parse_list(float),
    "sweep.seed": _parse_list(int),
    "out.dir": str,
    "out.trace": _parse_bool,
    "out.trace-x": _parse_bool,
}

_DEFAULTS = {
    "y.source": "uniform",
    "graph.shape": "random",
    "graph.arity": 2,
    "cp.beta-rule": "fixed",
    "cp.k0": 0.0,
    "adaptive.tau-cap": 65536.0,
    "pairwise.laziness": 0.5,
    "schedule.kind": "synchronous",
    "out.dir": "results",
    "out.trace": True,
    "out.trace-x": False,
}

# sweep axis -> base key it overrides, in deterministic cross-product order
_SWEEP_AXES = [
    ("sweep.n", "graph.n"),
    ("sweep.side", "graph.side"),
    ("sweep.beta", "cp.beta"),
    ("sweep.epsilon", "epsilon"),
    ("sweep.seed", None),  # seeds fan out to graph/y/schedule below
]


@dataclass
class ExperimentConfig:
    """Validated configuration; `values` holds typed entries keyed as in the
    file, with defaults filled in."""

    values: dict = field(default_factory=dict)
    source_path: str | None = None

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def cell_count(self) -> int:
        count = 1
        for axis, _ in _SWEEP_AXES:
            if axis in self.values:
                count *= len(self.values[axis])
        return count

    def cells(self) -> list[dict]:
        """Resolved per-cell settings: the base values with one sweep
        combination applied. The sweep seed, when present, becomes the
        graph, observation, and schedule seed of the cell."""
        axes = [(axis, base) for axis, base in _SWEEP_AXES if axis in self.values]
        pools = [self.values[axis] for axis, _ in axes]
        out = []
        for combo in itertools.product(*pools) if axes else [()]:
            cell = {k: v for k, v in self.values.items() if not k.startswith("sweep.")}
            for (axis, base), value in zip(axes, combo):
                if base is not None:
                    cell[base] = value
                else:
                    cell["graph.seed"] = value
                    cell["y.seed"] = value
                    cell["schedule.seed"] = value
            cell["cell.key"] = tuple(combo)
            out.append(cell)
        return out


def parse_config(text: str, source_path: str | None = None) -> ExperimentConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _SCHEMA[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    for key, default in _DEFAULTS.items():
        values.setdefault(key, default)
    config = ExperimentConfig(values=values, source_path=source_path)
    _validate(config)
    return config


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), source_path=str(path))


def _require(cfg: ExperimentConfig, key: str, context: str) -> None:
    if key not in cfg.values:
        raise ConfigError(f"{context} requires {key!r}")


def _validate(cfg: ExperimentConfig) -> None:
    v = cfg.values
    _require(cfg, "graph.family", "every experiment")
    _require(cfg, "protocol", "every experiment")
    family = v["graph.family"]
    protocol = v["protocol"]

    def has(key: str) -> bool:
        return key in v

    if family in ("cycle", "regular", "tree") and not (has("graph.n") or has("sweep.n")):
        raise ConfigError(f"graph.family={family} requires graph.n or sweep.n")
    if family == "torus":
        _require(cfg, "graph.m", "graph.family=torus")
        if not (has("graph.side") or has("sweep.side")):
            raise ConfigError("graph.family=torus requires graph.side or sweep.side")
    if family == "regular":
        _require(cfg, "graph.d", "graph.family=regular")
        if not (has("graph.seed") or has("sweep.seed")):
            raise ConfigError("graph.family=regular requires graph.seed or sweep.seed")
    if family == "tree" and v.get("graph.shape") == "random":
        if not (has("graph.seed") or has("sweep.seed")):
            raise ConfigError("random trees require graph.seed or sweep.seed")
    if family == "file":
        _require(cfg, "graph.file", "graph.family=file")
    if has("sweep.side") and family != "torus":
        raise ConfigError("sweep.side only applies to graph.family=torus")

    if v["y.source"] == "uniform" and not (has("y.seed") or has("sweep.seed")):
        raise ConfigError("y.source=uniform requires y.seed or sweep.seed")
    if v["y.source"] == "constant":
        _require(cfg, "y.value", "y.source=constant")
    if v["y.source"] == "file":
        _require(cfg, "y.file", "y.source=file")

    if protocol == "cp-adaptive":
        if has("cp.beta") or has("sweep.beta"):
            raise ConfigError("beta is chosen by the doubling search; remove cp.beta")
        _require(cfg, "epsilon", "protocol=cp-adaptive")
    if protocol == "cp":
        if v["cp.beta-rule"] == "fixed" and not (has("cp.beta") or has("sweep.beta")):
            raise ConfigError("protocol=cp requires cp.beta (or cp.beta-rule=mixing-bound)")
        if v["cp.beta-rule"] == "mixing-bound":
            if has("cp.beta") or has("sweep.beta"):
                raise ConfigError("cp.beta-rule=mixing-bound computes beta; remove cp.beta")
            if not (has("epsilon") or has("sweep.epsilon")):
                raise ConfigError("cp.beta-rule=mixing-bound requires epsilon")
    if protocol in ("pairwise", "none") and (has("cp.beta") or has("sweep.beta")):
        raise ConfigError(f"cp.beta is meaningless with protocol={protocol}")

    if v["schedule.kind"] == "random-subset":
        _require(cfg, "schedule.p", "schedule.kind=random-subset")
        if not (0.0 < v["schedule.p"] <= 1.0):
            raise ConfigError("schedule.p must be in (0, 1]")
        if not (has("schedule.seed") or has("sweep.seed")):
            raise ConfigError("schedule.kind=random-subset requires schedule.seed or sweep.seed")
    if v["schedule.kind"] == "file":
        _require(cfg, "schedule.file", "schedule.kind=file")

    for axis, _ in _SWEEP_AXES:
        if axis in v and len(v[axis]) == 0:
            raise ConfigError(f"{axis} must list at least one value")
    if "epsilon" in v and not (0.0 < v["epsilon"] < 1.0):
        raise ConfigError("epsilon must be in (0, 1)")
