"""Seeded Monte-Carlo replication of order-selection experiments."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from chainorder.counts import SymbolSequence, build_counts
from chainorder.errors import InfeasibleError, InputError
from chainorder.gdl import decode_order, gdl_profile
from chainorder.generator import (
    DEFAULT_BURN_IN,
    TransitionTensor,
    sample_chain,
    tensor_from_config,
)
from chainorder.likelihood import CONVENTIONS, criteria, estimate_order

log = logging.getLogger(__name__)

ESTIMATORS = ("aic", "bic", "edc", "gdl")
MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 output for state ``x`` (Steele, Lea & Flood 2014)."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def replication_seed(seed: int, rep: int) -> int:
    """Seed of replication ``rep``; depends only on ``(seed, rep)``."""
    return splitmix64((seed & MASK64) ^ splitmix64(rep))


def parse_estimators(value) -> tuple[str, ...]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    out = []
    for name in value:
        key = str(name).strip().lower()
        if key not in ESTIMATORS:
            raise InputError(f"unknown estimator {name!r}; choose from {','.join(ESTIMATORS)}")
        if key not in out:
            out.append(key)
    # canonical column order regardless of how they were listed
    return tuple(e for e in ESTIMATORS if e in out)


def estimate_all(
    seq: SymbolSequence,
    B: int,
    estimators=ESTIMATORS,
    min_count: int = 0,
    penalty: str = "free-parameters",
) -> dict[str, tuple[int, bool]]:
    """Run the requested estimators on one sample: ``{name: (order, saturated)}``."""
    need = B + 2 if "gdl" in estimators else B + 1
    if seq.n < need:
        raise InfeasibleError(f"B={B} needs words of length {need} but n={seq.n}")
    table = build_counts(seq, need)
    out = {}
    penalized = [e for e in estimators if e != "gdl"]
    if penalized:
        curve = criteria(table, B, convention=penalty)
        for e in penalized:
            out[e] = (estimate_order(curve, e), False)
    if "gdl" in estimators:
        out["gdl"] = decode_order(gdl_profile(table, B, min_count=min_count))
    return out


@dataclass(frozen=True)
class ExperimentSpec:
    tensor: TransitionTensor
    n: int
    replications: int = 200
    B: int = 5
    estimators: tuple[str, ...] = ESTIMATORS
    seed: int = 0
    burn_in: int = DEFAULT_BURN_IN
    min_count: int = 0
    penalty: str = "free-parameters"
    name: str = ""
    generator: Mapping[str, Any] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.replications < 1:
            raise InputError(f"replications must be >= 1, got {self.replications}")
        if self.B < 0:
            raise InputError(f"B must be >= 0, got {self.B}")
        if self.n < 3:
            raise InfeasibleError(f"n must be >= 3, got {self.n}")
        if self.penalty not in CONVENTIONS:
            raise InputError(f"unknown penalty convention {self.penalty!r}; expected one of {CONVENTIONS}")
        object.__setattr__(self, "estimators", parse_estimators(self.estimators))

    def echo(self) -> dict[str, Any]:
        gen = self.generator
        if gen is None:
            gen = {"m": self.tensor.m, "kappa": self.tensor.kappa, "rows": self.tensor.q.tolist()}
        return {
            "name": self.name,
            "generator": _plain(gen),
            "n": self.n,
            "replications": self.replications,
            "B": self.B,
            "estimators": list(self.estimators),
            "seed": self.seed,
            "burn_in": self.burn_in,
            "min_count": self.min_count,
            "penalty": self.penalty,
        }


def _plain(obj):
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass
class SelectionTable:
    """How often each estimator picked each order ``k = 0..B``."""

    B: int
    replications: int
    counts: dict[str, list[int]]
    saturated: int = 0
    spec: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def estimators(self) -> tuple[str, ...]:
        return tuple(self.counts)

    def percent(self, estimator: str, k: int) -> float:
        return 100.0 * self.counts[estimator][k] / self.replications

    def percentages(self, estimator: str) -> list[float]:
        return [self.percent(estimator, k) for k in range(self.B + 1)]

    def to_json(self) -> str:
        # wall_time is deliberately left out: the JSON must be reproducible
        payload = {
            "B": self.B,
            "replications": self.replications,
            "counts": self.counts,
            "percent": {e: self.percentages(e) for e in self.counts},
            "gdl_saturated": self.saturated,
            "spec": self.spec,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SelectionTable":
        data = json.loads(text)
        return cls(
            B=data["B"],
            replications=data["replications"],
            counts={e: list(v) for e, v in data["counts"].items()},
            saturated=data.get("gdl_saturated", 0),
            spec=data.get("spec", {}),
        )


def _run_one(args) -> dict[str, tuple[int, bool]]:
    spec, rep = args
    seq = sample_chain(spec.tensor, spec.n, replication_seed(spec.seed, rep), spec.burn_in)
    try:
        return estimate_all(seq, spec.B, spec.estimators, spec.min_count, spec.penalty)
    except (InfeasibleError, ValueError) as exc:
        raise RuntimeError(f"replication {rep} failed: {exc}") from exc


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> SelectionTable:
    """Simulate ``spec.replications`` chains and tally each estimator's choice.

    Replication ``r`` uses seed ``replication_seed(spec.seed, r)``; tallies
    are reduced in replication order, so the table does not depend on
    ``workers``.
    """
    m = spec.tensor.m
    if spec.n < m ** (spec.B + 1):
        log.warning(
            "n=%d is well below m**(B+1)=%d; high-order contexts will be sparse",
            spec.n,
            m ** (spec.B + 1),
        )
    start = time.perf_counter()
    jobs = [(spec, r) for r in range(spec.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_run_one(job) for job in jobs]

    counts = {e: [0] * (spec.B + 1) for e in spec.estimators}
    saturated = 0
    for res in results:
        for e, (k, sat) in res.items():
            counts[e][k] += 1
            if e == "gdl" and sat:
                saturated += 1
    return SelectionTable(
        B=spec.B,
        replications=spec.replications,
        counts=counts,
        saturated=saturated,
        spec=spec.echo(),
        wall_time=time.perf_counter() - start,
    )


def _fmt_percent(p: float) -> str:
    return f"{round(p, 2):g}%"


def render_table(table: SelectionTable, fmt: str = "markdown") -> str:
    """Render as ``markdown`` (one row per order, one column per estimator), long-form ``csv`` or ``json``."""
    fmt = fmt.lower()
    if fmt == "json":
        return table.to_json()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["estimator", "k", "percent"])
        for e in table.estimators:
            for k in range(table.B + 1):
                w.writerow([e, k, repr(table.percent(e, k))])
        return buf.getvalue()
    if fmt != "markdown":
        raise ValueError(f"unknown format {fmt!r}")
    names = [e.upper() for e in table.estimators]
    lines = ["| k | " + " | ".join(names) + " |" if names else "| k |"]
    lines.append("|---|" + "---|" * len(names))
    if not names:
        return "\n".join(lines) + "\n"
    for k in range(table.B + 1):
        cells = []
        for e in table.estimators:
            c = table.counts[e][k]
            cells.append(_fmt_percent(table.percent(e, k)) if c else "")
        lines.append(f"| {k} | " + " | ".join(cells) + " |")
    if "gdl" in table.estimators and table.saturated:
        lines.append("")
        lines.append(f"GDL saturated (profile never returned to 1) in {table.saturated} replications.")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# config files


def load_config(path: str | Path) -> dict[str, Any]:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"config {path} must be a mapping")
    return data


def spec_from_config(cfg: Mapping[str, Any]) -> ExperimentSpec:
    if "generator" not in cfg:
        raise InputError("config needs a 'generator' section")
    known = {"name", "generator", "n", "replications", "B", "estimators", "seed",
             "burn_in", "min_count", "penalty", "output"}
    unknown = set(cfg) - known
    if unknown:
        raise InputError(f"unknown config fields: {sorted(unknown)}")
    if "n" not in cfg:
        raise InputError("config needs a sample size 'n'")
    return ExperimentSpec(
        tensor=tensor_from_config(cfg["generator"]),
        n=int(cfg["n"]),
        replications=int(cfg.get("replications", 200)),
        B=int(cfg.get("B", 5)),
        estimators=parse_estimators(cfg.get("estimators", list(ESTIMATORS))),
        seed=int(cfg.get("seed", 0)),
        burn_in=int(cfg.get("burn_in", DEFAULT_BURN_IN)),
        min_count=int(cfg.get("min_count", 0)),
        penalty=str(cfg.get("penalty", "free-parameters")),
        name=str(cfg.get("name", "")),
        generator=cfg["generator"],
    )
