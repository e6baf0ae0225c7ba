"""Seeded experiment runner.

A config names an experiment kind, a parameter grid and a master seed. Grid
points are the cartesian product of the grid lists in sorted key order; trial
j of grid point g draws from SeedSequence(seed, spawn_key=(g, j)), so rows do
not depend on the worker count or on scheduling.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import boolfn
from .lpdegree import approx_degree, robust_degree_multilinear
from .noisysim import NoisyOracleSet, OracleView, copies_oracle
from .poly import from_text
from .qsearch.contract import RobustFindParams, robust_find_contract
from .qsearch.statevector import closed_form_success, grover_robust, query_distance
from .qsearch.validate import statevector_finder_law
from .recover import (
    InnerSubroutine,
    Knobs,
    all_inputs,
    classical_parity_baseline,
    compute_function_robust,
    direct_sum,
    score_recovery,
    symmetric_robust,
)
from .robustness import VERTEX_MAX_ARITY, check_type2_grid, check_type2_vertex
from .stats import fit_exponent, wilson_ci

KINDS = ("recover", "robust-find", "degree", "check-poly", "baseline", "statevector-validate",
         "direct-sum", "symmetric")
ROWS_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    grid: dict = field(default_factory=dict)
    trials: int = 1
    seed: int = 0
    knobs: dict = field(default_factory=dict)
    fit_axis: str | None = None
    thresholds: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 0:
            raise ConfigError("trials must be non-negative")
        for key, values in self.grid.items():
            if not isinstance(values, list):
                raise ConfigError(f"grid entry {key!r} must be a list")
        for key in ("n", "t"):
            for v in self.grid.get(key, []):
                if not isinstance(v, int) or v < 1:
                    raise ConfigError(f"grid {key} values must be positive integers, got {v!r}")
        for v in self.grid.get("eps", []):
            if not 0 <= float(v) < 0.5:
                raise ConfigError(f"eps values must lie in [0, 1/2), got {v!r}")
        unknown = set(self.knobs) - set(Knobs.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown knobs: {sorted(unknown)}")

    def points(self) -> list[dict]:
        keys = sorted(self.grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        allowed = set(cls.__dataclass_fields__)
        extra = set(data) - allowed
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def trial_rng(seed: int, point: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point, trial)))


def _input(rng, n: int, p: dict) -> np.ndarray:
    weight = p.get("weight")
    if weight is not None:
        x = np.zeros(n, dtype=np.uint8)
        x[rng.choice(n, size=int(weight), replace=False)] = 1
        return x
    return (rng.random(n) < float(p.get("density", 0.5))).astype(np.uint8)


def _oracles(rng, x, p: dict) -> NoisyOracleSet:
    eps = float(p.get("eps", 0.01))
    if p.get("model", "bernoulli") == "copies":
        return copies_oracle(x, eps, rng)
    return NoisyOracleSet(x, eps)


def _trial_recover(p, knobs, rng):
    n = p["n"]
    t = p.get("t", n)
    x = _input(rng, n, p)
    oracles = _oracles(rng, x, p)
    res = all_inputs(oracles, t, rng, eps=oracles.eps, knobs=knobs)
    row = score_recovery(res, x, t)
    row["cost"] = res.total_cost
    for phase in ("part1", "part2", "part3", "fallback"):
        row[f"cost_{phase}"] = res.phase_costs.get(phase, 0)
    return row


def _trial_robust_find(p, knobs, rng):
    n, eps = p["n"], float(p.get("eps", 0.01))
    x = _input(rng, n, p)
    params = RobustFindParams(eps, float(p.get("beta", 1 / n)), float(p.get("gamma", 0.01)), float(p.get("delta", 0.01)))
    if p.get("backend", "contract") == "statevector":
        per_index, none_prob = statevector_finder_law(x, eps, int(p.get("r", 9)), int(p.get("verify_reads", 9)),
                                                      max(1, math.ceil(math.log2(1 / params.delta))))
        probs = np.append(per_index, none_prob)
        k = int(rng.choice(n + 1, p=probs / probs.sum()))
        index = None if k == n else k
        cost = None
    else:
        out = robust_find_contract(OracleView(NoisyOracleSet(x, eps)), params, rng, knobs.mode, knobs.cost_constant)
        index, cost = out.index, out.cost_charged
    return {"weight": int(x.sum()), "found": index is not None,
            "correct": index is not None and bool(x[index]), "index": -1 if index is None else index, "cost": cost}


def _trial_degree(p, knobs, rng):
    f = boolfn.make_named(p.get("function", "parity"), p["n"])
    if "epsilon" in p:
        res = robust_degree_multilinear(f, Fraction(p["epsilon"]))
    else:
        res = approx_degree(f)
    return {"degree": res.degree, "status": res.status, "infeasible": " ".join(map(str, sorted(res.infeasible_at))),
            "upper_bound_only": res.upper_bound_only}


def _trial_check_poly(p, knobs, rng):
    poly = from_text(Path(p["poly"]).read_text(), p["n"])
    f = boolfn.make_named(p.get("function", "parity"), p["n"])
    eps = Fraction(p.get("epsilon", "1/3"))
    if p["n"] <= VERTEX_MAX_ARITY:
        rep = check_type2_vertex(poly, f, eps)
    else:
        rep = check_type2_grid(poly, f, float(eps))
    return {"passed": rep.passed, "evidence": rep.evidence, "worst_violation": str(rep.worst_violation),
            "witness": "" if rep.witness is None else repr(rep.witness)}


def _trial_baseline(p, knobs, rng):
    n = p["n"]
    x = _input(rng, n, p)
    oracles = NoisyOracleSet(x, float(p.get("eps", 0.1)))
    r = p.get("r")
    bit, cost = classical_parity_baseline(oracles, rng, float(p.get("target", 2 / 3)), r=r)
    return {"success": bit == int(x.sum() % 2), "cost": cost, "cost_per_n": cost / n}


def _trial_statevector(p, knobs, rng):
    n, eps, r = p["n"], float(p.get("eps", 0.0)), int(p.get("r", 1))
    x = _input(rng, n, {"weight": p.get("weight", 1)})
    res = grover_robust(x, eps, r, rng, shots=int(p.get("shots", 1000)))
    return {"success_probability": res.success_probability, "empirical_success": res.empirical_success,
            "closed_form_noiseless": closed_form_success(n, int(x.sum())), "distance": query_distance(x, eps, r),
            "noisy_queries": res.noisy_queries}


def _trial_direct_sum(p, knobs, rng):
    n, arity = p["n"], int(p.get("inner_arity", 4))
    inner = InnerSubroutine(lambda inst: int(any(inst)), int(p.get("inner_cost", 2)), float(p.get("inner_error", 1 / 3)))
    instances = (rng.random((n, arity)) < float(p.get("density", 0.2))).astype(np.uint8)
    res = direct_sum(inner, instances, rng, knobs=knobs)
    return {"success": res.all_correct, "cost": res.cost, "cost_per_nT": res.cost / (n * inner.cost),
            "repetitions": res.repetitions}


def _trial_symmetric(p, knobs, rng):
    n = p["n"]
    f = boolfn.make_named(p.get("function", "or"), n)
    x = _input(rng, n, p)
    out = symmetric_robust(f, _oracles(rng, x, p), rng, float(p.get("confidence", 1 / 3)), knobs)
    return {"success": out.value == f(x), "cost": out.cost, "branch": out.branch}


def _trial_compute(p, knobs, rng):
    n = p["n"]
    f = boolfn.make_named(p.get("function", "parity"), n)
    x = _input(rng, n, p)
    value, res = compute_function_robust(f, _oracles(rng, x, p), rng, knobs)
    return {"success": value == f(x), "cost": res.total_cost}


TRIALS = {
    "recover": _trial_recover,
    "robust-find": _trial_robust_find,
    "degree": _trial_degree,
    "check-poly": _trial_check_poly,
    "baseline": _trial_baseline,
    "statevector-validate": _trial_statevector,
    "direct-sum": _trial_direct_sum,
    "symmetric": _trial_symmetric,
}


def _run_task(args):
    kind, point_idx, point, trial, seed, knob_dict = args
    knobs = replace(Knobs(), **knob_dict)
    rng = trial_rng(seed, point_idx, trial)
    if kind == "recover" and point.get("function"):
        row = _trial_compute(point, knobs, rng)
    else:
        row = TRIALS[kind](point, knobs, rng)
    return {"point": point_idx, **point, "trial": trial, "seed": seed, **row}


def run(config: ExperimentConfig, workers: int = 1) -> tuple[list[dict], dict]:
    config.validate()
    tasks = [(config.kind, g, point, j, config.seed, config.knobs)
             for g, point in enumerate(config.points()) for j in range(config.trials)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_run_task(t) for t in tasks]
    return rows, summarize(rows, config.fit_axis)


def summarize(rows: list[dict], fit_axis: str | None = None) -> dict:
    """Per-point success rates with Wilson intervals, mean costs and an optional exponent fit.

    Depends only on the multiset of rows, so partial runs merge by concatenation.
    """
    groups: dict[int, list[dict]] = {}
    for row in rows:
        groups.setdefault(row["point"], []).append(row)
    points = []
    for g in sorted(groups):
        rs = groups[g]
        entry = {"point": g, "trials": len(rs)}
        for key in ("n", "t", "eps", "function", "backend"):
            if key in rs[0]:
                entry[key] = rs[0][key]
        if "success" in rs[0]:
            wins = sum(bool(r["success"]) for r in rs)
            entry["success_rate"] = wins / len(rs)
            entry["success_ci"] = list(wilson_ci(wins, len(rs)))
        if "exact" in rs[0]:
            wins = sum(bool(r["exact"]) for r in rs)
            entry["exact_rate"] = wins / len(rs)
            entry["exact_ci"] = list(wilson_ci(wins, len(rs)))
        costs = [r["cost"] for r in rs if r.get("cost") is not None]
        if costs:
            entry["mean_cost"] = float(np.mean(costs))
        points.append(entry)
    summary = {"version": ROWS_VERSION, "rows": len(rows), "points": points}
    if fit_axis:
        pairs = [(p[fit_axis], p["mean_cost"]) for p in points if fit_axis in p and "mean_cost" in p]
        try:
            summary["fit"] = {"axis": fit_axis, **fit_exponent(pairs).as_dict()}
        except ValueError as exc:
            summary["fit"] = {"axis": fit_axis, "error": str(exc)}
    return summary


def check_thresholds(summary: dict, thresholds: dict) -> list[str]:
    """Human-readable failures; empty when every threshold holds."""
    failures = []
    lo_rate = thresholds.get("min_success")
    for p in summary["points"]:
        rate = p.get("exact_rate", p.get("success_rate"))
        if lo_rate is not None and rate is not None and rate < lo_rate:
            failures.append(f"point {p['point']}: rate {rate:.4f} < {lo_rate}")
    bounds = thresholds.get("exponent")
    if bounds is not None:
        fit = summary.get("fit", {})
        slope = fit.get("slope")
        if slope is None or not bounds[0] <= slope <= bounds[1]:
            failures.append(f"exponent {slope} outside {bounds}")
    return failures


def rows_to_csv(rows: list[dict]) -> str:
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(v) for k, v in row.items()})
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.bool_, bool)):
        return int(v)
    return v


def write_outputs(rows: list[dict], summary: dict, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows_path, summary_path = out / "rows.csv", out / "summary.json"
    rows_path.write_text(rows_to_csv(rows))
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n")
    return rows_path, summary_path


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, Fraction):
        return str(v)
    raise TypeError(f"cannot serialise {type(v).__name__}")
