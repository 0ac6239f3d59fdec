"""Experiment sweeps over one axis with seed replications.

Each cell = (loss kind, axis value, seed) trains and evaluates one model.
Cells are independent; --jobs N runs them in a process pool, default is
sequential. Failed cells are recorded, not fatal, as long as any cell
succeeds.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .cohort import SyntheticSpec, generate_cohort, synthetic_spec_from_dict, synthetic_spec_to_dict
from .errors import InvalidArgumentError
from .evaluation import (
    EvalConfig,
    eval_config_from_dict,
    eval_config_to_dict,
    run_experiment,
)
from .kernels import KernelSpec
from .losses import LOSS_KINDS, LossConfig, loss_config_from_dict, loss_config_to_dict
from .training import TrainConfig, train_config_from_dict, train_config_to_dict

SWEEP_AXES = ("train_size", "loss_kind", "sigma", "site_strength")

TREND_COLUMNS = ("method", "axis_value", "seed", "mae_ext", "site_bacc", "auc", "challenge_score")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    seeds: tuple
    loss_kinds: tuple

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise InvalidArgumentError(f"unknown sweep axis: {self.axis!r}")
        if not self.values:
            raise InvalidArgumentError("sweep needs at least one axis value")
        if not self.seeds:
            raise InvalidArgumentError("sweep needs at least one seed")
        if self.axis == "loss_kind":
            bad = [v for v in self.values if v not in LOSS_KINDS]
            if bad:
                raise InvalidArgumentError(f"unknown loss kinds on the axis: {bad}")
        elif not self.loss_kinds:
            raise InvalidArgumentError("sweep needs at least one loss kind")


def sweep_spec_to_dict(spec: SweepSpec) -> dict:
    return {
        "axis": spec.axis,
        "values": list(spec.values),
        "seeds": list(spec.seeds),
        "loss_kinds": list(spec.loss_kinds),
    }


def sweep_spec_from_dict(d: dict) -> SweepSpec:
    return SweepSpec(
        axis=d["axis"],
        values=tuple(d["values"]),
        seeds=tuple(d["seeds"]),
        loss_kinds=tuple(d.get("loss_kinds", ())),
    )


def sweep_cells(spec: SweepSpec) -> list:
    """Cross product in a fixed order: kind, then axis value, then seed."""
    cells = []
    if spec.axis == "loss_kind":
        for kind in spec.values:
            for seed in spec.seeds:
                cells.append({"method": kind, "axis_value": kind, "seed": int(seed)})
    else:
        for kind in spec.loss_kinds:
            for value in spec.values:
                for seed in spec.seeds:
                    cells.append({"method": kind, "axis_value": value, "seed": int(seed)})
    return cells


def _apply_axis(cell, cohort_spec: SyntheticSpec, loss: LossConfig, train: TrainConfig, ev: EvalConfig):
    axis, value = cell["axis"], cell["axis_value"]
    loss = replace(loss, kind=cell["method"])
    if loss.kind in ("yaware", "threshold", "exp") and loss.kernel is None:
        loss = replace(loss, kernel=KernelSpec())
    if axis == "train_size":
        ev = replace(ev, train_size=int(value))
    elif axis == "sigma":
        loss = replace(loss, kernel=KernelSpec(family=loss.kernel.family, sigma=float(value)))
    elif axis == "site_strength":
        cohort_spec = replace(cohort_spec, site_effect_strength=float(value))
    train = replace(train, seed=int(cell["seed"]))
    return cohort_spec, loss, train, ev


_COHORT_CACHE: dict = {}


def _cached_cohort(spec: SyntheticSpec):
    key = repr(sorted(synthetic_spec_to_dict(spec).items()))
    if key not in _COHORT_CACHE:
        _COHORT_CACHE.clear()  # keep at most one cohort in a worker
        _COHORT_CACHE[key] = generate_cohort(spec)
    return _COHORT_CACHE[key]


def run_cell(payload: dict) -> dict:
    """Execute one sweep cell; exceptions become a failed-status row."""
    cell = dict(payload["cell"])
    row = {
        "method": cell["method"],
        "axis_value": cell["axis_value"],
        "seed": cell["seed"],
        "mae_ext": None,
        "site_bacc": None,
        "auc": None,
        "challenge_score": None,
        "status": "ok",
        "error": None,
    }
    try:
        cohort_spec, loss, train, ev = _apply_axis(
            cell,
            synthetic_spec_from_dict(payload["cohort_spec"]),
            loss_config_from_dict(payload["loss"]),
            train_config_from_dict(payload["train"]),
            eval_config_from_dict(payload["eval"]),
        )
        cohort = _cached_cohort(cohort_spec)
        result = run_experiment(cohort, loss, train, ev)
        rep = result.report
        row.update(
            mae_ext=rep.mae_external,
            site_bacc=rep.site_bacc,
            auc=rep.auc_hc_vs_ad,
            challenge_score=rep.challenge_score,
        )
    except Exception as exc:  # recorded, not fatal for the sweep
        row["status"] = "failed"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(
    spec: SweepSpec,
    cohort_spec: SyntheticSpec,
    loss_cfg: LossConfig,
    train_cfg: TrainConfig,
    eval_cfg: EvalConfig,
    jobs: int = 1,
) -> list:
    """Run all cells, sequentially or in a process pool, in a fixed order."""
    payloads = []
    for cell in sweep_cells(spec):
        cell = dict(cell, axis=spec.axis)
        payloads.append(
            {
                "cell": cell,
                "cohort_spec": synthetic_spec_to_dict(cohort_spec),
                "loss": loss_config_to_dict(loss_cfg),
                "train": train_config_to_dict(train_cfg),
                "eval": eval_config_to_dict(eval_cfg),
            }
        )
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_cell, payloads))
    return [run_cell(p) for p in payloads]


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trend_csv(rows, path) -> None:
    """One row per successful (method, axis value, seed); metrics may be blank."""
    lines = [",".join(TREND_COLUMNS)]
    for row in rows:
        if row["status"] != "ok":
            continue
        lines.append(",".join(_format_cell(row[c]) for c in TREND_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def summarize(rows, spec: SweepSpec) -> dict:
    """Aggregate mean and std per (method, axis value) over succeeding seeds."""
    agg: dict = {}
    for row in rows:
        if row["status"] != "ok":
            continue
        bucket = agg.setdefault(row["method"], {}).setdefault(str(row["axis_value"]), {})
        for metric in ("mae_ext", "site_bacc", "auc", "challenge_score"):
            if row[metric] is not None:
                bucket.setdefault(metric, []).append(row[metric])
    aggregates = {
        method: {
            value: {
                metric: {
                    "mean": float(np.mean(vals)),
                    "std": float(np.std(vals)),
                    "n": len(vals),
                }
                for metric, vals in bucket.items()
            }
            for value, bucket in per_value.items()
        }
        for method, per_value in agg.items()
    }
    return {
        "sweep": sweep_spec_to_dict(spec),
        "cells": [
            {k: row[k] for k in ("method", "axis_value", "seed", "status", "error")}
            for row in rows
        ],
        "aggregates": aggregates,
        "n_ok": sum(1 for r in rows if r["status"] == "ok"),
        "n_failed": sum(1 for r in rows if r["status"] != "ok"),
    }


def attach_metadata(summary: dict) -> dict:
    """Timestamps are quarantined here so the rest stays byte-deterministic."""
    out = dict(summary)
    out["metadata"] = {"created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    return out
