"""End-to-end experiment pipeline: split, train, embed, score, report.

Split policy: the last ceil(20%) of sites (by name) are external and never
seen in training. Internal subjects get patient-level age-stratified
folds; one fold is held out for internal testing. The encoder trains on
the remaining internal rows filtered to the configured groups (healthy
only by default) and optionally subsampled to a fixed subject count. The
ridge age readout is fitted on healthy training rows only. Age metrics
(MAE, R^2) are reported on healthy rows; brain-age-gap analyses cover
every row whose subject was not used for training.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cohort import Cohort, external_sites, fold_of_rows, stratified_subject_folds
from .encoder import EncoderParams, encoder_forward
from .errors import InvalidArgumentError, UndefinedMetricError
from .losses import LossConfig, loss_config_to_dict
from .metrics import (
    bag_records,
    challenge_score,
    fit_ridge_readout,
    finetune_classifier,
    group_bag_stats,
    longitudinal_bag_slopes,
    mae,
    predict_age,
    r_squared,
    roc_auc,
    site_probe_bacc,
)
from .training import TrainConfig, TrainHistory, fit_encoder, train_config_to_dict


@dataclass(frozen=True)
class EvalConfig:
    n_folds: int = 5
    test_fold: int = 0
    fold_seed: int = 0
    ridge_lambda: float = 1.0
    probe_folds: int = 3
    probe_seed: int = 0
    external_site_fraction: float = 0.2
    train_groups: tuple = ("HC",)
    train_size: int | None = None
    min_visits: int = 3
    finetune: bool = False

    def __post_init__(self):
        if self.n_folds < 2:
            raise InvalidArgumentError("n_folds must be >= 2")
        if not (0 <= self.test_fold < self.n_folds):
            raise InvalidArgumentError(
                f"test_fold must lie in [0, {self.n_folds}), got {self.test_fold}"
            )
        if self.ridge_lambda < 0:
            raise InvalidArgumentError("ridge_lambda must be >= 0")
        if not (0 <= self.external_site_fraction < 1):
            raise InvalidArgumentError("external_site_fraction must be in [0, 1)")
        if self.train_size is not None and self.train_size < 1:
            raise InvalidArgumentError("train_size must be >= 1 when given")


def eval_config_to_dict(cfg: EvalConfig) -> dict:
    d = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    d["train_groups"] = list(cfg.train_groups)
    return d


def eval_config_from_dict(d: dict) -> EvalConfig:
    d = dict(d)
    if "train_groups" in d:
        d["train_groups"] = tuple(d["train_groups"])
    return EvalConfig(**d)


@dataclass
class SplitIndices:
    train_rows: np.ndarray
    internal_test_rows: np.ndarray
    external_rows: np.ndarray
    bag_rows: np.ndarray  # all rows of subjects unused in training


def compute_split(cohort: Cohort, cfg: EvalConfig, subsample_seed: int) -> SplitIndices:
    """Deterministic split; identical inputs always give identical indices."""
    ext = set(external_sites(cohort, cfg.external_site_fraction))
    ext_mask = np.array([str(s) in ext for s in cohort.site])
    internal = cohort.select(~ext_mask)
    if internal.n_rows == 0:
        raise InvalidArgumentError("no internal rows left after reserving external sites")
    assignment = stratified_subject_folds(internal, cfg.n_folds, seed=cfg.fold_seed)
    internal_idx = np.flatnonzero(~ext_mask)
    row_folds = fold_of_rows(internal, assignment)
    test_rows = internal_idx[row_folds == cfg.test_fold]
    pool_mask = row_folds != cfg.test_fold
    if cfg.train_groups:
        keep = set(cfg.train_groups)
        pool_mask &= np.array([str(g) in keep for g in internal.group])
    pool_rows = internal_idx[pool_mask]
    if pool_rows.size == 0:
        raise InvalidArgumentError("training pool is empty for the configured groups")
    if cfg.train_size is not None:
        pool_subjects = np.unique(cohort.subject_id[pool_rows].astype(str))
        pool_subjects.sort()
        perm = np.random.default_rng(subsample_seed).permutation(pool_subjects.size)
        chosen = set(pool_subjects[perm[: cfg.train_size]])
        pool_rows = pool_rows[
            np.array([str(s) in chosen for s in cohort.subject_id[pool_rows]])
        ]
    train_subjects = set(str(s) for s in cohort.subject_id[pool_rows])
    bag_mask = np.array([str(s) not in train_subjects for s in cohort.subject_id])
    return SplitIndices(
        train_rows=pool_rows,
        internal_test_rows=test_rows,
        external_rows=np.flatnonzero(ext_mask),
        bag_rows=np.flatnonzero(bag_mask),
    )


@dataclass
class EvalReport:
    loss_kind: str
    mae_internal: float | None
    mae_external: float | None
    r2: float | None
    site_bacc: float | None
    challenge_score: float | None
    challenge_degenerate: bool
    bag_groups: dict
    omitted_bag_groups: list
    auc_hc_vs_ad: float | None
    longitudinal_slopes: dict
    omitted_slope_groups: list
    downstream_accuracy: float | None
    n_train_rows: int
    n_internal_test_rows: int
    n_external_rows: int
    config: dict

    def to_dict(self) -> dict:
        return {
            "loss_kind": self.loss_kind,
            "mae_internal": self.mae_internal,
            "mae_external": self.mae_external,
            "r2": self.r2,
            "site_bacc": self.site_bacc,
            "challenge_score": self.challenge_score,
            "challenge_degenerate": self.challenge_degenerate,
            "bag_groups": self.bag_groups,
            "omitted_bag_groups": self.omitted_bag_groups,
            "auc_hc_vs_ad": self.auc_hc_vs_ad,
            "longitudinal_slopes": self.longitudinal_slopes,
            "omitted_slope_groups": self.omitted_slope_groups,
            "downstream_accuracy": self.downstream_accuracy,
            "n_train_rows": self.n_train_rows,
            "n_internal_test_rows": self.n_internal_test_rows,
            "n_external_rows": self.n_external_rows,
            "config": self.config,
        }


def embed_cohort(params: EncoderParams, cohort: Cohort, rows=None) -> np.ndarray:
    feats = cohort.features if rows is None else cohort.features[rows]
    return encoder_forward(params, feats)


def evaluate_params(
    params: EncoderParams,
    cohort: Cohort,
    eval_cfg: EvalConfig,
    *,
    loss_cfg: LossConfig,
    train_cfg: TrainConfig,
    split: SplitIndices | None = None,
) -> EvalReport:
    """Score a trained encoder on a cohort under the standard split."""
    if split is None:
        split = compute_split(cohort, eval_cfg, subsample_seed=train_cfg.seed)
    hc = cohort.group.astype(str) == "HC"
    readout_rows = split.train_rows[hc[split.train_rows]]
    if readout_rows.size < 2:
        raise InvalidArgumentError("need at least 2 healthy training rows for the readout")
    readout = fit_ridge_readout(
        embed_cohort(params, cohort, readout_rows),
        cohort.age[readout_rows],
        lam=eval_cfg.ridge_lambda,
    )

    def hc_rows(rows):
        return rows[hc[rows]]

    mae_int = r2 = None
    internal_hc = hc_rows(split.internal_test_rows)
    if internal_hc.size:
        preds = predict_age(readout, embed_cohort(params, cohort, internal_hc))
        mae_int = mae(preds, cohort.age[internal_hc])
        try:
            r2 = r_squared(preds, cohort.age[internal_hc])
        except UndefinedMetricError:
            r2 = None
    mae_ext = None
    external_hc = hc_rows(split.external_rows)
    if external_hc.size:
        preds = predict_age(readout, embed_cohort(params, cohort, external_hc))
        mae_ext = mae(preds, cohort.age[external_hc])
    bacc = None
    test_sites = np.unique(cohort.site[split.internal_test_rows].astype(str))
    if split.internal_test_rows.size and test_sites.size >= 2:
        bacc = site_probe_bacc(
            embed_cohort(params, cohort, split.internal_test_rows),
            cohort.site[split.internal_test_rows].astype(str),
            folds=eval_cfg.probe_folds,
            seed=eval_cfg.probe_seed,
        )
    score = None
    degenerate = False
    if bacc is not None and mae_ext is not None:
        if bacc == 0:
            degenerate = True
            score = 0.0
        else:
            score = challenge_score(bacc, mae_ext)
    bag_cohort = cohort.select(split.bag_rows)
    records = bag_records(readout, embed_cohort(params, bag_cohort), bag_cohort)
    stats = group_bag_stats(records)
    bag_groups = {
        g: {"mean": m, "std": s, "n": n} for g, (m, s, n) in stats.items()
    }
    omitted = [g for g in ("HC", "sMCI", "pMCI", "AD") if g not in stats]
    auc = None
    if "HC" in stats and "AD" in stats:
        vals = [(r.bag, 1 if r.group == "AD" else 0) for r in records if r.group in ("HC", "AD")]
        scores = np.array([v[0] for v in vals])
        labels = np.array([v[1] for v in vals])
        auc = roc_auc(scores, labels)
    slopes = longitudinal_bag_slopes(records, min_visits=eval_cfg.min_visits)
    omitted_slopes = [g for g in stats if g not in slopes]
    downstream = None
    if eval_cfg.finetune:
        groups_present = set(str(g) for g in bag_cohort.group)
        if {"HC", "AD"} <= groups_present:
            downstream = finetune_classifier(
                params, bag_cohort, train_cfg, seed=train_cfg.seed
            )
    return EvalReport(
        loss_kind=loss_cfg.kind,
        mae_internal=mae_int,
        mae_external=mae_ext,
        r2=r2,
        site_bacc=bacc,
        challenge_score=score,
        challenge_degenerate=degenerate,
        bag_groups=bag_groups,
        omitted_bag_groups=omitted,
        auc_hc_vs_ad=auc,
        longitudinal_slopes=slopes,
        omitted_slope_groups=omitted_slopes,
        downstream_accuracy=downstream,
        n_train_rows=int(split.train_rows.size),
        n_internal_test_rows=int(split.internal_test_rows.size),
        n_external_rows=int(split.external_rows.size),
        config={
            "loss": loss_config_to_dict(loss_cfg),
            "train": train_config_to_dict(train_cfg),
            "eval": eval_config_to_dict(eval_cfg),
        },
    )


@dataclass
class ExperimentResult:
    report: EvalReport
    history: TrainHistory
    split: SplitIndices


def run_experiment(
    cohort: Cohort,
    loss_cfg: LossConfig,
    train_cfg: TrainConfig,
    eval_cfg: EvalConfig,
) -> ExperimentResult:
    """Train on the standard split of a cohort and evaluate the result."""
    split = compute_split(cohort, eval_cfg, subsample_seed=train_cfg.seed)
    history = fit_encoder(
        cohort.features[split.train_rows],
        cohort.age[split.train_rows],
        loss_cfg,
        train_cfg,
    )
    report = evaluate_params(
        history.params,
        cohort,
        eval_cfg,
        loss_cfg=loss_cfg,
        train_cfg=train_cfg,
        split=split,
    )
    return ExperimentResult(report=report, history=history, split=split)


# ---------------------------------------------------------------------------
# file output; deterministic for a fixed seed, no timestamps


def history_to_dict(history: TrainHistory, config: dict) -> dict:
    return {
        "seed": history.seed,
        "epochs": [
            {"epoch": i, "loss": float(l), "lr": float(r)}
            for i, (l, r) in enumerate(zip(history.losses, history.lrs))
        ],
        "config": config,
    }


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
