"""Run the transfer benchmark: pretraining value for AD classification.

For each seed, pretrains an embedding encoder on the clinical cohort,
fine-tunes it into an HC-vs-AD classifier on held-out subjects, and
compares against fine-tuning from a random initialization. Also reports
the correlation between age-prediction error and downstream accuracy
across the runs.
"""
import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from agecontrast.benchmarks import (
    BENCH_SEEDS,
    CLINICAL_EPOCHS,
    benchmark_eval_config,
    benchmark_loss_config,
    benchmark_train_config,
    clinical_cohort_spec,
)
from agecontrast.cohort import generate_cohort
from agecontrast.encoder import init_encoder
from agecontrast.errors import InvalidArgumentError, UndefinedMetricError
from agecontrast.evaluation import run_experiment
from agecontrast.metrics import finetune_classifier, mae_accuracy_correlation


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="results/transfer")
    p.add_argument("--seeds", type=int, nargs="+", default=list(BENCH_SEEDS))
    p.add_argument("--kind", default="exp", help="pretraining loss kind")
    p.add_argument("--epochs", type=int, default=CLINICAL_EPOCHS)
    p.add_argument("--finetune-epochs", type=int, default=30)
    p.add_argument("--cohort-seed", type=int, default=7002)
    return p.parse_args()


def main():
    args = parse_args()
    cohort = generate_cohort(clinical_cohort_spec(seed=args.cohort_seed))
    loss_cfg = benchmark_loss_config(args.kind)
    eval_cfg = benchmark_eval_config()
    runs = []
    t0 = time.time()
    for seed in args.seeds:
        train_cfg = benchmark_train_config(seed=seed, epochs=args.epochs)
        result = run_experiment(cohort, loss_cfg, train_cfg, eval_cfg)
        heldout = cohort.select(result.split.bag_rows)
        finetune_cfg = replace(train_cfg, epochs=args.finetune_epochs)
        acc_pre = finetune_classifier(
            result.history.params, heldout, finetune_cfg, seed=seed
        )
        random_params = init_encoder(
            cohort.feature_dim,
            output_dim=train_cfg.embedding_dim,
            hidden=train_cfg.hidden,
            seed=seed + 1000,
        )
        acc_rand = finetune_classifier(random_params, heldout, finetune_cfg, seed=seed)
        runs.append(
            {
                "seed": seed,
                "mae_external": result.report.mae_external,
                "accuracy_pretrained": acc_pre,
                "accuracy_random_init": acc_rand,
            }
        )
        print(f"seed {seed}: mae_ext {result.report.mae_external:.3f}, "
              f"finetune {acc_pre:.3f} vs random-init {acc_rand:.3f}")

    wins = sum(
        1 for r in runs if r["accuracy_pretrained"] >= r["accuracy_random_init"]
    )
    pairs = [(r["mae_external"], r["accuracy_pretrained"]) for r in runs]
    try:
        corr_r, corr_slope = mae_accuracy_correlation(pairs)
    except (InvalidArgumentError, UndefinedMetricError):
        corr_r = corr_slope = None
    wall = time.time() - t0

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "kind": args.kind,
        "cohort_seed": args.cohort_seed,
        "epochs": args.epochs,
        "finetune_epochs": args.finetune_epochs,
        "runs": runs,
        "pretrained_wins": f"{wins}/{len(runs)}",
        "mae_accuracy_r": corr_r,
        "mae_accuracy_slope": corr_slope,
        "wall_minutes": round(wall / 60, 2),
    }
    (out / "transfer_summary.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n"
    )
    print(f"pretrained >= random init in {wins}/{len(runs)} seeds")
    if corr_r is not None:
        print(f"accuracy vs -mae: r = {corr_r:.3f}, slope = {corr_slope:.3f}")
    print(f"wrote {out / 'transfer_summary.json'} ({wall/60:.1f} min)")


if __name__ == "__main__":
    main()
