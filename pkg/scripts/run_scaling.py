"""Run the scaling benchmark: external MAE and site decodability vs train size.

Trains every benchmark loss kind at several training-set sizes over
several seeds on the healthy-only multi-site cohort, then prints the
per-kind mean curves and writes trend.csv plus sweep_summary.json.
"""
import argparse
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from agecontrast.benchmarks import (
    BENCH_LOSS_KINDS,
    BENCH_SEEDS,
    SCALING_EPOCHS,
    SCALING_TRAIN_SIZES,
    benchmark_eval_config,
    benchmark_loss_config,
    benchmark_train_config,
    scaling_cohort_spec,
)
from agecontrast.sweep import (
    SweepSpec,
    attach_metadata,
    run_sweep,
    summarize,
    write_trend_csv,
)


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="results/scaling", help="output directory")
    p.add_argument("--seeds", type=int, nargs="+", default=list(BENCH_SEEDS))
    p.add_argument("--sizes", type=int, nargs="+", default=list(SCALING_TRAIN_SIZES))
    p.add_argument("--kinds", nargs="+", default=list(BENCH_LOSS_KINDS))
    p.add_argument("--epochs", type=int, default=SCALING_EPOCHS)
    p.add_argument("--cohort-seed", type=int, default=7001)
    p.add_argument("--jobs", type=int, default=1)
    return p.parse_args()


def main():
    args = parse_args()
    spec = SweepSpec(
        axis="train_size",
        values=tuple(args.sizes),
        seeds=tuple(args.seeds),
        loss_kinds=tuple(args.kinds),
    )
    t0 = time.time()
    rows = run_sweep(
        spec,
        scaling_cohort_spec(seed=args.cohort_seed),
        benchmark_loss_config(args.kinds[0]),
        benchmark_train_config(epochs=args.epochs),
        benchmark_eval_config(),
        jobs=args.jobs,
    )
    wall = time.time() - t0

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trend_csv(rows, out / "trend.csv")
    summary = attach_metadata(summarize(rows, spec))
    (out / "sweep_summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n"
    )

    agg = summary["aggregates"]
    print(f"finished {len(rows)} cells in {wall/60:.1f} min "
          f"({summary['n_failed']} failed)")
    print(f"{'kind':>10s} {'metric':>10s} " +
          " ".join(f"{v:>9d}" for v in args.sizes))
    for kind in args.kinds:
        for metric in ("mae_ext", "site_bacc"):
            means = [agg[kind][str(v)][metric]["mean"] for v in args.sizes]
            print(f"{kind:>10s} {metric:>10s} " +
                  " ".join(f"{m:9.4f}" for m in means))
    print(f"wrote {out / 'trend.csv'}")


if __name__ == "__main__":
    main()
