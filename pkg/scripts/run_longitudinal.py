"""Run the longitudinal benchmark: brain age gap change over follow-ups.

Pretrains an encoder on the healthy lifespan cohort, then reads out
per-group BAG slopes (years of gap per year of follow-up) on the elderly
longitudinal cohort. Healthy and stable-MCI groups should stay flat
while progressive groups drift upward.
"""
import argparse
import json
import time
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from agecontrast.benchmarks import (
    BENCH_SEEDS,
    LONGITUDINAL_EPOCHS,
    longitudinal_cohort_spec,
    longitudinal_experiment,
    longitudinal_pretrain_spec,
)
from agecontrast.cohort import generate_cohort


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="results/longitudinal")
    p.add_argument("--seeds", type=int, nargs="+", default=list(BENCH_SEEDS))
    p.add_argument("--epochs", type=int, default=LONGITUDINAL_EPOCHS)
    p.add_argument("--cohort-seed", type=int, default=7003)
    return p.parse_args()


def main():
    args = parse_args()
    pretrain = generate_cohort(longitudinal_pretrain_spec(seed=args.cohort_seed))
    cohort = generate_cohort(longitudinal_cohort_spec(seed=args.cohort_seed))
    results = []
    t0 = time.time()
    for seed in args.seeds:
        rep = longitudinal_experiment(pretrain, cohort, seed, epochs=args.epochs)
        slopes = rep.longitudinal_slopes
        results.append({"seed": seed, "slopes": slopes})
        print("seed %d: %s" % (
            seed, "  ".join(f"{g} {s:+.3f}" for g, s in sorted(slopes.items()))))
    wall = time.time() - t0

    stable = sum(1 for r in results if abs(r["slopes"].get("HC", 99)) < 0.2)
    rising = sum(1 for r in results if r["slopes"].get("AD", 0) > 0.5)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "cohort_seed": args.cohort_seed,
        "epochs": args.epochs,
        "seeds": list(args.seeds),
        "results": results,
        "hc_stable": f"{stable}/{len(results)}",
        "ad_rising": f"{rising}/{len(results)}",
        "wall_minutes": round(wall / 60, 2),
    }
    (out / "longitudinal_summary.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n"
    )
    print(f"HC stable in {stable}/{len(results)} seeds, "
          f"AD rising in {rising}/{len(results)} seeds")
    print(f"wrote {out / 'longitudinal_summary.json'} ({wall/60:.1f} min)")


if __name__ == "__main__":
    main()
