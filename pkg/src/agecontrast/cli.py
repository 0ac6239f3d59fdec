"""Command-line harness: generate, train, evaluate, sweep, report.

Configuration precedence, highest first: command-line flags, then the JSON
config file given via --config, then built-in defaults. The effective
configuration is echoed into every output artifact so a result can always
be traced back to the settings that produced it.

Exit codes: 0 success, 2 input or config error, 3 numerical divergence,
4 total sweep failure (no cell succeeded).
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .cohort import (
    generate_cohort,
    read_cohort_csv,
    synthetic_spec_from_dict,
    synthetic_spec_to_dict,
    write_cohort_csv,
)
from .encoder import checkpoint_dict, params_from_checkpoint_dict
from .errors import (
    CohortParseError,
    DegenerateBatchError,
    DegenerateInputError,
    IllConditionedError,
    InvalidArgumentError,
    InvalidFoldError,
    TrainingDivergedError,
    UndefinedMetricError,
)
from .evaluation import (
    compute_split,
    eval_config_from_dict,
    eval_config_to_dict,
    evaluate_params,
    history_to_dict,
    read_json,
    write_json,
)
from .losses import loss_config_from_dict, loss_config_to_dict
from .sweep import (
    TREND_COLUMNS,
    attach_metadata,
    run_sweep,
    summarize,
    sweep_spec_from_dict,
    sweep_spec_to_dict,
    write_trend_csv,
)
from .training import fit_encoder, train_config_from_dict, train_config_to_dict

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_SWEEP_FAILED = 4

_NUMERIC_ERRORS = (
    TrainingDivergedError,
    DegenerateBatchError,
    DegenerateInputError,
    IllConditionedError,
    UndefinedMetricError,
)
_CONFIG_ERRORS = (
    InvalidArgumentError,
    InvalidFoldError,
    CohortParseError,
    FileNotFoundError,
    IsADirectoryError,
    NotADirectoryError,
    PermissionError,
    OSError,
    json.JSONDecodeError,
    KeyError,
    TypeError,
    ValueError,
)


def _load_config_file(path):
    if path is None:
        return {}
    text = Path(path).read_text()
    cfg = json.loads(text)
    if not isinstance(cfg, dict):
        raise InvalidArgumentError("config file must contain a JSON object")
    return cfg


def _section(file_cfg, name):
    section = file_cfg.get(name, {})
    if not isinstance(section, dict):
        raise InvalidArgumentError(f"config section {name!r} must be a JSON object")
    return dict(section)


def _out_dir(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_cohort(path):
    if not Path(path).exists():
        raise FileNotFoundError(f"cohort file not found: {path}")
    return read_cohort_csv(path)


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args):
    file_cfg = _load_config_file(args.config)
    section = _section(file_cfg, "synthetic")
    if args.seed is not None:
        section["seed"] = args.seed
    spec = synthetic_spec_from_dict(section)

    cohort = generate_cohort(spec)
    out = _out_dir(args)
    csv_path = out / "cohort.csv"
    write_cohort_csv(cohort, csv_path)
    meta = {
        "synthetic": synthetic_spec_to_dict(spec),
        "n_rows": int(cohort.n_rows),
        "n_subjects": int(len(cohort.subjects())),
        "n_sites": int(len(np.unique(cohort.site))),
        "feature_dim": int(cohort.feature_dim),
    }
    write_json(out / "cohort_meta.json", meta)
    print(f"wrote {csv_path}")
    print(f"rows: {meta['n_rows']}")
    print(f"subjects: {meta['n_subjects']}")
    return EXIT_OK


def cmd_train(args):
    file_cfg = _load_config_file(args.config)
    loss_section = _section(file_cfg, "loss")
    loss_section.setdefault("kind", "exp")
    train_section = _section(file_cfg, "train")
    if args.seed is not None:
        train_section["seed"] = args.seed
    eval_section = _section(file_cfg, "eval")

    loss_cfg = loss_config_from_dict(loss_section)
    train_cfg = train_config_from_dict(train_section)
    eval_cfg = eval_config_from_dict(eval_section)

    cohort = _load_cohort(args.cohort)
    split = compute_split(cohort, eval_cfg, subsample_seed=train_cfg.seed)
    history = fit_encoder(
        cohort.features[split.train_rows],
        cohort.age[split.train_rows],
        loss_cfg,
        train_cfg,
    )

    effective = {
        "loss": loss_config_to_dict(loss_cfg),
        "train": train_config_to_dict(train_cfg),
        "eval": eval_config_to_dict(eval_cfg),
    }
    out = _out_dir(args)
    ckpt_path = out / "checkpoint.json"
    write_json(
        ckpt_path,
        checkpoint_dict(
            history.params,
            loss_config=effective["loss"],
            train_config=effective["train"],
            seed=train_cfg.seed,
        ),
    )
    write_json(out / "history.json", history_to_dict(history, effective))
    final = float(history.losses[-1]) if len(history.losses) else float("nan")
    print(f"wrote {ckpt_path}")
    print(f"epochs: {len(history.losses)}")
    print(f"final loss: {final!r}")
    return EXIT_OK


def cmd_evaluate(args):
    file_cfg = _load_config_file(args.config)
    eval_section = _section(file_cfg, "eval")
    eval_cfg = eval_config_from_dict(eval_section)

    if not Path(args.checkpoint).exists():
        raise FileNotFoundError(f"checkpoint file not found: {args.checkpoint}")
    ckpt = read_json(args.checkpoint)
    params = params_from_checkpoint_dict(ckpt)
    loss_section = ckpt.get("loss_config") or {"kind": "exp"}
    loss_cfg = loss_config_from_dict(loss_section)
    train_section = ckpt.get("train_config") or {}
    train_cfg = train_config_from_dict(train_section)

    subsample_seed = args.seed
    if subsample_seed is None:
        recorded = ckpt.get("seed")
        subsample_seed = train_cfg.seed if recorded is None else int(recorded)

    cohort = _load_cohort(args.cohort)
    split = compute_split(cohort, eval_cfg, subsample_seed=subsample_seed)
    report = evaluate_params(
        params,
        cohort,
        eval_cfg,
        loss_cfg=loss_cfg,
        train_cfg=train_cfg,
        split=split,
    )
    out = _out_dir(args)
    report_path = out / "eval_report.json"
    write_json(report_path, report.to_dict())
    print(f"wrote {report_path}")
    print(f"mae_internal: {report.mae_internal!r}")
    print(f"mae_external: {report.mae_external!r}")
    print(f"site_bacc: {report.site_bacc!r}")
    print(f"challenge_score: {report.challenge_score!r}")
    return EXIT_OK


def cmd_sweep(args):
    file_cfg = _load_config_file(args.config)
    sweep_section = _section(file_cfg, "sweep")
    spec = sweep_spec_from_dict(sweep_section)

    synth_section = _section(file_cfg, "synthetic")
    if args.seed is not None:
        synth_section["seed"] = args.seed
    cohort_spec = synthetic_spec_from_dict(synth_section)
    loss_section = _section(file_cfg, "loss")
    loss_section.setdefault("kind", "exp")
    loss_cfg = loss_config_from_dict(loss_section)
    train_cfg = train_config_from_dict(_section(file_cfg, "train"))
    eval_cfg = eval_config_from_dict(_section(file_cfg, "eval"))

    rows = run_sweep(
        spec, cohort_spec, loss_cfg, train_cfg, eval_cfg, jobs=args.jobs
    )
    summary = summarize(rows, spec)
    summary["config"] = {
        "sweep": sweep_spec_to_dict(spec),
        "synthetic": synthetic_spec_to_dict(cohort_spec),
        "loss": loss_config_to_dict(loss_cfg),
        "train": train_config_to_dict(train_cfg),
        "eval": eval_config_to_dict(eval_cfg),
    }
    summary = attach_metadata(summary)

    out = _out_dir(args)
    trend_path = out / "trend.csv"
    write_trend_csv(rows, trend_path)
    write_json(out / "sweep_summary.json", summary)
    n_ok = summary["n_ok"]
    n_failed = summary["n_failed"]
    print(f"wrote {trend_path}")
    print(f"cells ok: {n_ok}")
    print(f"cells failed: {n_failed}")
    if n_ok == 0:
        print("error: every sweep cell failed", file=sys.stderr)
        return EXIT_SWEEP_FAILED
    return EXIT_OK


def _read_trend_csv(path):
    if not Path(path).exists():
        raise FileNotFoundError(f"trend file not found: {path}")
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or tuple(reader.fieldnames) != TREND_COLUMNS:
            raise InvalidArgumentError(
                f"trend file must have columns {TREND_COLUMNS}, "
                f"got {reader.fieldnames}"
            )
        return list(reader)


def cmd_report(args):
    rows = _read_trend_csv(args.trend)
    if not rows:
        raise InvalidArgumentError("trend file has no data rows")

    metrics = ("mae_ext", "site_bacc", "auc", "challenge_score")
    cells = {}
    for row in rows:
        key = (row["method"], row["axis_value"])
        cells.setdefault(key, []).append(row)

    out = _out_dir(args)
    report_path = out / "report.csv"
    lines = ["method,axis_value,metric,mean,std,n"]
    header = f"{'method':>10s} {'axis':>8s} " + " ".join(f"{m:>16s}" for m in metrics)
    print(header)
    for (method, axis_value), group in sorted(cells.items()):
        shown = []
        for metric in metrics:
            values = [float(r[metric]) for r in group if r[metric] != ""]
            if values:
                mean = float(np.mean(values))
                std = float(np.std(values))
                lines.append(
                    f"{method},{axis_value},{metric},{mean!r},{std!r},{len(values)}"
                )
                shown.append(f"{mean:8.3f}+-{std:5.3f}")
            else:
                lines.append(f"{method},{axis_value},{metric},,,0")
                shown.append(f"{'':>15s}")
        print(f"{method:>10s} {axis_value:>8s} " + " ".join(shown))
    Path(report_path).write_text("\n".join(lines) + "\n")
    print(f"wrote {report_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    parser = argparse.ArgumentParser(
        prog="agecontrast",
        description="Kernel-weighted contrastive age modeling harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override the run seed")
        p.add_argument("--out-dir", default=".", help="output directory")

    p = sub.add_parser("generate", help="write a synthetic cohort CSV")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train an encoder on a cohort")
    common(p)
    p.add_argument("--cohort", required=True, help="cohort CSV path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a cohort")
    common(p)
    p.add_argument("--cohort", required=True, help="cohort CSV path")
    p.add_argument("--checkpoint", required=True, help="checkpoint JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="run a sweep grid and write trend data")
    common(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel worker count")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="aggregate a trend CSV into plot data")
    common(p)
    p.add_argument("--trend", required=True, help="trend CSV path")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
