"""Acceptance suite: ten go/no-go checks on the finished package.

Each test prints one [ACCEPTANCE] line with its verdict. The first five
criteria are exact or oracle-backed and run in seconds; criteria 6-9
train real models on the standard benchmarks and together take roughly
half an hour on one CPU core. Shared benchmark runs live in
session-scoped fixtures so the scaling sweep happens once.
"""
import json
import math
import time

import numpy as np
import pytest

from agecontrast.benchmarks import (
    BENCH_LOSS_KINDS,
    BENCH_SEEDS,
    CLINICAL_EPOCHS,
    SCALING_TRAIN_SIZES,
    benchmark_eval_config,
    benchmark_loss_config,
    benchmark_train_config,
    clinical_cohort_spec,
    longitudinal_cohort_spec,
    longitudinal_experiment,
    longitudinal_pretrain_spec,
    scaling_cohort_spec,
    scaling_sweep_spec,
)
from agecontrast.cli import main
from agecontrast.cohort import generate_cohort, read_cohort_csv, write_cohort_csv
from agecontrast.evaluation import run_experiment
from agecontrast.losses import (
    batch_loss,
    exp_loss,
    infonce_loss,
    l1_regression_loss,
    threshold_loss,
    yaware_loss,
)
from agecontrast.metrics import (
    balanced_accuracy,
    challenge_score,
    fit_ridge_readout,
    mae,
    predict_age,
    r_squared,
    roc_auc,
)
from agecontrast.similarity import normalize_rows
from agecontrast.sweep import run_sweep

from test_gradients import (
    ALL_KINDS,
    encoder_gradient_max_rel_error,
    loss_gradient_max_rel_error,
)
from test_losses import (
    anchor_batch,
    cfg,
    delta_for_weight,
    paired_labels,
    random_batch,
)

INVARIANCE_SIGMA = 20.0  # keeps threshold normalizers off their cap


def emit(capsys, criterion, detail, ok):
    with capsys.disabled():
        print(f"\n[ACCEPTANCE] {criterion} {detail} {'PASS' if ok else 'FAIL'}")
    assert ok, f"{criterion}: {detail}"


# ---------------------------------------------------------------------------
# benchmark fixtures, run once per session


@pytest.fixture(scope="session")
def scaling_sweep():
    """The full 4-kind x 4-size x 5-seed scaling sweep, with wall time."""
    t0 = time.monotonic()
    rows = run_sweep(
        scaling_sweep_spec(),
        scaling_cohort_spec(),
        benchmark_loss_config("exp"),
        benchmark_train_config(),
        benchmark_eval_config(),
        jobs=1,
    )
    wall = time.monotonic() - t0
    assert all(r["status"] == "ok" for r in rows)
    return rows, wall


@pytest.fixture(scope="session")
def clinical_runs():
    """EvalReports for every loss kind and seed on the clinical cohort."""
    cohort = generate_cohort(clinical_cohort_spec())
    eval_cfg = benchmark_eval_config()
    out = {}
    for kind in BENCH_LOSS_KINDS:
        loss_cfg = benchmark_loss_config(kind)
        for seed in BENCH_SEEDS:
            train_cfg = benchmark_train_config(seed=seed, epochs=CLINICAL_EPOCHS)
            out[(kind, seed)] = run_experiment(
                cohort, loss_cfg, train_cfg, eval_cfg
            ).report
    return out


@pytest.fixture(scope="session")
def longitudinal_reports():
    pretrain = generate_cohort(longitudinal_pretrain_spec())
    cohort = generate_cohort(longitudinal_cohort_spec())
    return [
        longitudinal_experiment(pretrain, cohort, seed) for seed in BENCH_SEEDS
    ]


# ---------------------------------------------------------------------------
# criterion 1: challenge score formula


def test_c01_challenge_score_reproduction(capsys):
    got_a = challenge_score(0.051, 3.76)
    got_b = challenge_score(0.054, 2.25)
    ok = abs(got_a - 1.54) <= 0.01 and abs(got_b - 0.93) <= 0.01
    emit(
        capsys,
        "C1",
        f"challenge score (0.051, 3.76) -> {got_a:.4f} and (0.054, 2.25) -> {got_b:.4f}",
        ok,
    )


# ---------------------------------------------------------------------------
# criterion 2: hand-evaluated loss scalars


def test_c02_loss_scalar_examples(capsys):
    tol = 1e-9
    ln_1p_exp_m08 = math.log(1.0 + math.exp(-0.8))
    checks = []

    # infonce: one positive at s=0.9 and one negative at s=0.1; equal
    # similarities; perfect separation at tau=0.01
    labels = np.array([50.0, 50.0, 80.0])
    res = infonce_loss(anchor_batch(0.9, 0.1), labels, cfg("infonce"))
    checks.append(abs(res.per_anchor[0] - ln_1p_exp_m08) < tol)
    res = infonce_loss(anchor_batch(0.4, 0.4), labels, cfg("infonce"))
    checks.append(abs(res.per_anchor[0] - math.log(2.0)) < tol)
    e = np.array([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
    res = infonce_loss(e, labels, cfg("infonce", tau=0.01))
    checks.append(abs(res.per_anchor[0]) < tol)

    # yaware: w=[1,0], s=[0.9,0.1]; uniform weights and similarities
    res = yaware_loss(
        anchor_batch(0.9, 0.1), np.array([50.0, 50.0, 100.0]), cfg("yaware")
    )
    checks.append(abs(res.per_anchor[0] - ln_1p_exp_m08) < tol)
    m = 4
    res = yaware_loss(
        np.tile(np.array([[0.6, 0.8]]), (m + 1, 1)),
        np.full(m + 1, 55.0),
        cfg("yaware"),
    )
    checks.append(abs(res.value - math.log(m)) < tol)

    # threshold: w=[0.8,0.3], s=[0.5,0.2] under both flag settings; equal
    # weights make every strict-lesser set empty
    e = anchor_batch(0.5, 0.2)
    labels = np.array([0.0, delta_for_weight(0.8), delta_for_weight(0.3)])
    res = threshold_loss(e, labels, cfg("threshold"))
    checks.append(abs(res.per_anchor[0] - (-0.8)) < tol)
    res = threshold_loss(e, labels, cfg("threshold", flag=True))
    want = (0.8 / 0.3) * math.log(1.0 + math.exp(-0.3))
    checks.append(abs(res.per_anchor[0] - want) < tol)
    res = threshold_loss(e, np.full(3, 42.0), cfg("threshold"))
    checks.append(res.value == 0.0)

    # exp: w=[1,0], s=[0.9,0.1] -> -0.8; w=[0.5,0.5], s=[1,0] -> -0.25
    res = exp_loss(
        anchor_batch(0.9, 0.1), np.array([50.0, 50.0, 100.0]), cfg("exp")
    )
    checks.append(abs(res.per_anchor[0] - (-0.8)) < tol)
    d = delta_for_weight(0.5)
    e = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    res = exp_loss(e, np.array([50.0, 50.0 + d, 50.0 - d]), cfg("exp"))
    checks.append(abs(res.per_anchor[0] - (-0.25)) < tol)

    # l1: identity, single element, hand example
    res = l1_regression_loss(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0]))
    checks.append(res.value == 0.0)
    res = l1_regression_loss(np.array([0.0]), np.array([5.0]))
    checks.append(res.value == 5.0 and res.gradient[0] == -1.0)
    res = l1_regression_loss(np.array([1.0, -1.0]), np.array([0.0, 0.0]))
    checks.append(
        abs(res.value - 1.0) < tol
        and np.allclose(res.gradient, [0.5, -0.5], atol=tol)
    )

    emit(
        capsys,
        "C2",
        f"{sum(checks)}/{len(checks)} hand-evaluated loss scalars at 1e-9",
        all(checks),
    )


# ---------------------------------------------------------------------------
# criterion 3: gradients against finite differences, under a minute


def test_c03_gradient_correctness(capsys):
    t0 = time.monotonic()
    worst_loss = 0.0
    for kind in ALL_KINDS:
        for seed in range(100):
            worst_loss = max(worst_loss, loss_gradient_max_rel_error(kind, seed))
    worst_e2e = 0.0
    for case, kind in enumerate(ALL_KINDS * 2):
        worst_e2e = max(worst_e2e, encoder_gradient_max_rel_error(kind, case))
    elapsed = time.monotonic() - t0
    ok = worst_loss < 1e-4 and worst_e2e < 1e-4 and elapsed < 60.0
    emit(
        capsys,
        "C3",
        f"500 loss batches (max rel err {worst_loss:.2e}) and 10 encoder cases "
        f"(max {worst_e2e:.2e}) in {elapsed:.1f}s",
        ok,
    )


# ---------------------------------------------------------------------------
# criterion 4: reduction equivalences


def test_c04_reduction_equivalences(capsys):
    worst = 0.0
    for seed in range(50):
        e, _ = random_batch(seed)
        labels = paired_labels(seed)
        a = exp_loss(e, labels, cfg("exp", sigma=0.01, tau=0.1, flag=True))
        b = infonce_loss(e, labels, cfg("infonce", tau=0.1))
        worst = max(
            worst,
            abs(a.value - b.value),
            float(np.abs(a.gradient - b.gradient).max()),
        )

    worst_align = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n, d = 6, 4
        e = normalize_rows(rng.normal(size=(n, d)))
        res = exp_loss(e, np.full(n, 63.0), cfg("exp", sigma=3.0, tau=0.1))
        s = e @ e.T / 0.1
        m = n - 1
        closed = 0.0
        for i in range(n):
            closed += -sum(
                s[i, k] - math.log(m - 1) for k in range(n) if k != i
            ) / m
        closed /= n
        worst_align = max(worst_align, abs(res.value - closed))

    ok = worst < 1e-12 and worst_align < 1e-12
    emit(
        capsys,
        "C4",
        f"exp==infonce on 50 one-hot batches (max dev {worst:.2e}), "
        f"all-ones closed form on 50 batches (max dev {worst_align:.2e})",
        ok,
    )


# ---------------------------------------------------------------------------
# criterion 5: invariance suite


def test_c05_invariance_suite(capsys):
    kernel_cases = [
        ("yaware", False),
        ("threshold", False),
        ("threshold", True),
        ("exp", False),
        ("exp", True),
    ]
    worst_perm = 0.0
    worst_rescale = 0.0
    worst_rot = 0.0
    n_cases = 0
    for seed in range(20):
        e, labels = random_batch(seed)
        rng = np.random.default_rng(seed + 500)
        perm = rng.permutation(len(labels))
        q, _ = np.linalg.qr(rng.normal(size=(e.shape[1], e.shape[1])))
        for kind, flag in kernel_cases:
            config = cfg(kind, sigma=INVARIANCE_SIGMA, tau=0.1, flag=flag)
            base = batch_loss(e, labels, config)
            permuted = batch_loss(e[perm], labels[perm], config)
            worst_perm = max(
                worst_perm,
                abs(permuted.value - base.value),
                float(np.abs(permuted.gradient - base.gradient[perm]).max()),
            )
            c = 3.7
            scaled_cfg = cfg(kind, sigma=c * INVARIANCE_SIGMA, tau=0.1, flag=flag)
            scaled = batch_loss(e, c * labels, scaled_cfg)
            worst_rescale = max(
                worst_rescale,
                abs(scaled.value - base.value),
                float(np.abs(scaled.gradient - base.gradient).max()),
            )
            rotated = batch_loss(e @ q, labels, config)
            worst_rot = max(worst_rot, abs(rotated.value - base.value))
            n_cases += 1

    auc_exact = True
    for seed in range(20):
        rng = np.random.default_rng(seed)
        scores = rng.normal(size=25)
        labels = rng.integers(0, 2, size=25)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        base = roc_auc(scores, labels)
        auc_exact &= roc_auc(3.0 * scores + 7.0, labels) == base
        auc_exact &= roc_auc(np.exp(scores), labels) == base

    ok = (
        worst_perm < 1e-12
        and worst_rescale < 1e-12
        and worst_rot < 1e-9
        and auc_exact
    )
    emit(
        capsys,
        "C5",
        f"{n_cases} loss cases: permutation {worst_perm:.2e}, rescale "
        f"{worst_rescale:.2e}, rotation {worst_rot:.2e}; AUC monotone exact "
        f"on 20 cases",
        ok,
    )


# ---------------------------------------------------------------------------
# criterion 6: external MAE scaling trend


def curve_means(rows, kind, metric):
    return [
        float(
            np.mean(
                [
                    r[metric]
                    for r in rows
                    if r["method"] == kind and r["axis_value"] == size
                ]
            )
        )
        for size in SCALING_TRAIN_SIZES
    ]


def test_c06_scaling_trend(capsys, scaling_sweep):
    rows, wall = scaling_sweep
    ok = wall < 900.0
    details = []
    for kind in BENCH_LOSS_KINDS:
        means = curve_means(rows, kind, "mae_ext")
        violations = [
            (means[i + 1] - means[i]) / means[i]
            for i in range(len(means) - 1)
            if means[i + 1] > means[i]
        ]
        curve_ok = len(violations) <= 1 and all(v <= 0.05 for v in violations)
        ok &= curve_ok
        details.append(f"{kind} {[round(m, 2) for m in means]}")
    emit(
        capsys,
        "C6",
        "external MAE vs train size non-increasing ("
        + "; ".join(details)
        + f") in {wall:.0f}s",
        ok,
    )


# ---------------------------------------------------------------------------
# criterion 7: site-probe balanced accuracy trend


def test_c07_site_bias_trend(capsys, scaling_sweep):
    rows, _ = scaling_sweep
    exp_means = curve_means(rows, "exp", "site_bacc")
    near_chance = all(abs(m - 0.125) <= 0.05 for m in exp_means)

    largest = SCALING_TRAIN_SIZES[-1]
    wins = 0
    for seed in BENCH_SEEDS:
        per_kind = {
            kind: next(
                r["site_bacc"]
                for r in rows
                if r["method"] == kind
                and r["axis_value"] == largest
                and r["seed"] == seed
            )
            for kind in ("l1", "exp")
        }
        wins += per_kind["l1"] > per_kind["exp"]

    ok = near_chance and wins >= 4
    emit(
        capsys,
        "C7",
        f"exp site BAcc {[round(m, 3) for m in exp_means]} all within 0.05 of "
        f"0.125; l1 above exp at {largest} in {wins}/5 seeds",
        ok,
    )


# ---------------------------------------------------------------------------
# criterion 8: BAG group separation on the clinical cohort


def test_c08_bag_clinical(capsys, clinical_runs):
    ordering_ok = True
    counts = {}
    for kind in BENCH_LOSS_KINDS:
        n = 0
        for seed in BENCH_SEEDS:
            groups = clinical_runs[(kind, seed)].bag_groups
            n += (
                groups["HC"]["mean"] < groups["pMCI"]["mean"] < groups["AD"]["mean"]
            )
        counts[kind] = n
        ordering_ok &= n >= 4
    aucs = [clinical_runs[("exp", seed)].auc_hc_vs_ad for seed in BENCH_SEEDS]
    mean_auc = float(np.mean(aucs))
    ok = ordering_ok and mean_auc > 0.8
    emit(
        capsys,
        "C8",
        f"BAG ordering HC<pMCI<AD per kind {counts}; exp HC-vs-AD AUC "
        f"{mean_auc:.3f} over 5 seeds",
        ok,
    )


# ---------------------------------------------------------------------------
# criterion 9: longitudinal slopes


def test_c09_longitudinal_slopes(capsys, longitudinal_reports):
    hc_ok = sum(
        1 for rep in longitudinal_reports
        if abs(rep.longitudinal_slopes["HC"]) < 0.2
    )
    ad_ok = sum(
        1 for rep in longitudinal_reports if rep.longitudinal_slopes["AD"] > 0.5
    )
    hc_vals = [round(r.longitudinal_slopes["HC"], 3) for r in longitudinal_reports]
    ad_vals = [round(r.longitudinal_slopes["AD"], 3) for r in longitudinal_reports]
    ok = hc_ok >= 4 and ad_ok >= 4
    emit(
        capsys,
        "C9",
        f"|HC slope|<0.2 in {hc_ok}/5 seeds {hc_vals}; AD slope>0.5 in "
        f"{ad_ok}/5 seeds {ad_vals}",
        ok,
    )


# ---------------------------------------------------------------------------
# criterion 10: metric examples, CSV round trip, byte determinism


def test_c10_metrics_io_determinism(capsys, tmp_path):
    checks = []

    preds = np.array([1.0, 2.0, 4.0])
    labels = np.array([1.0, 2.0, 3.0])
    checks.append(abs(mae(preds, labels) - 1.0 / 3.0) < 1e-12)
    checks.append(mae(labels, labels) == 0.0)
    checks.append(abs(mae([1.0, 2.0], [2.0, 4.0]) - 1.5) < 1e-12)
    checks.append(abs(r_squared(labels, labels) - 1.0) < 1e-12)
    checks.append(
        abs(r_squared(np.full(4, 2.5), np.array([1.0, 2.0, 3.0, 4.0]))) < 1e-12
    )
    y_true = np.array([0, 0, 1, 1])
    y_pred = np.array([0, 0, 1, 0])  # recalls 1.0 and 0.5
    checks.append(abs(balanced_accuracy(y_true, y_pred) - 0.75) < 1e-12)
    checks.append(
        abs(
            roc_auc(np.array([0.1, 0.4, 0.35, 0.8]), np.array([0, 0, 1, 1]))
            - 0.75
        )
        < 1e-12
    )
    checks.append(roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0)
    checks.append(roc_auc([0.5, 0.5, 0.5, 0.5], [0, 0, 1, 1]) == 0.5)
    x = np.array([[1.0], [-1.0]])
    readout = fit_ridge_readout(x, np.array([1.0, -1.0]), lam=1.0)
    checks.append(
        np.allclose(predict_age(readout, x), [2.0 / 3.0, -2.0 / 3.0], atol=1e-12)
    )
    rng = np.random.default_rng(0)
    x = rng.normal(size=(20, 3))
    y = x @ np.array([2.0, -1.0, 0.5]) + 4.0
    readout = fit_ridge_readout(x, y, lam=0.0)
    checks.append(mae(predict_age(readout, x), y) < 1e-9)
    readout = fit_ridge_readout(x, y, lam=1e12)
    checks.append(np.max(np.abs(predict_age(readout, x) - y.mean())) < 1e-4)

    cohort = generate_cohort(clinical_cohort_spec(seed=31))
    path = tmp_path / "cohort.csv"
    write_cohort_csv(cohort, path)
    back = read_cohort_csv(path)
    checks.append(np.abs(back.features - cohort.features).max() < 1e-12)
    checks.append(np.abs(back.age - cohort.age).max() < 1e-12)
    checks.append(np.array_equal(back.subject_id, cohort.subject_id))

    config = {
        "synthetic": {
            "n_subjects": 120,
            "n_sites": 4,
            "feature_dim": 8,
            "noise_std": 0.2,
            "seed": 3,
        },
        "loss": {
            "kind": "exp",
            "kernel": {"sigma": 5.0},
            "similarity": {"temperature": 0.1},
        },
        "train": {
            "epochs": 2,
            "batch_size": 16,
            "hidden": [8],
            "embedding_dim": 4,
            "seed": 0,
        },
        "eval": {},
    }
    byte_pairs = []
    for rep in ("one", "two"):
        d = tmp_path / rep
        d.mkdir()
        cfg_path = d / "config.json"
        cfg_path.write_text(json.dumps(config))
        assert main(["generate", "--config", str(cfg_path), "--out-dir", str(d)]) == 0
        assert (
            main(
                [
                    "train",
                    "--config",
                    str(cfg_path),
                    "--cohort",
                    str(d / "cohort.csv"),
                    "--out-dir",
                    str(d),
                ]
            )
            == 0
        )
        byte_pairs.append(
            tuple(
                (d / name).read_bytes()
                for name in ("cohort.csv", "checkpoint.json")
            )
        )
    checks.append(byte_pairs[0] == byte_pairs[1])

    emit(
        capsys,
        "C10",
        f"{sum(checks)}/{len(checks)} metric examples, CSV round trip at "
        f"1e-12, generate and train byte-identical",
        all(checks),
    )
