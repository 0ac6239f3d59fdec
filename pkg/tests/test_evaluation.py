"""Split policy and the end-to-end experiment report."""
import numpy as np
import pytest

from agecontrast.cohort import SyntheticSpec, external_sites, generate_cohort
from agecontrast.errors import InvalidArgumentError
from agecontrast.evaluation import (
    EvalConfig,
    compute_split,
    eval_config_from_dict,
    eval_config_to_dict,
    history_to_dict,
    run_experiment,
)
from agecontrast.kernels import KernelSpec
from agecontrast.losses import LossConfig
from agecontrast.similarity import SimilarityConfig
from agecontrast.training import TrainConfig


def spec(**overrides):
    base = dict(n_subjects=250, n_sites=5, feature_dim=8, noise_std=0.2, seed=0)
    base.update(overrides)
    return SyntheticSpec(**base)


def loss_cfg(kind="exp"):
    return LossConfig(
        kind=kind,
        kernel=None if kind in ("l1", "infonce") else KernelSpec(sigma=5.0),
        similarity=SimilarityConfig(temperature=0.1),
    )


def train_cfg(**overrides):
    base = dict(epochs=3, batch_size=16, hidden=(8,), embedding_dim=4, seed=0)
    base.update(overrides)
    return TrainConfig(**base)


@pytest.fixture(scope="module")
def cohort():
    return generate_cohort(spec())


# ---------------------------------------------------------------------------
# split policy


def test_external_sites_last_by_name(cohort):
    names = sorted(set(str(s) for s in cohort.site))
    assert external_sites(cohort, 0.2) == (names[-1],)
    assert external_sites(cohort, 0.0) == ()
    assert set(external_sites(cohort, 0.35)) == set(names[-2:])


def test_split_partitions_are_disjoint(cohort):
    split = compute_split(cohort, EvalConfig(), subsample_seed=0)
    train = set(split.train_rows.tolist())
    test = set(split.internal_test_rows.tolist())
    ext = set(split.external_rows.tolist())
    assert not (train & test) and not (train & ext) and not (test & ext)
    ext_names = set(external_sites(cohort, 0.2))
    assert set(str(s) for s in cohort.site[split.external_rows]) == ext_names
    assert not ext_names & set(str(s) for s in cohort.site[split.train_rows])


def test_split_train_groups_filter(cohort):
    split = compute_split(cohort, EvalConfig(train_groups=("HC",)), subsample_seed=0)
    assert set(str(g) for g in cohort.group[split.train_rows]) == {"HC"}


def test_split_train_size_counts_subjects(cohort):
    split = compute_split(cohort, EvalConfig(train_size=30), subsample_seed=0)
    assert len(set(cohort.subject_id[split.train_rows])) == 30


def test_split_subsample_seed_changes_selection(cohort):
    a = compute_split(cohort, EvalConfig(train_size=30), subsample_seed=0)
    b = compute_split(cohort, EvalConfig(train_size=30), subsample_seed=1)
    assert not np.array_equal(a.train_rows, b.train_rows)
    c = compute_split(cohort, EvalConfig(train_size=30), subsample_seed=0)
    assert np.array_equal(a.train_rows, c.train_rows)


def test_bag_rows_exclude_training_subjects(cohort):
    split = compute_split(cohort, EvalConfig(), subsample_seed=0)
    train_subjects = set(str(s) for s in cohort.subject_id[split.train_rows])
    bag_subjects = set(str(s) for s in cohort.subject_id[split.bag_rows])
    assert not train_subjects & bag_subjects


def test_eval_config_validation_and_round_trip():
    with pytest.raises(InvalidArgumentError):
        EvalConfig(n_folds=1)
    with pytest.raises(InvalidArgumentError):
        EvalConfig(test_fold=5)
    with pytest.raises(InvalidArgumentError):
        EvalConfig(external_site_fraction=1.0)
    with pytest.raises(InvalidArgumentError):
        EvalConfig(train_size=0)
    cfg = EvalConfig(n_folds=4, train_size=100)
    assert eval_config_from_dict(eval_config_to_dict(cfg)) == cfg


# ---------------------------------------------------------------------------
# end-to-end report


@pytest.fixture(scope="module")
def exp_result(cohort):
    return run_experiment(cohort, loss_cfg(), train_cfg(), EvalConfig())


def test_report_metric_fields_populated(exp_result):
    rep = exp_result.report
    assert rep.loss_kind == "exp"
    for value in (rep.mae_internal, rep.mae_external, rep.site_bacc, rep.r2):
        assert value is not None and np.isfinite(value)
    assert 0.0 <= rep.site_bacc <= 1.0
    assert rep.n_train_rows == exp_result.split.train_rows.size


def test_report_challenge_score_recomputes(exp_result):
    rep = exp_result.report
    assert rep.challenge_score == pytest.approx(
        rep.site_bacc**0.3 * rep.mae_external, abs=1e-12
    )
    assert not rep.challenge_degenerate


def test_report_bag_groups_cover_cohort(exp_result, cohort):
    rep = exp_result.report
    present = set(str(g) for g in cohort.group)
    assert set(rep.bag_groups) <= present
    for g, stats in rep.bag_groups.items():
        assert stats["n"] > 0 and np.isfinite(stats["mean"])
    assert rep.auc_hc_vs_ad is not None


def test_report_single_visit_cohort_has_no_slopes(exp_result):
    rep = exp_result.report
    assert rep.longitudinal_slopes == {}
    assert set(rep.omitted_slope_groups) == set(rep.bag_groups)


def test_report_config_echo(exp_result):
    cfgs = exp_result.report.config
    assert cfgs["loss"]["kind"] == "exp"
    assert cfgs["train"]["epochs"] == 3
    assert cfgs["eval"]["n_folds"] == 5


def test_hc_only_cohort_omits_clinical_groups():
    hc_spec = spec(
        seed=3,
        group_fractions={"HC": 1.0, "sMCI": 0.0, "pMCI": 0.0, "AD": 0.0},
    )
    result = run_experiment(generate_cohort(hc_spec), loss_cfg(), train_cfg(), EvalConfig())
    rep = result.report
    assert set(rep.bag_groups) == {"HC"}
    assert set(rep.omitted_bag_groups) == {"sMCI", "pMCI", "AD"}
    assert rep.auc_hc_vs_ad is None


def test_experiment_deterministic(cohort):
    a = run_experiment(cohort, loss_cfg(), train_cfg(seed=5), EvalConfig())
    b = run_experiment(cohort, loss_cfg(), train_cfg(seed=5), EvalConfig())
    assert a.report.to_dict() == b.report.to_dict()
    assert np.array_equal(a.history.losses, b.history.losses)


def test_l1_baseline_reports_metrics(cohort):
    result = run_experiment(cohort, loss_cfg("l1"), train_cfg(), EvalConfig())
    rep = result.report
    assert rep.loss_kind == "l1"
    assert np.isfinite(rep.mae_external) and np.isfinite(rep.site_bacc)


def test_history_to_dict_shape(exp_result):
    payload = history_to_dict(exp_result.history, {"train": {"epochs": 3}})
    assert len(payload["epochs"]) == 3
    assert payload["epochs"][0]["epoch"] == 0
    assert payload["epochs"][2]["lr"] == pytest.approx(1e-4, rel=1e-12)
    assert payload["seed"] == 0
