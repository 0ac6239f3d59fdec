"""Frozen-representation evaluation: readouts, probes, and clinical analogs."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .cohort import GROUPS, Cohort
from .encoder import EncoderParams, encoder_backward, encoder_forward
from .errors import (
    IllConditionedError,
    InvalidArgumentError,
    InvalidFoldError,
    UndefinedMetricError,
)
from .training import AdamState, TrainConfig, adam_step, lr_at_epoch


class DegenerateScoreWarning(RuntimeWarning):
    """A score input sat on a boundary where the formula degenerates."""


# ---------------------------------------------------------------------------
# age readout


@dataclass
class RidgeReadout:
    weights: np.ndarray
    intercept: float
    lam: float
    feature_mean: np.ndarray


def fit_ridge_readout(embeddings, ages, lam: float = 1.0) -> RidgeReadout:
    """Closed-form ridge regression of age on frozen representations.

    Features and targets are centered first so the intercept is not
    penalized. lam = 0 falls back to ordinary least squares and raises
    IllConditionedError on a rank-deficient design.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    y = np.asarray(ages, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0] or y.ndim != 1:
        raise InvalidArgumentError("embeddings must be (n, d) aligned with ages (n,)")
    if x.shape[0] < 2:
        raise InvalidArgumentError("need at least 2 rows to fit a readout")
    if lam < 0:
        raise InvalidArgumentError("lam must be >= 0")
    mu = x.mean(axis=0)
    xc = x - mu
    yc = y - y.mean()
    gram = xc.T @ xc + lam * np.eye(x.shape[1])
    if lam == 0 and np.linalg.matrix_rank(gram) < x.shape[1]:
        raise IllConditionedError("singular design with lam = 0; use lam > 0")
    try:
        w = np.linalg.solve(gram, xc.T @ yc)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(str(exc)) from exc
    return RidgeReadout(weights=w, intercept=float(y.mean()), lam=lam, feature_mean=mu)


def predict_age(readout: RidgeReadout, embeddings) -> np.ndarray:
    x = np.asarray(embeddings, dtype=np.float64)
    return (x - readout.feature_mean) @ readout.weights + readout.intercept


def mae(predictions, targets) -> float:
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape or p.size == 0:
        raise InvalidArgumentError("predictions and targets must be equal-length and non-empty")
    return float(np.mean(np.abs(p - t)))


def r_squared(predictions, targets) -> float:
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape or p.size == 0:
        raise InvalidArgumentError("predictions and targets must be equal-length and non-empty")
    ss_tot = np.sum((t - t.mean()) ** 2)
    if ss_tot == 0:
        raise UndefinedMetricError("R^2 undefined: targets have zero variance")
    return float(1.0 - np.sum((t - p) ** 2) / ss_tot)


# ---------------------------------------------------------------------------
# site probe


def balanced_accuracy(true_labels, pred_labels) -> float:
    """Unweighted mean of per-class recall."""
    t = np.asarray(true_labels)
    p = np.asarray(pred_labels)
    if t.shape != p.shape or t.size == 0:
        raise InvalidArgumentError("label arrays must be equal-length and non-empty")
    recalls = []
    for cls in np.unique(t):
        m = t == cls
        recalls.append(np.mean(p[m] == cls))
    return float(np.mean(recalls))


def _softmax_rows(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _fit_multinomial_logistic(x, y_idx, n_classes, l2=1e-4, max_iter=500, tol=1e-6, lr=0.1):
    """Full-batch first-order fit of a softmax classifier.

    Fixed hyperparameters by contract: L2 penalty 1e-4 on the weights
    (intercepts unpenalized), at most 500 iterations, stop when the loss
    improves by less than 1e-6.
    """
    n, d = x.shape
    w = np.zeros((d, n_classes))
    b = np.zeros(n_classes)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_idx] = 1.0
    m_w = np.zeros_like(w)
    v_w = np.zeros_like(w)
    m_b = np.zeros_like(b)
    v_b = np.zeros_like(b)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    prev = np.inf
    for t in range(1, max_iter + 1):
        probs = _softmax_rows(x @ w + b)
        loss = -np.mean(np.sum(onehot * np.log(np.maximum(probs, 1e-300)), axis=1))
        loss += 0.5 * l2 * np.sum(w * w)
        if abs(prev - loss) < tol:
            break
        prev = loss
        g = (probs - onehot) / n
        g_w = x.T @ g + l2 * w
        g_b = g.sum(axis=0)
        m_w = beta1 * m_w + (1 - beta1) * g_w
        v_w = beta2 * v_w + (1 - beta2) * g_w * g_w
        m_b = beta1 * m_b + (1 - beta1) * g_b
        v_b = beta2 * v_b + (1 - beta2) * g_b * g_b
        w -= lr * (m_w / (1 - beta1**t)) / (np.sqrt(v_w / (1 - beta2**t)) + eps)
        b -= lr * (m_b / (1 - beta1**t)) / (np.sqrt(v_b / (1 - beta2**t)) + eps)
    return w, b


def probe_folds(labels, n_folds: int, seed: int = 0) -> np.ndarray:
    """Per-class round-robin fold assignment for the probe's cross-validation."""
    labels = np.asarray(labels)
    if n_folds < 2:
        raise InvalidFoldError("need at least 2 probe folds")
    rng = np.random.default_rng(seed)
    fold = np.full(labels.size, -1, dtype=np.int64)
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        idx = rng.permutation(idx)
        fold[idx] = (np.arange(idx.size) + int(rng.integers(n_folds))) % n_folds
    return fold


def site_probe_bacc(embeddings, site_labels, folds=3, seed: int = 0) -> float:
    """Cross-validated balanced accuracy of a site classifier on frozen embeddings.

    folds is either a fold count or an explicit per-row fold id array.
    Every class must appear in the training split of every fold; otherwise
    InvalidFoldError is raised.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(site_labels)
    if x.ndim != 2 or x.shape[0] != labels.size:
        raise InvalidArgumentError("embeddings must be (n, d) aligned with site labels")
    classes = np.unique(labels)
    if classes.size < 2:
        raise InvalidArgumentError("need at least 2 sites to probe")
    y_idx = np.searchsorted(classes, labels)
    if np.isscalar(folds):
        fold = probe_folds(labels, int(folds), seed)
    else:
        fold = np.asarray(folds, dtype=np.int64)
        if fold.shape != (x.shape[0],):
            raise InvalidArgumentError("explicit folds must be one id per row")
    baccs = []
    for f in np.unique(fold):
        train = fold != f
        test = ~train
        if not test.any():
            continue
        train_classes = np.unique(y_idx[train])
        if train_classes.size != classes.size:
            missing = sorted(set(range(classes.size)) - set(train_classes))
            raise InvalidFoldError(
                f"site {classes[missing[0]]!r} absent from the training split of fold {f}"
            )
        w, b = _fit_multinomial_logistic(x[train], y_idx[train], classes.size)
        pred = np.argmax(x[test] @ w + b, axis=1)
        baccs.append(balanced_accuracy(y_idx[test], pred))
    if not baccs:
        raise InvalidFoldError("no usable probe folds")
    return float(np.mean(baccs))


# ---------------------------------------------------------------------------
# challenge score


def challenge_score(bacc: float, mae_ext: float) -> float:
    """bacc ** 0.3 * mae_ext; lower is better.

    bacc must be a fraction in [0, 1]; percentages are rejected. bacc = 0
    degenerates the power term, returns 0.0 and warns.
    """
    if not np.isfinite(bacc) or not np.isfinite(mae_ext):
        raise InvalidArgumentError("inputs must be finite")
    if bacc < 0 or bacc > 1:
        raise InvalidArgumentError(f"bacc must be a fraction in [0, 1], got {bacc}")
    if mae_ext < 0:
        raise InvalidArgumentError(f"mae_ext must be >= 0, got {mae_ext}")
    if bacc == 0:
        warnings.warn(
            "challenge score degenerates at bacc = 0; returning 0",
            DegenerateScoreWarning,
            stacklevel=2,
        )
        return 0.0
    return float(bacc**0.3 * mae_ext)


# ---------------------------------------------------------------------------
# brain-age gap analysis


@dataclass
class BagRecord:
    subject_id: str
    visit_time: float
    group: str
    predicted_age: float
    chronological_age: float
    bag: float


def bag_records(readout: RidgeReadout, embeddings, cohort: Cohort) -> list:
    """Predicted minus chronological age per row; no bias correction.

    The readout is expected to have been fitted on healthy training rows
    only; this function just applies it.
    """
    preds = predict_age(readout, embeddings)
    if preds.size != cohort.n_rows:
        raise InvalidArgumentError("embeddings must align with cohort rows")
    return [
        BagRecord(
            subject_id=str(cohort.subject_id[i]),
            visit_time=float(cohort.visit_time[i]),
            group=str(cohort.group[i]),
            predicted_age=float(preds[i]),
            chronological_age=float(cohort.age[i]),
            bag=float(preds[i] - cohort.age[i]),
        )
        for i in range(cohort.n_rows)
    ]


def group_bag_stats(records) -> dict:
    """Group -> (mean, std, count) over bag values; absent groups omitted."""
    out = {}
    for g in GROUPS:
        vals = np.array([r.bag for r in records if r.group == g])
        if vals.size:
            out[g] = (float(vals.mean()), float(vals.std()), int(vals.size))
    return out


def roc_auc(scores, labels) -> float:
    """Rank-based AUC (Mann-Whitney); tied scores count one half."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.size == 0:
        raise InvalidArgumentError("scores and labels must be equal-length and non-empty")
    uniq = np.unique(y)
    if not np.all(np.isin(uniq, (0, 1))):
        raise InvalidArgumentError("labels must be binary 0/1")
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC undefined with a single class")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(s.size, dtype=np.float64)
    sorted_scores = s[order]
    i = 0
    while i < s.size:
        j = i
        while j + 1 < s.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_sum = float(np.sum(ranks[y == 1]))
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def longitudinal_bag_slopes(records, min_visits: int = 3) -> dict:
    """Mean per-subject OLS slope of bag against visit time, by group.

    Subjects need at least min_visits visits at distinct times to
    contribute; groups with no qualifying subject are omitted.
    """
    if min_visits < 2:
        raise InvalidArgumentError("min_visits must be >= 2")
    by_subject = {}
    for r in records:
        by_subject.setdefault(r.subject_id, []).append(r)
    slopes = {}
    for sid, rows in by_subject.items():
        times = np.array([r.visit_time for r in rows])
        if times.size < min_visits or np.unique(times).size < 2:
            continue
        bags = np.array([r.bag for r in rows])
        slope = np.polyfit(times, bags, 1)[0]
        slopes.setdefault(rows[0].group, []).append(float(slope))
    return {g: float(np.mean(v)) for g, v in slopes.items()}


# ---------------------------------------------------------------------------
# downstream transfer


def finetune_classifier(
    params: EncoderParams,
    cohort: Cohort,
    train_cfg: TrainConfig,
    *,
    positive_group: str = "AD",
    negative_group: str = "HC",
    test_fraction: float = 0.25,
    head_only: bool = False,
    seed: int = 0,
) -> float:
    """Fine-tune the encoder plus a logistic head on a binary diagnosis task.

    Splits rows stratified by class, trains with cross-entropy under the
    same optimizer contract as pretraining, and returns balanced accuracy
    on the held-out split.
    """
    mask = (cohort.group == positive_group) | (cohort.group == negative_group)
    sub = cohort.select(mask)
    y = (sub.group == positive_group).astype(np.float64)
    if sub.n_rows < 4 or y.sum() == 0 or y.sum() == y.size:
        raise InvalidArgumentError("need both classes present to fine-tune")
    rng = np.random.default_rng(seed)
    test = np.zeros(sub.n_rows, dtype=bool)
    for cls in (0.0, 1.0):
        idx = rng.permutation(np.flatnonzero(y == cls))
        n_test = max(1, int(round(test_fraction * idx.size)))
        test[idx[:n_test]] = True
    if not (y[~test].sum() and (1 - y[~test]).sum() and y[test].sum() and (1 - y[test]).sum()):
        raise InvalidArgumentError("both classes must appear in train and test splits")
    work = params.copy()
    d = work.output_dim
    head_w = rng.standard_normal(d) * np.sqrt(2.0 / d)
    head_b = np.zeros(1)
    x_train, y_train = sub.features[~test], y[~test]
    pdict = {"clf_w": head_w, "clf_b": head_b}
    if not head_only:
        pdict.update(work.param_dict())
    state = AdamState(pdict)
    n = x_train.shape[0]
    for epoch in range(train_cfg.epochs):
        lr = lr_at_epoch(train_cfg, epoch)
        order = rng.permutation(n)
        for start in range(0, n, train_cfg.batch_size):
            idx = order[start : start + train_cfg.batch_size]
            xb, yb = x_train[idx], y_train[idx]
            emb, caches = encoder_forward(work, xb, return_caches=True)
            logits = emb @ head_w + head_b[0]
            prob = 1.0 / (1.0 + np.exp(-logits))
            g_logits = (prob - yb) / yb.size
            grads = {"clf_w": emb.T @ g_logits, "clf_b": np.array([g_logits.sum()])}
            if not head_only:
                grads.update(encoder_backward(work, caches, g_logits[:, None] * head_w[None, :]))
            adam_step(pdict, grads, state, lr, train_cfg)
    emb_test = encoder_forward(work, sub.features[test])
    pred = (emb_test @ head_w + head_b[0]) > 0
    return balanced_accuracy(y[test].astype(int), pred.astype(int))


def mae_accuracy_correlation(runs) -> tuple:
    """Pearson r and OLS slope of downstream accuracy against negated MAE.

    runs is a sequence of (mae, accuracy) pairs from matched experiments.
    """
    arr = np.asarray(runs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise InvalidArgumentError("need at least three (mae, accuracy) pairs")
    x = -arr[:, 0]
    y = arr[:, 1]
    sx = x.std()
    sy = y.std()
    if sx == 0 or sy == 0:
        raise UndefinedMetricError("correlation undefined with zero variance")
    r = float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy))
    slope = float(np.polyfit(x, y, 1)[0])
    return r, slope
