"""Contrastive losses over kernel-weighted label neighborhoods.

Every batch loss returns its scalar value together with the analytic
gradient with respect to the embedding matrix. Gradients flow through the
similarity computation only; kernel weights are functions of the labels
and are treated as constants.

Conventions shared by all batch losses:
  * each batch element serves as the anchor exactly once, no augmented views;
  * the anchor set A(i) is the rest of the batch, self-similarity excluded;
  * softmax-style denominators are evaluated with max-subtraction in
    float64 so extreme temperatures cannot overflow;
  * anchors whose kernel weights sum below WEIGHT_SUM_FLOOR are skipped,
    and a batch where every anchor is skipped raises DegenerateBatchError.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBatchError, InvalidArgumentError
from .kernels import KernelSpec, weights_for_anchor
from .similarity import (
    SimilarityConfig,
    normalize_rows,
    normalize_rows_backward,
    similarity_matrix,
    validate_embeddings,
)

INFONCE = "infonce"
YAWARE = "yaware"
THRESHOLD = "threshold"
EXP = "exp"
L1 = "l1"

CONTRASTIVE_KINDS = (INFONCE, YAWARE, THRESHOLD, EXP)
LOSS_KINDS = CONTRASTIVE_KINDS + (L1,)
KERNEL_KINDS = (YAWARE, THRESHOLD, EXP)

# anchors with less total neighbor weight than this are skipped
WEIGHT_SUM_FLOOR = 1e-12
# cap on the per-term normalizer w_k / sum of strictly smaller weights
NORMALIZER_CAP = 1e6


class NormalizerCapWarning(RuntimeWarning):
    """Emitted when the strict-lesser normalizer of a term hits the cap."""


@dataclass(frozen=True)
class LossConfig:
    kind: str = YAWARE
    kernel: KernelSpec | None = field(default_factory=KernelSpec)
    similarity: SimilarityConfig = field(default_factory=SimilarityConfig)
    include_positive_in_denominator: bool = False

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise InvalidArgumentError(f"unknown loss kind: {self.kind!r}")
        if self.kind in KERNEL_KINDS and self.kernel is None:
            raise InvalidArgumentError(f"loss kind {self.kind!r} requires a kernel spec")


@dataclass
class LossResult:
    """Scalar loss, gradient, and per-anchor bookkeeping.

    value is the mean of per_anchor over the anchors marked in
    anchor_active; skipped anchors carry a zero placeholder entry.
    """

    value: float
    gradient: np.ndarray
    per_anchor: np.ndarray
    anchor_active: np.ndarray


def loss_config_to_dict(cfg: LossConfig) -> dict:
    return {
        "kind": cfg.kind,
        "kernel": None
        if cfg.kernel is None
        else {"family": cfg.kernel.family, "sigma": cfg.kernel.sigma},
        "similarity": {"temperature": cfg.similarity.temperature},
        "include_positive_in_denominator": cfg.include_positive_in_denominator,
    }


def loss_config_from_dict(d: dict) -> LossConfig:
    if "kernel" in d:
        kernel = d["kernel"]
        kernel = None if kernel is None else KernelSpec(**kernel)
    else:
        # Absent key means "use the default kernel"; an explicit null means
        # "no kernel", which only the label-agnostic kinds accept.
        kernel = KernelSpec()
    return LossConfig(
        kind=d["kind"],
        kernel=kernel,
        similarity=SimilarityConfig(**d.get("similarity", {})),
        include_positive_in_denominator=bool(d.get("include_positive_in_denominator", False)),
    )


def _check_labels(labels, n: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != (n,):
        raise InvalidArgumentError(f"labels must have shape ({n},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise InvalidArgumentError("labels contain non-finite entries")
    return y


# ---------------------------------------------------------------------------
# per-anchor terms
#
# Each helper takes the anchor's weight vector w and similarity vector s over
# A(i) (both length N-1) and returns the anchor's loss value plus its
# gradient with respect to s.


def anchor_infonce(w: np.ndarray, s: np.ndarray) -> tuple[float, np.ndarray]:
    """-mean over positives k of log( e^{s_k} / (e^{s_k} + sum_neg e^{s_t}) ).

    Weights must be binary; the denominator always includes the positive.
    """
    pos = w > 0.5
    neg = ~pos
    npos = int(pos.sum())
    sp = s[pos]
    sn = s[neg]
    m = np.maximum(sp, np.max(sn))
    neg_mass = np.sum(np.exp(sn[None, :] - m[:, None]), axis=1)
    log_d = m + np.log(np.exp(sp - m) + neg_mass)
    value = float(np.sum(log_d - sp) / npos)
    grad = np.zeros_like(s)
    grad[pos] = (np.exp(sp - log_d) - 1.0) / npos
    grad[neg] = np.sum(np.exp(sn[None, :] - log_d[:, None]), axis=0) / npos
    return value, grad


def anchor_yaware(w: np.ndarray, s: np.ndarray) -> tuple[float, np.ndarray]:
    """-sum_k (w_k / sum_t w_t) log( e^{s_k} / sum_t e^{s_t} ), sums over A(i)."""
    coef = w / w.sum()
    m = np.max(s)
    log_z = m + np.log(np.sum(np.exp(s - m)))
    value = float(log_z - coef @ s)
    grad = np.exp(s - log_z) - coef
    return value, grad


def anchor_threshold(
    w: np.ndarray, s: np.ndarray, include_positive: bool
) -> tuple[float, np.ndarray, int]:
    """Degree-of-positivity ranking term.

    For each k the denominator runs over samples with strictly smaller
    weight, and the term is normalized by the same strict-lesser weight
    sum. Ties are excluded on both sides. A term whose strict-lesser set
    is empty is skipped entirely, including when the positive itself is
    flagged into the denominator. Returns the number of capped terms.
    """
    m = w.size
    lesser = w[None, :] < w[:, None]  # lesser[k, t]: w_t strictly below w_k
    valid = lesser.any(axis=1)
    if not valid.any():
        return 0.0, np.zeros_like(s), 0
    lesser_mass = np.where(lesser, w[None, :], 0.0).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(valid, w / lesser_mass, 0.0)
    over = valid & (coef > NORMALIZER_CAP)
    coef = np.where(over, NORMALIZER_CAP, coef)
    support = lesser.copy()
    if include_positive:
        np.fill_diagonal(support, True)
        support &= valid[:, None]
    row_max = np.where(valid, np.max(np.where(support, s[None, :], -np.inf), axis=1), 0.0)
    p = np.where(support, np.exp(s[None, :] - row_max[:, None]), 0.0)
    mass = p.sum(axis=1)
    log_d = row_max + np.log(np.where(valid, mass, 1.0))
    value = float(np.sum(coef * np.where(valid, log_d - s, 0.0)))
    p_norm = p / np.where(valid, mass, 1.0)[:, None]
    grad = p_norm.T @ coef - coef
    return value, grad, int(np.count_nonzero(over))


def anchor_exp(
    w: np.ndarray, s: np.ndarray, include_positive: bool
) -> tuple[float, np.ndarray]:
    """Weight-attenuated denominator term.

    -(1 / sum_t w_t) sum_k w_k log( e^{s_k} / sum_{t != k} e^{s_t (1 - w_t)} ),
    optionally adding e^{s_k} itself to the denominator. Terms whose
    denominator support is empty (batch of two without the flag) are
    skipped.
    """
    m = w.size
    coef = w / w.sum()
    attenuated = s * (1.0 - w)
    x = np.tile(attenuated, (m, 1))
    if include_positive:
        np.fill_diagonal(x, s)
        support = np.ones((m, m), dtype=bool)
    else:
        np.fill_diagonal(x, -np.inf)
        support = ~np.eye(m, dtype=bool)
    row_max = np.max(x, axis=1)
    valid = np.isfinite(row_max)
    row_max = np.where(valid, row_max, 0.0)
    p = np.where(support, np.exp(x - row_max[:, None]), 0.0)
    mass = p.sum(axis=1)
    log_d = row_max + np.log(np.where(valid, mass, 1.0))
    c_eff = np.where(valid, coef, 0.0)
    value = float(np.sum(c_eff * np.where(valid, log_d - s, 0.0)))
    p_norm = p / np.where(valid, mass, 1.0)[:, None]
    diag = np.diag(p_norm).copy()
    off = p_norm.copy()
    np.fill_diagonal(off, 0.0)
    grad = (off.T @ c_eff) * (1.0 - w) - c_eff
    if include_positive:
        grad = grad + c_eff * diag
    return value, grad


# ---------------------------------------------------------------------------
# batch losses


def _batch_contrastive(kind: str, embeddings, labels, cfg: LossConfig) -> LossResult:
    e = validate_embeddings(embeddings)
    n = e.shape[0]
    y = _check_labels(labels, n)
    sims = similarity_matrix(e, cfg.similarity)
    grad_s = np.zeros((n, n))
    per_anchor = np.zeros(n)
    active = np.zeros(n, dtype=bool)
    capped_terms = 0
    others = np.arange(n)
    for i in range(n):
        idx = np.delete(others, i)
        s = sims[i, idx]
        if kind == INFONCE:
            w = (y[idx] == y[i]).astype(np.float64)
            if not ((w > 0.5).any() and (w < 0.5).any()):
                continue
            value, g = anchor_infonce(w, s)
        else:
            w = weights_for_anchor(y[i], y[idx], cfg.kernel)
            if w.sum() < WEIGHT_SUM_FLOOR:
                continue
            if kind == YAWARE:
                value, g = anchor_yaware(w, s)
            elif kind == THRESHOLD:
                value, g, capped = anchor_threshold(
                    w, s, cfg.include_positive_in_denominator
                )
                capped_terms += capped
            elif kind == EXP:
                value, g = anchor_exp(w, s, cfg.include_positive_in_denominator)
            else:
                raise InvalidArgumentError(f"not a contrastive loss kind: {kind!r}")
        per_anchor[i] = value
        active[i] = True
        grad_s[i, idx] = g
    if capped_terms:
        warnings.warn(
            f"threshold loss capped {capped_terms} normalizer(s) at {NORMALIZER_CAP:g}",
            NormalizerCapWarning,
            stacklevel=3,
        )
    if not active.any():
        raise DegenerateBatchError(f"every anchor in the batch was skipped ({kind})")
    n_active = int(active.sum())
    value = float(per_anchor[active].mean())
    g_bar = grad_s / n_active
    grad_e = (g_bar + g_bar.T) @ e / cfg.similarity.temperature
    return LossResult(value, grad_e, per_anchor, active)


def infonce_loss(embeddings, labels, cfg: LossConfig) -> LossResult:
    """Discrete-positive contrastive loss; positives share the anchor's exact label.

    Anchors without at least one positive and one negative are skipped.
    """
    return _batch_contrastive(INFONCE, embeddings, labels, cfg)


def yaware_loss(embeddings, labels, cfg: LossConfig) -> LossResult:
    return _batch_contrastive(YAWARE, embeddings, labels, cfg)


def threshold_loss(embeddings, labels, cfg: LossConfig) -> LossResult:
    return _batch_contrastive(THRESHOLD, embeddings, labels, cfg)


def exp_loss(embeddings, labels, cfg: LossConfig) -> LossResult:
    return _batch_contrastive(EXP, embeddings, labels, cfg)


_BATCH_FNS = {
    INFONCE: infonce_loss,
    YAWARE: yaware_loss,
    THRESHOLD: threshold_loss,
    EXP: exp_loss,
}


def batch_loss(embeddings, labels, cfg: LossConfig) -> LossResult:
    """Dispatch to the contrastive loss named by cfg.kind."""
    if cfg.kind not in _BATCH_FNS:
        raise InvalidArgumentError(f"unknown contrastive loss kind: {cfg.kind!r}")
    return _BATCH_FNS[cfg.kind](embeddings, labels, cfg)


def l1_regression_loss(predictions, labels) -> LossResult:
    """Mean absolute error with its subgradient (zero at zero residual)."""
    pred = np.asarray(predictions, dtype=np.float64)
    if pred.ndim != 1 or pred.size == 0:
        raise InvalidArgumentError(f"predictions must be a non-empty vector, got {pred.shape}")
    if not np.all(np.isfinite(pred)):
        raise InvalidArgumentError("predictions contain non-finite entries")
    y = _check_labels(labels, pred.size)
    residual = pred - y
    per = np.abs(residual)
    return LossResult(
        value=float(per.mean()),
        gradient=np.sign(residual) / pred.size,
        per_anchor=per,
        anchor_active=np.ones(pred.size, dtype=bool),
    )


# ---------------------------------------------------------------------------
# finite-difference verification


def loss_gradient_check(kind: str, batch, labels, cfg: LossConfig | None = None, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    For contrastive kinds the batch holds pre-normalization embeddings and
    the perturbation is applied before row normalization, so the analytic
    side is pulled back through the normalization Jacobian. For the L1 kind
    the batch holds raw predictions. Relative error per coordinate is
    |analytic - numeric| / max(1, |numeric|).
    """
    x = np.array(batch, dtype=np.float64)
    if kind == L1:
        analytic = l1_regression_loss(x, labels).gradient

        def value_at(v):
            return l1_regression_loss(v, labels).value

    else:
        if cfg is None:
            raise InvalidArgumentError("contrastive gradient check needs a LossConfig")
        e = normalize_rows(x)
        result = batch_loss(e, labels, cfg)
        analytic = normalize_rows_backward(x, result.gradient)

        def value_at(v):
            return batch_loss(normalize_rows(v), labels, cfg).value

    flat = x.ravel()
    numeric = np.zeros_like(flat)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NormalizerCapWarning)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            up = value_at(x)
            flat[j] = orig - h
            down = value_at(x)
            flat[j] = orig
            numeric[j] = (up - down) / (2.0 * h)
    numeric = numeric.reshape(x.shape)
    rel = np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))
    return float(rel.max())
