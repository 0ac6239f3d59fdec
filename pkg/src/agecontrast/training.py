"""Optimizer and training loop for the encoder."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .encoder import (
    EncoderParams,
    encoder_backward,
    encoder_forward,
    head_backward,
    head_forward,
    init_encoder,
)
from .errors import InvalidArgumentError, TrainingDivergedError
from .losses import CONTRASTIVE_KINDS, L1, LossConfig, batch_loss, l1_regression_loss


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    batch_size: int = 32
    initial_lr: float = 1e-4
    lr_decay: float = 0.9
    lr_decay_every: int = 10
    weight_decay: float = 5e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    hidden: tuple = (64, 64)
    embedding_dim: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise InvalidArgumentError("epochs must be >= 0")
        if self.batch_size < 2:
            raise InvalidArgumentError("batch_size must be >= 2")
        if not (0 < self.initial_lr and np.isfinite(self.initial_lr)):
            raise InvalidArgumentError("initial_lr must be positive and finite")
        if not (0 < self.lr_decay <= 1):
            raise InvalidArgumentError("lr_decay must be in (0, 1]")
        if self.lr_decay_every < 1:
            raise InvalidArgumentError("lr_decay_every must be >= 1")
        if self.weight_decay < 0:
            raise InvalidArgumentError("weight_decay must be >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidArgumentError("betas must lie in [0, 1)")
        if self.eps <= 0:
            raise InvalidArgumentError("eps must be > 0")
        if self.embedding_dim < 2:
            raise InvalidArgumentError("embedding_dim must be >= 2")


def train_config_to_dict(cfg: TrainConfig) -> dict:
    d = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    d["hidden"] = list(cfg.hidden)
    return d


def train_config_from_dict(d: dict) -> TrainConfig:
    d = dict(d)
    if "hidden" in d:
        d["hidden"] = tuple(d["hidden"])
    return TrainConfig(**d)


def lr_at_epoch(cfg: TrainConfig, epoch: int) -> float:
    """Stepped decay: initial_lr * lr_decay ** floor(epoch / lr_decay_every)."""
    if epoch < 0:
        raise InvalidArgumentError("epoch must be >= 0")
    return cfg.initial_lr * cfg.lr_decay ** (epoch // cfg.lr_decay_every)


class AdamState:
    """First and second moment accumulators keyed like the parameter dict."""

    def __init__(self, params: dict):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0


def adam_step(params: dict, grads: dict, state: AdamState, lr: float, cfg: TrainConfig) -> None:
    """One Adam update with decoupled weight decay, in place.

    The shrinkage param <- param * (1 - lr * weight_decay) is applied
    before the moment update, so a zero gradient still decays weights.
    """
    for g in grads.values():
        if not np.all(np.isfinite(g)):
            raise TrainingDivergedError("non-finite gradient encountered")
    state.t += 1
    b1, b2 = cfg.beta1, cfg.beta2
    bias1 = 1.0 - b1**state.t
    bias2 = 1.0 - b2**state.t
    for k, p in params.items():
        g = grads[k]
        if cfg.weight_decay:
            p *= 1.0 - lr * cfg.weight_decay
        m = state.m[k]
        v = state.v[k]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / bias1) / (np.sqrt(v / bias2) + cfg.eps)


@dataclass
class TrainHistory:
    losses: np.ndarray  # mean batch loss per epoch
    lrs: np.ndarray  # learning rate in effect per epoch
    wall_times: np.ndarray  # seconds per epoch; excluded from file output
    params: EncoderParams
    seed: int


def fit_encoder(
    features,
    labels,
    loss_cfg: LossConfig,
    train_cfg: TrainConfig,
) -> TrainHistory:
    """Train the encoder on (features, labels) rows with shuffled mini-batches.

    Contrastive kinds drop a trailing incomplete mini-batch; the L1
    baseline keeps it. Everything downstream of the seed is deterministic.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise InvalidArgumentError("features must be 2-d and aligned with labels")
    n = x.shape[0]
    contrastive = loss_cfg.kind in CONTRASTIVE_KINDS
    if contrastive and n < train_cfg.batch_size:
        raise InvalidArgumentError(
            f"contrastive training needs at least one full batch "
            f"({train_cfg.batch_size} rows), got {n}"
        )
    init_ss, shuffle_ss = np.random.SeedSequence(train_cfg.seed).spawn(2)
    params = init_encoder(
        x.shape[1],
        output_dim=train_cfg.embedding_dim,
        hidden=train_cfg.hidden,
        with_head=loss_cfg.kind == L1,
        seed=init_ss,
    )
    rng = np.random.default_rng(shuffle_ss)
    pdict = params.param_dict()
    state = AdamState(pdict)
    losses, lrs, times = [], [], []
    for epoch in range(train_cfg.epochs):
        t0 = time.perf_counter()
        lr = lr_at_epoch(train_cfg, epoch)
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, train_cfg.batch_size):
            idx = order[start : start + train_cfg.batch_size]
            if contrastive and idx.size < train_cfg.batch_size:
                break
            xb, yb = x[idx], y[idx]
            if contrastive:
                emb, caches = encoder_forward(params, xb, return_caches=True)
                # finite entries can still overflow the squared norm
                norms = np.linalg.norm(caches["trunk_out"], axis=1)
                if not np.all(np.isfinite(norms)):
                    raise TrainingDivergedError(
                        f"activations became non-finite at epoch {epoch}"
                    )
                res = batch_loss(emb, yb, loss_cfg)
                grads = encoder_backward(params, caches, res.gradient)
            else:
                preds, caches = head_forward(params, xb, return_caches=True)
                if not np.all(np.isfinite(preds)):
                    raise TrainingDivergedError(
                        f"predictions became non-finite at epoch {epoch}"
                    )
                res = l1_regression_loss(preds, yb)
                grads = head_backward(params, caches, res.gradient)
            if not np.isfinite(res.value):
                raise TrainingDivergedError(f"loss became non-finite at epoch {epoch}")
            adam_step(pdict, grads, state, lr, train_cfg)
            batch_losses.append(res.value)
        if not batch_losses:
            raise InvalidArgumentError("no usable mini-batch in an epoch")
        losses.append(float(np.mean(batch_losses)))
        lrs.append(lr)
        times.append(time.perf_counter() - t0)
    return TrainHistory(
        losses=np.array(losses),
        lrs=np.array(lrs),
        wall_times=np.array(times),
        params=params,
        seed=train_cfg.seed,
    )
