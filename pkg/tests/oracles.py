"""Brute-force reference implementations used to freeze expected values.

Everything here is written with explicit Python loops and naive exp/log
arithmetic, sharing no code with the package internals. Slow and simple
on purpose: these are the independent oracles the fast implementations
are checked against.
"""

import math

import numpy as np


def brute_weights(anchor_label, labels, sigma):
    return [math.exp(-((anchor_label - y) ** 2) / (2.0 * sigma**2)) for y in labels]


def brute_similarity(embeddings, tau):
    e = np.asarray(embeddings, dtype=np.float64)
    n = e.shape[0]
    s = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            s[i, j] = float(np.dot(e[i], e[j])) / tau
    return s


def _active_mean(per_anchor, active):
    terms = [v for v, a in zip(per_anchor, active) if a]
    if not terms:
        raise ValueError("all anchors skipped")
    return sum(terms) / len(terms)


def brute_infonce(embeddings, labels, tau):
    """Mean anchor loss with exact-label-tie positives, Eq.-style direct sums."""
    s = brute_similarity(embeddings, tau)
    n = len(labels)
    per_anchor, active = [], []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        pos = [j for j in others if labels[j] == labels[i]]
        neg = [j for j in others if labels[j] != labels[i]]
        if not pos or not neg:
            per_anchor.append(0.0)
            active.append(False)
            continue
        total = 0.0
        for k in pos:
            denom = math.exp(s[i, k]) + sum(math.exp(s[i, t]) for t in neg)
            total += -math.log(math.exp(s[i, k]) / denom)
        per_anchor.append(total / len(pos))
        active.append(True)
    return _active_mean(per_anchor, active)


def brute_yaware(embeddings, labels, sigma, tau):
    s = brute_similarity(embeddings, tau)
    n = len(labels)
    per_anchor, active = [], []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        w = {j: brute_weights(labels[i], [labels[j]], sigma)[0] for j in others}
        wsum = sum(w.values())
        if wsum < 1e-12:
            per_anchor.append(0.0)
            active.append(False)
            continue
        denom = sum(math.exp(s[i, t]) for t in others)
        total = 0.0
        for k in others:
            total += -(w[k] / wsum) * math.log(math.exp(s[i, k]) / denom)
        per_anchor.append(total)
        active.append(True)
    return _active_mean(per_anchor, active)


def brute_threshold(embeddings, labels, sigma, tau, include_positive=False):
    s = brute_similarity(embeddings, tau)
    n = len(labels)
    per_anchor, active = [], []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        w = {j: brute_weights(labels[i], [labels[j]], sigma)[0] for j in others}
        wsum = sum(w.values())
        if wsum < 1e-12:
            per_anchor.append(0.0)
            active.append(False)
            continue
        total = 0.0
        for k in others:
            lesser = [t for t in others if w[t] < w[k]]
            if not lesser:
                continue
            norm = sum(w[t] for t in lesser)
            multiplier = min(w[k] / norm, 1e6)  # documented cap on the normalizer
            denom = sum(math.exp(s[i, t]) for t in lesser)
            if include_positive:
                denom += math.exp(s[i, k])
            total += -multiplier * math.log(math.exp(s[i, k]) / denom)
        per_anchor.append(total)
        active.append(True)
    return _active_mean(per_anchor, active)


def brute_exp(embeddings, labels, sigma, tau, include_positive=False):
    s = brute_similarity(embeddings, tau)
    n = len(labels)
    per_anchor, active = [], []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        w = {j: brute_weights(labels[i], [labels[j]], sigma)[0] for j in others}
        wsum = sum(w.values())
        if wsum < 1e-12:
            per_anchor.append(0.0)
            active.append(False)
            continue
        total = 0.0
        for k in others:
            denom = sum(math.exp(s[i, t] * (1.0 - w[t])) for t in others if t != k)
            if include_positive:
                denom += math.exp(s[i, k])
            total += -(w[k] / wsum) * math.log(math.exp(s[i, k]) / denom)
        per_anchor.append(total)
        active.append(True)
    return _active_mean(per_anchor, active)


def brute_auc(scores, labels):
    """Pair-counting AUC with half credit for tied scores."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def brute_balanced_accuracy(y_true, y_pred):
    recalls = []
    for cls in sorted(set(y_true)):
        idx = [i for i, y in enumerate(y_true) if y == cls]
        hit = sum(1 for i in idx if y_pred[i] == cls)
        recalls.append(hit / len(idx))
    return sum(recalls) / len(recalls)


def brute_ridge_1d(x, y, lam):
    """Centered one-feature ridge: slope and intercept."""
    xm = sum(x) / len(x)
    ym = sum(y) / len(y)
    xc = [v - xm for v in x]
    yc = [v - ym for v in y]
    slope = sum(a * b for a, b in zip(xc, yc)) / (sum(a * a for a in xc) + lam)
    return slope, ym - slope * xm
