"""Unit-sphere embeddings and temperature-scaled cosine similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError


@dataclass(frozen=True)
class SimilarityConfig:
    temperature: float = 0.1

    def __post_init__(self):
        if not np.isfinite(self.temperature) or self.temperature <= 0:
            raise InvalidArgumentError(
                f"temperature must be finite and > 0, got {self.temperature}"
            )


def normalize_rows(matrix) -> np.ndarray:
    """Project each row onto the unit sphere.

    Raises DegenerateInputError naming the first offending row if any row
    has zero norm; there is no silent epsilon floor.
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidArgumentError(f"expected a 2-d matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("matrix contains non-finite entries")
    norms = np.linalg.norm(x, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateInputError(f"row {zero[0]} has zero norm and cannot be normalized")
    return x / norms[:, None]


def normalize_rows_backward(raw, grad_embeddings) -> np.ndarray:
    """Vector-Jacobian product of normalize_rows.

    For z = x/|x| the pullback of a cotangent g is (g - (g.z) z) / |x|.
    """
    x = np.asarray(raw, dtype=np.float64)
    g = np.asarray(grad_embeddings, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    z = x / norms
    return (g - np.sum(g * z, axis=1, keepdims=True) * z) / norms


def validate_embeddings(embeddings, *, atol: float = 1e-9) -> np.ndarray:
    """Check an embedding batch: 2-d, N>=2, d>=2, finite, unit rows."""
    e = np.asarray(embeddings, dtype=np.float64)
    if e.ndim != 2:
        raise InvalidArgumentError(f"embeddings must be 2-d, got shape {e.shape}")
    n, d = e.shape
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 embeddings, got {n}")
    if d < 2:
        raise InvalidArgumentError(f"embedding dimension must be >= 2, got {d}")
    if not np.all(np.isfinite(e)):
        raise InvalidArgumentError("embeddings contain non-finite entries")
    norms = np.linalg.norm(e, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > atol)
    if bad.size:
        raise InvalidArgumentError(
            f"row {bad[0]} has norm {norms[bad[0]]!r}, expected 1 within {atol}"
        )
    return e


def similarity_matrix(embeddings, cfg: SimilarityConfig) -> np.ndarray:
    """Pairwise cosine similarities divided by temperature.

    Returns a dense symmetric matrix; the diagonal holds self-similarity
    (1/temperature) and is excluded from anchor sets by the losses.
    """
    e = validate_embeddings(embeddings)
    s = e @ e.T
    # enforce exact symmetry against float non-associativity
    s = (s + s.T) / 2.0
    return s / cfg.temperature
