"""Small fully connected encoder with hand-written backpropagation.

The trunk is input -> hidden ... -> output with a rectifier between
layers and a linear final layer. Contrastive models project the trunk
output onto the unit sphere; the supervised baseline instead attaches a
scalar regression head on top of the trunk output, and that trunk output
doubles as the representation fed to probes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .similarity import normalize_rows, normalize_rows_backward

DEFAULT_HIDDEN = (64, 64)
DEFAULT_OUTPUT_DIM = 32
CHECKPOINT_VERSION = 1


@dataclass
class EncoderParams:
    weights: list  # per-layer (in_dim, out_dim) float64 matrices
    biases: list  # per-layer (out_dim,) vectors
    head_weight: np.ndarray | None = None  # (output_dim,) scalar head, baseline only
    head_bias: np.ndarray | None = None  # shape (1,)
    normalize_output: bool = True

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    def param_dict(self) -> dict:
        """Name -> array views; optimizers update these in place."""
        out = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"w{i}"] = w
            out[f"b{i}"] = b
        if self.head_weight is not None:
            out["head_w"] = self.head_weight
            out["head_b"] = self.head_bias
        return out

    def copy(self) -> "EncoderParams":
        return EncoderParams(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            head_weight=None if self.head_weight is None else self.head_weight.copy(),
            head_bias=None if self.head_bias is None else self.head_bias.copy(),
            normalize_output=self.normalize_output,
        )


def init_encoder(
    input_dim: int,
    output_dim: int = DEFAULT_OUTPUT_DIM,
    hidden=DEFAULT_HIDDEN,
    *,
    with_head: bool = False,
    seed=0,
) -> EncoderParams:
    """He-style seeded initialization: W ~ N(0, 2/fan_in), zero biases."""
    if input_dim < 1 or output_dim < 1 or any(h < 1 for h in hidden):
        raise InvalidArgumentError("layer sizes must be positive")
    rng = np.random.default_rng(seed)
    sizes = [int(input_dim), *[int(h) for h in hidden], int(output_dim)]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    head_w = head_b = None
    if with_head:
        head_w = rng.standard_normal(output_dim) * np.sqrt(2.0 / output_dim)
        head_b = np.zeros(1)
    return EncoderParams(
        weights=weights,
        biases=biases,
        head_weight=head_w,
        head_bias=head_b,
        normalize_output=not with_head,
    )


def _check_inputs(params: EncoderParams, inputs) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidArgumentError(f"inputs must be 2-d, got shape {x.shape}")
    if x.shape[1] != params.input_dim:
        raise InvalidArgumentError(
            f"input dim mismatch: encoder expects {params.input_dim}, got {x.shape[1]}"
        )
    return x


def _trunk_forward(params: EncoderParams, x: np.ndarray):
    layer_inputs = [x]
    preacts = []
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        a = h @ w + b
        if i < last:
            preacts.append(a)
            h = np.maximum(a, 0.0)
            layer_inputs.append(h)
        else:
            h = a
    return h, {"layer_inputs": layer_inputs, "preacts": preacts}


def _trunk_backward(params: EncoderParams, caches, grad_out: np.ndarray) -> dict:
    grads = {}
    g = grad_out
    last = len(params.weights) - 1
    for i in range(last, -1, -1):
        grads[f"w{i}"] = caches["layer_inputs"][i].T @ g
        grads[f"b{i}"] = g.sum(axis=0)
        if i > 0:
            g = (g @ params.weights[i].T) * (caches["preacts"][i - 1] > 0.0)
    return grads


def encoder_forward(params: EncoderParams, inputs, return_caches: bool = False):
    """Map inputs to representations.

    Returns unit-norm embeddings when normalize_output is set, otherwise
    the raw trunk output (the baseline's probe representation).
    """
    x = _check_inputs(params, inputs)
    trunk_out, caches = _trunk_forward(params, x)
    if params.normalize_output:
        out = normalize_rows(trunk_out)
    else:
        out = trunk_out
    if return_caches:
        caches["trunk_out"] = trunk_out
        return out, caches
    return out


def encoder_backward(params: EncoderParams, caches, grad_repr) -> dict:
    """Parameter gradients from a cotangent on the representation."""
    g = np.asarray(grad_repr, dtype=np.float64)
    if params.normalize_output:
        g = normalize_rows_backward(caches["trunk_out"], g)
    return _trunk_backward(params, caches, g)


def head_forward(params: EncoderParams, inputs, return_caches: bool = False):
    """Scalar predictions of the baseline head on the trunk output."""
    if params.head_weight is None:
        raise InvalidArgumentError("encoder has no regression head")
    x = _check_inputs(params, inputs)
    trunk_out, caches = _trunk_forward(params, x)
    preds = trunk_out @ params.head_weight + params.head_bias[0]
    if return_caches:
        caches["trunk_out"] = trunk_out
        return preds, caches
    return preds


def head_backward(params: EncoderParams, caches, grad_preds) -> dict:
    g = np.asarray(grad_preds, dtype=np.float64)
    trunk_out = caches["trunk_out"]
    grads = _trunk_backward(params, caches, g[:, None] * params.head_weight[None, :])
    grads["head_w"] = trunk_out.T @ g
    grads["head_b"] = np.array([g.sum()])
    return grads


# ---------------------------------------------------------------------------
# checkpoint io: versioned structured-text dump, byte-stable for a fixed seed


def checkpoint_dict(params: EncoderParams, *, loss_config=None, train_config=None, seed=None, extra=None) -> dict:
    return {
        "format_version": CHECKPOINT_VERSION,
        "encoder": {
            "normalize_output": params.normalize_output,
            "layers": [
                {"weight": w.tolist(), "bias": b.tolist()}
                for w, b in zip(params.weights, params.biases)
            ],
            "head": None
            if params.head_weight is None
            else {"weight": params.head_weight.tolist(), "bias": params.head_bias.tolist()},
        },
        "loss_config": loss_config,
        "train_config": train_config,
        "seed": seed,
        "extra": extra or {},
    }


def params_from_checkpoint_dict(d: dict) -> EncoderParams:
    if d.get("format_version") != CHECKPOINT_VERSION:
        raise InvalidArgumentError(
            f"unsupported checkpoint format_version: {d.get('format_version')!r}"
        )
    enc = d["encoder"]
    head = enc.get("head")
    return EncoderParams(
        weights=[np.array(layer["weight"], dtype=np.float64) for layer in enc["layers"]],
        biases=[np.array(layer["bias"], dtype=np.float64) for layer in enc["layers"]],
        head_weight=None if head is None else np.array(head["weight"], dtype=np.float64),
        head_bias=None if head is None else np.array(head["bias"], dtype=np.float64),
        normalize_output=bool(enc["normalize_output"]),
    )


def save_checkpoint(path, params: EncoderParams, **meta) -> None:
    payload = checkpoint_dict(params, **meta)
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def load_checkpoint(path) -> dict:
    d = json.loads(Path(path).read_text())
    d["params"] = params_from_checkpoint_dict(d)
    return d
