"""Dense feed-forward network engine in double precision.

Hand-rolled forward pass, analytic backpropagation, and Adam updates over
numpy arrays, plus a bit-exact checkpoint format (JSON manifest + raw
little-endian weights blob). Everything is deterministic given a seed.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EnerfitError
from .rng import SplitMix64

CHECKPOINT_FORMAT_VERSION = 1
BCE_CLIP = 1e-12


class ShapeMismatchError(EnerfitError):
    code = "ShapeMismatch"


class EmptyDatasetError(EnerfitError):
    code = "EmptyDataset"


class VersionMismatchError(EnerfitError):
    code = "VersionMismatch"


class CorruptWeightsError(EnerfitError):
    code = "CorruptWeights"


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    layer_sizes: tuple[int, ...]
    output_dim: int
    output_head: str  # "sigmoid" | "linear"

    def __post_init__(self):
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input_dim and output_dim must be positive")
        if not self.layer_sizes or any(s < 1 for s in self.layer_sizes):
            raise ValueError("layer_sizes must be a non-empty tuple of positive ints")
        if self.output_head not in ("sigmoid", "linear"):
            raise ValueError(f"unknown output head {self.output_head!r}")

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes)

    def dims(self) -> list[tuple[int, int]]:
        widths = [self.input_dim, *self.layer_sizes, self.output_dim]
        return list(zip(widths[:-1], widths[1:]))

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "n_layers": self.n_layers,
            "layer_sizes": list(self.layer_sizes),
            "output_dim": self.output_dim,
            "activation": "ReLU",
            "output_head": self.output_head,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MlpConfig":
        return cls(
            input_dim=data["input_dim"],
            layer_sizes=tuple(data["layer_sizes"]),
            output_dim=data["output_dim"],
            output_head=data["output_head"],
        )


@dataclass
class MlpModel:
    config: MlpConfig
    weights: list[np.ndarray]  # per layer, shape (fan_in, fan_out)
    biases: list[np.ndarray]  # per layer, shape (fan_out,)

    def copy(self) -> "MlpModel":
        return MlpModel(
            config=self.config,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


def init_model(config: MlpConfig, seed: int) -> MlpModel:
    """Kaiming-style uniform init: W ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)),
    biases zero, drawn layer by layer from one splitmix64 stream."""
    stream = SplitMix64(seed)
    weights: list[np.ndarray] = []
    biases: list[np.ndarray] = []
    for fan_in, fan_out in config.dims():
        bound = math.sqrt(6.0 / fan_in)
        draws = stream.next_floats(fan_in * fan_out)
        weights.append((draws * (2.0 * bound) - bound).reshape(fan_in, fan_out))
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return MlpModel(config=config, weights=weights, biases=biases)


def _check_inputs(model: MlpModel, inputs: np.ndarray) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.config.input_dim:
        raise ShapeMismatchError(
            f"expected inputs of width {model.config.input_dim}, got shape {x.shape}"
        )
    return x


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_cached(model: MlpModel, x: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Returns (pre_activations per layer, activations per layer incl. input)."""
    activations = [x]
    pre: list[np.ndarray] = []
    h = x
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        pre.append(z)
        if i < last:
            h = np.maximum(z, 0.0)
        elif model.config.output_head == "sigmoid":
            h = _sigmoid(z)
        else:
            h = z
        activations.append(h)
    return pre, activations


def forward(model: MlpModel, inputs: np.ndarray) -> np.ndarray:
    """Batch forward pass: affine+ReLU hidden layers, sigmoid or identity head."""
    x = _check_inputs(model, inputs)
    _, activations = _forward_cached(model, x)
    return activations[-1]


def loss(outputs: np.ndarray, targets: np.ndarray, kind: str) -> float:
    """Mean loss over all elements: binary cross-entropy or squared error."""
    p = np.asarray(outputs, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if p.shape != y.shape:
        raise ShapeMismatchError(f"outputs {p.shape} vs targets {y.shape}")
    if kind == "bce":
        clipped = np.clip(p, BCE_CLIP, 1.0 - BCE_CLIP)
        return float(-np.mean(y * np.log(clipped) + (1.0 - y) * np.log(1.0 - clipped)))
    if kind == "mse":
        return float(np.mean((p - y) ** 2))
    raise ValueError(f"unknown loss kind {kind!r}")


def gradients(
    model: MlpModel, inputs: np.ndarray, targets: np.ndarray, kind: str
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Analytic gradient of the mean loss w.r.t. every weight and bias.

    ReLU subgradient at 0 is taken as 0. For the sigmoid head with BCE the
    output delta collapses to (p - y) / count, which is exact and stable.
    """
    x = _check_inputs(model, inputs)
    y = np.asarray(targets, dtype=np.float64)
    pre, activations = _forward_cached(model, x)
    p = activations[-1]
    if p.shape != y.shape:
        raise ShapeMismatchError(f"outputs {p.shape} vs targets {y.shape}")
    count = p.size
    head = model.config.output_head
    if kind == "bce":
        if head == "sigmoid":
            delta = (p - y) / count
        else:
            clipped = np.clip(p, BCE_CLIP, 1.0 - BCE_CLIP)
            delta = (clipped - y) / (clipped * (1.0 - clipped)) / count
    elif kind == "mse":
        delta = 2.0 * (p - y) / count
        if head == "sigmoid":
            delta = delta * p * (1.0 - p)
    else:
        raise ValueError(f"unknown loss kind {kind!r}")

    weight_grads: list[np.ndarray] = [np.empty(0)] * len(model.weights)
    bias_grads: list[np.ndarray] = [np.empty(0)] * len(model.biases)
    for i in range(len(model.weights) - 1, -1, -1):
        weight_grads[i] = activations[i].T @ delta
        bias_grads[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (pre[i - 1] > 0.0)
    return weight_grads, bias_grads


@dataclass
class AdamState:
    """First/second moment accumulators with the standard Adam defaults."""

    m_weights: list[np.ndarray]
    v_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_biases: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_model(cls, model: MlpModel) -> "AdamState":
        return cls(
            m_weights=[np.zeros_like(w) for w in model.weights],
            v_weights=[np.zeros_like(w) for w in model.weights],
            m_biases=[np.zeros_like(b) for b in model.biases],
            v_biases=[np.zeros_like(b) for b in model.biases],
        )


def adam_step(
    model: MlpModel,
    grads: tuple[list[np.ndarray], list[np.ndarray]],
    state: AdamState,
    lr: float,
) -> tuple[MlpModel, AdamState]:
    """One Adam update with bias correction, in place; returns (model, state)."""
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    weight_grads, bias_grads = grads
    state.t += 1
    correct1 = 1.0 - state.beta1**state.t
    correct2 = 1.0 - state.beta2**state.t
    for params, gs, ms, vs in (
        (model.weights, weight_grads, state.m_weights, state.v_weights),
        (model.biases, bias_grads, state.m_biases, state.v_biases),
    ):
        for i, g in enumerate(gs):
            ms[i] *= state.beta1
            ms[i] += (1.0 - state.beta1) * g
            vs[i] *= state.beta2
            vs[i] += (1.0 - state.beta2) * (g * g)
            m_hat = ms[i] / correct1
            v_hat = vs[i] / correct2
            params[i] -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return model, state


def train_epoch(
    model: MlpModel,
    state: AdamState,
    inputs: np.ndarray,
    targets: np.ndarray,
    batch_size: int,
    lr: float,
    kind: str,
    shuffle_seed: int,
) -> float:
    """One pass over the data in shuffled mini-batches; returns the mean of
    the per-batch losses (computed before each update)."""
    x = _check_inputs(model, inputs)
    y = np.asarray(targets, dtype=np.float64)
    if len(x) == 0:
        raise EmptyDatasetError("cannot train on an empty dataset")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    order = list(range(len(x)))
    SplitMix64(shuffle_seed).shuffle(order)
    idx = np.array(order)
    batch_losses: list[float] = []
    for start in range(0, len(x), batch_size):
        rows = idx[start : start + batch_size]
        bx, by = x[rows], y[rows]
        outputs = forward(model, bx)
        batch_losses.append(loss(outputs, by, kind))
        adam_step(model, gradients(model, bx, by, kind), state, lr)
    return float(np.mean(batch_losses))


@dataclass
class Checkpoint:
    model: MlpModel
    manifest: dict


def _weights_blob(model: MlpModel) -> bytes:
    tensors: list[np.ndarray] = []
    for w, b in zip(model.weights, model.biases):
        tensors.append(w)
        tensors.append(b)
    parts = [struct.pack("<I", len(tensors))]
    for t in tensors:
        parts.append(struct.pack("<I", t.ndim))
        parts.append(struct.pack(f"<{t.ndim}I", *t.shape))
    for t in tensors:
        parts.append(np.ascontiguousarray(t, dtype="<f8").tobytes())
    return b"".join(parts)


def _parse_blob(blob: bytes) -> list[np.ndarray]:
    try:
        offset = 0
        (n_tensors,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        shapes: list[tuple[int, ...]] = []
        for _ in range(n_tensors):
            (ndim,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            shape = struct.unpack_from(f"<{ndim}I", blob, offset)
            offset += 4 * ndim
            shapes.append(shape)
        tensors: list[np.ndarray] = []
        for shape in shapes:
            n = int(np.prod(shape)) if shape else 1
            end = offset + 8 * n
            if end > len(blob):
                raise CorruptWeightsError("weights blob shorter than its shape table declares")
            tensors.append(np.frombuffer(blob[offset:end], dtype="<f8").reshape(shape).copy())
            offset = end
        if offset != len(blob):
            raise CorruptWeightsError("trailing bytes after declared tensors")
        return tensors
    except struct.error as exc:
        raise CorruptWeightsError(f"truncated weights blob: {exc}")


def save_checkpoint(model: MlpModel, manifest: dict, path: Path | str) -> Checkpoint:
    """Persist a checkpoint directory {manifest.json, weights.bin}."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    full_manifest = dict(manifest)
    full_manifest["format_version"] = CHECKPOINT_FORMAT_VERSION
    full_manifest["config"] = model.config.to_dict()
    (directory / "manifest.json").write_text(
        json.dumps(full_manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (directory / "weights.bin").write_bytes(_weights_blob(model))
    return Checkpoint(model=model, manifest=full_manifest)


def load_checkpoint(path: Path | str) -> Checkpoint:
    """Load and validate a checkpoint; round-trips parameters bit-for-bit."""
    directory = Path(path)
    manifest_path = directory / "manifest.json"
    weights_path = directory / "weights.bin"
    if not manifest_path.is_file() or not weights_path.is_file():
        raise EnerfitError(f"no checkpoint at {directory}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    version = manifest.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise VersionMismatchError(
            f"checkpoint format version {version} not supported (expected {CHECKPOINT_FORMAT_VERSION})"
        )
    config = MlpConfig.from_dict(manifest["config"])
    tensors = _parse_blob(weights_path.read_bytes())
    dims = config.dims()
    if len(tensors) != 2 * len(dims):
        raise CorruptWeightsError(
            f"expected {2 * len(dims)} tensors for the declared architecture, got {len(tensors)}"
        )
    weights: list[np.ndarray] = []
    biases: list[np.ndarray] = []
    for i, (fan_in, fan_out) in enumerate(dims):
        w, b = tensors[2 * i], tensors[2 * i + 1]
        if w.shape != (fan_in, fan_out) or b.shape != (fan_out,):
            raise CorruptWeightsError(
                f"layer {i} shape mismatch: weights {w.shape}, biases {b.shape}"
            )
        weights.append(w)
        biases.append(b)
    model = MlpModel(config=config, weights=weights, biases=biases)
    return Checkpoint(model=model, manifest=manifest)
