"""Deterministic mini-batch SGD for a linear (or one-hidden-layer) classifier.

The model maps flattened pixels to K logits, optionally through one ReLU
layer. Training is plain SGD at a fixed learning rate, no momentum or
decay, so SoftMax-vs-weighted-SoftMax comparisons differ only through the
weight matrix. Real and synthetic manifests are mixed by drawing
ceil(blend_ratio * n) synthetic samples and the remainder real.

Everything random is pinned: Glorot-uniform initialization and epoch
shuffling both run off the Lcg64 generator specified in ``seeds`` (seeded
from the config seed via the documented stage-name derivation), so two
runs with identical inputs and config produce byte-identical parameter
dumps.

Parameter files are flat little-endian binary: a 16-byte header
(magic b"RVMP", uint16 version, uint16 hidden units, uint32 input dim,
uint32 K) followed by float64 arrays in order W1, b1[, W2, b2], each
row-major. The training log is CSV with columns epoch,loss,train_mae.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .circular import (
    CircularLabelSpace,
    KernelConfig,
    WeightMatrix,
    bin_to_degrees,
    build_weight_matrix,
    degrees_to_bin,
)
from .errors import DivergenceError, InputError
from .glyph import render_glyph
from .loss import LogitsBatch, softmax, weighted_softmax_gradient, weighted_softmax_loss
from .manifest import DatasetManifest, ManifestRow
from .metrics import median_angular_error
from .seeds import Lcg64, derive_seed

PARAMS_MAGIC = b"RVMP"
PARAMS_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    K: int
    kernel: KernelConfig | None = None
    learning_rate: float = 0.1
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0
    hidden_units: int = 0
    blend_ratio: float = 0.0
    train_size: int | None = None
    image_size: int = 64

    def __post_init__(self):
        if not (self.learning_rate > 0):
            raise InputError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise InputError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise InputError(f"batch_size must be >= 1, got {self.batch_size}")
        if not (0.0 <= self.blend_ratio <= 1.0):
            raise InputError(f"blend_ratio must be in [0, 1], got {self.blend_ratio}")
        if self.hidden_units < 0:
            raise InputError(f"hidden_units must be >= 0, got {self.hidden_units}")


@dataclass
class ModelParams:
    K: int
    input_dim: int
    hidden_units: int
    layers: list[np.ndarray] = field(default_factory=list)
    """[W, b] for the linear model, [W1, b1, W2, b2] with a hidden layer."""


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    train_mae: float


def _glorot_uniform(rng: Lcg64, fan_in: int, fan_out: int) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    flat = np.array([rng.uniform(-bound, bound) for _ in range(fan_in * fan_out)])
    return flat.reshape(fan_in, fan_out)


def init_params(cfg: TrainConfig, input_dim: int) -> ModelParams:
    """Glorot-uniform weights, zero biases, drawn row-major from Lcg64."""
    rng = Lcg64(derive_seed(cfg.seed, "train:init"))
    if cfg.hidden_units > 0:
        layers = [
            _glorot_uniform(rng, input_dim, cfg.hidden_units),
            np.zeros(cfg.hidden_units),
            _glorot_uniform(rng, cfg.hidden_units, cfg.K),
            np.zeros(cfg.K),
        ]
    else:
        layers = [_glorot_uniform(rng, input_dim, cfg.K), np.zeros(cfg.K)]
    return ModelParams(K=cfg.K, input_dim=input_dim, hidden_units=cfg.hidden_units, layers=layers)


def forward(params: ModelParams, X: np.ndarray) -> np.ndarray:
    """Logits for a (N, input_dim) batch."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != params.input_dim:
        raise InputError(
            f"expected features of shape (N, {params.input_dim}), got {X.shape}"
        )
    if params.hidden_units > 0:
        w1, b1, w2, b2 = params.layers
        hidden = np.maximum(X @ w1 + b1, 0.0)
        return hidden @ w2 + b2
    w, b = params.layers
    return X @ w + b


def predict(params: ModelParams, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Probability rows and argmax bins (ties resolve to the lower bin)."""
    probs = softmax(forward(params, X))
    return probs, probs.argmax(axis=1)


def _glyph_theta(row: ManifestRow) -> float | None:
    """Rows store either a glyph angle or an image path in path_or_theta;
    the source tag is provenance, not storage."""
    try:
        return float(row.path_or_theta)
    except ValueError:
        return None


def materialize_features(
    manifest: DatasetManifest | list[ManifestRow], image_size: int
) -> tuple[np.ndarray, np.ndarray]:
    """Flattened pixel matrix and azimuth labels (degrees) for a manifest.

    Glyph-parameterized rows are rasterized on the fly; image-path rows are
    loaded from disk as 8-bit grayscale and must already have the
    configured size.
    """
    rows = list(manifest)
    X = np.empty((len(rows), image_size * image_size))
    theta = np.empty(len(rows))
    for i, row in enumerate(rows):
        glyph_theta = _glyph_theta(row)
        if glyph_theta is not None:
            pixels = render_glyph(glyph_theta, size=image_size, seed=row.seed).pixels
        else:
            with Image.open(row.path_or_theta) as img:
                pixels = np.asarray(img.convert("L"), dtype=float) / 255.0
            if pixels.shape != (image_size, image_size):
                raise InputError(
                    f"sample {row.sample_id}: image shape {pixels.shape} does not "
                    f"match configured size {image_size}"
                )
        X[i] = pixels.reshape(-1)
        theta[i] = row.azimuth_deg
    return X, theta


def _mix_manifests(
    manifest_real: DatasetManifest | None,
    manifest_synth: DatasetManifest | None,
    cfg: TrainConfig,
) -> list[ManifestRow]:
    """Draw ceil(blend * n) synthetic rows and n - that many real rows."""
    real = list(manifest_real) if manifest_real is not None else []
    synth = list(manifest_synth) if manifest_synth is not None else []
    blend = cfg.blend_ratio

    if cfg.train_size is not None:
        n = cfg.train_size
    elif blend == 0.0:
        n = len(real)
    elif blend == 1.0:
        n = len(synth)
    else:
        n = len(real) + len(synth)
        while n > 0:
            m_synth = math.ceil(blend * n)
            if m_synth <= len(synth) and n - m_synth <= len(real):
                break
            n -= 1
    if n < 1:
        raise InputError("combined training set is empty")

    m_synth = math.ceil(blend * n)
    m_real = n - m_synth
    if m_synth > len(synth):
        raise InputError(
            f"synthetic pool has {len(synth)} samples, blend ratio {blend} needs {m_synth}"
        )
    if m_real > len(real):
        raise InputError(
            f"real pool has {len(real)} samples, blend ratio {blend} needs {m_real}"
        )

    picker = Lcg64(derive_seed(cfg.seed, "train:mix"))
    real_idx = list(range(len(real)))
    synth_idx = list(range(len(synth)))
    picker.shuffle(real_idx)
    picker.shuffle(synth_idx)
    return [real[i] for i in real_idx[:m_real]] + [synth[i] for i in synth_idx[:m_synth]]


def _check_finite(value: float, params: ModelParams, epoch: int) -> None:
    if not math.isfinite(value):
        raise DivergenceError(epoch, f"non-finite loss at epoch {epoch}")
    for layer in params.layers:
        if not np.all(np.isfinite(layer)):
            raise DivergenceError(epoch, f"non-finite parameters at epoch {epoch}")


def fit_arrays(
    X: np.ndarray, theta_deg: np.ndarray, cfg: TrainConfig
) -> tuple[ModelParams, list[EpochStats]]:
    """Train on materialized features; the core loop behind ``train``."""
    X = np.asarray(X, dtype=float)
    theta_deg = np.asarray(theta_deg, dtype=float)
    if X.ndim != 2 or X.shape[0] != theta_deg.shape[0]:
        raise InputError("features and labels must have matching first dimension")
    if X.shape[0] == 0:
        raise InputError("training set is empty")

    space = CircularLabelSpace(cfg.K)
    weights = (
        WeightMatrix.identity(cfg.K)
        if cfg.kernel is None
        else build_weight_matrix(space, cfg.kernel)
    )
    labels = np.array([degrees_to_bin(t, space) for t in theta_deg])
    centers = np.array([bin_to_degrees(b, space) for b in range(cfg.K)])

    params = init_params(cfg, X.shape[1])
    shuffler = Lcg64(derive_seed(cfg.seed, "train:shuffle"))
    n = X.shape[0]
    order = list(range(n))
    log: list[EpochStats] = []

    for epoch in range(1, cfg.epochs + 1):
        shuffler.shuffle(order)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            batch_idx = order[start : start + cfg.batch_size]
            xb = X[batch_idx]
            yb = labels[batch_idx]
            m = len(batch_idx)

            if cfg.hidden_units > 0:
                w1, b1, w2, b2 = params.layers
                pre = xb @ w1 + b1
                hid = np.maximum(pre, 0.0)
                logits = hid @ w2 + b2
            else:
                w, b = params.layers
                logits = xb @ w + b

            if not np.all(np.isfinite(logits)):
                raise DivergenceError(epoch, f"non-finite logits at epoch {epoch}")
            batch = LogitsBatch(z=logits, labels=yb)
            loss = weighted_softmax_loss(batch, weights)
            if not math.isfinite(loss.E):
                raise DivergenceError(epoch, f"non-finite loss at epoch {epoch}")
            loss_sum += float(loss.per_example.sum())
            dz = weighted_softmax_gradient(batch, weights) / m

            if cfg.hidden_units > 0:
                dw2 = hid.T @ dz
                db2 = dz.sum(axis=0)
                dhid = (dz @ w2.T) * (pre > 0.0)
                dw1 = xb.T @ dhid
                db1 = dhid.sum(axis=0)
                params.layers[0] = w1 - cfg.learning_rate * dw1
                params.layers[1] = b1 - cfg.learning_rate * db1
                params.layers[2] = w2 - cfg.learning_rate * dw2
                params.layers[3] = b2 - cfg.learning_rate * db2
            else:
                params.layers[0] = w - cfg.learning_rate * (xb.T @ dz)
                params.layers[1] = b - cfg.learning_rate * dz.sum(axis=0)

        epoch_loss = loss_sum / n
        _check_finite(epoch_loss, params, epoch)
        _, pred_bins = predict(params, X)
        train_mae = median_angular_error(centers[pred_bins], theta_deg)
        log.append(EpochStats(epoch=epoch, loss=epoch_loss, train_mae=train_mae))

    return params, log


def train(
    manifest_real: DatasetManifest | None,
    manifest_synth: DatasetManifest | None,
    cfg: TrainConfig,
) -> tuple[ModelParams, list[EpochStats]]:
    """Mix manifests per blend_ratio, materialize pixels, run SGD."""
    rows = _mix_manifests(manifest_real, manifest_synth, cfg)
    X, theta = materialize_features(rows, cfg.image_size)
    return fit_arrays(X, theta, cfg)


def save_params(params: ModelParams, path) -> None:
    header = struct.pack(
        "<4sHHII",
        PARAMS_MAGIC,
        PARAMS_VERSION,
        params.hidden_units,
        params.input_dim,
        params.K,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for layer in params.layers:
            fh.write(np.ascontiguousarray(layer, dtype="<f8").tobytes())


def load_params(path) -> ModelParams:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise InputError(f"parameter file {path} is truncated")
        magic, version, hidden, input_dim, K = struct.unpack("<4sHHII", header)
        if magic != PARAMS_MAGIC:
            raise InputError(f"{path} is not a parameter file (bad magic {magic!r})")
        if version != PARAMS_VERSION:
            raise InputError(f"unsupported parameter file version {version}")
        if hidden > 0:
            shapes = [(input_dim, hidden), (hidden,), (hidden, K), (K,)]
        else:
            shapes = [(input_dim, K), (K,)]
        layers = []
        for shape in shapes:
            count = int(np.prod(shape))
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise InputError(f"parameter file {path} is truncated")
            layers.append(np.frombuffer(raw, dtype="<f8").reshape(shape).copy())
        if fh.read(1):
            raise InputError(f"parameter file {path} has trailing bytes")
    return ModelParams(K=K, input_dim=input_dim, hidden_units=hidden, layers=layers)


def write_training_log(log: list[EpochStats], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("epoch,loss,train_mae\n")
        for entry in log:
            fh.write(f"{entry.epoch},{repr(entry.loss)},{repr(entry.train_mae)}\n")
