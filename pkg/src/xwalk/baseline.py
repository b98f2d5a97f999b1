"""Image preprocessing contract and a small reference classifier.

The preprocessing pipeline (bilinear resize to 256x256, 224x224 crop with
mirroring at train time, center crop at inference) is shared with any
downstream model.  The reference classifier itself is a regularized
logistic regression over a 32x32 grayscale downsample of the crop: just
enough capacity to separate the procedural scenes and exercise the full
pipeline end to end.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from .annotate import Sample
from .errors import BadImage, DegenerateTrainingSet
from .seeding import derive_seed

RESIZE_TO = 256
CROP_SIZE = 224
MIRROR_PROB = 0.5
CENTER_OFFSET = (RESIZE_TO - CROP_SIZE) // 2  # 16
FEATURE_GRID = 32
FEATURE_BLOCK = CROP_SIZE // FEATURE_GRID  # 7
N_FEATURES = FEATURE_GRID * FEATURE_GRID

MODEL_MAGIC = b"XWBL"
MODEL_VERSION = 1


@dataclass
class TrainConfig:
    steps: int = 500
    learning_rate: float = 0.1
    l2: float = 1e-3
    seed: int = 0


@dataclass
class BaselineModel:
    weights: np.ndarray  # 1024 feature weights + bias
    seed: int = 0
    config: Optional[TrainConfig] = None

    def __post_init__(self):
        if self.weights.shape != (N_FEATURES + 1,):
            raise ValueError(f"expected {N_FEATURES + 1} weights, got {self.weights.shape}")


def decode_image(data) -> np.ndarray:
    """Decode image bytes (or load a path) into an RGB uint8 array."""
    try:
        if isinstance(data, (str, Path)):
            img = Image.open(data)
        else:
            img = Image.open(io.BytesIO(data))
        return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise BadImage(f"undecodable image: {exc}") from exc


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel-center coordinate mapping."""
    in_h, in_w = img.shape[:2]
    if (in_h, in_w) == (out_h, out_w):
        return img.astype(np.float32)
    ys = (np.arange(out_h) + 0.5) * in_h / out_h - 0.5
    xs = (np.arange(out_w) + 0.5) * in_w / out_w - 0.5
    y0 = np.clip(np.floor(ys).astype(int), 0, in_h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, in_w - 1)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = np.clip(ys - y0, 0.0, 1.0)[:, None, None]
    wx = np.clip(xs - x0, 0.0, 1.0)[None, :, None]
    img = img.astype(np.float32)
    top = img[y0][:, x0] * (1 - wx) + img[y0][:, x1] * wx
    bottom = img[y1][:, x0] * (1 - wx) + img[y1][:, x1] * wx
    return top * (1 - wy) + bottom * wy


def preprocess_train(image: np.ndarray, seed: int) -> np.ndarray:
    """Training-path tensor: resize, seeded random crop, seeded mirror."""
    resized = bilinear_resize(image, RESIZE_TO, RESIZE_TO)
    rng = np.random.default_rng(seed)
    max_offset = RESIZE_TO - CROP_SIZE
    ox = int(rng.integers(0, max_offset + 1))
    oy = int(rng.integers(0, max_offset + 1))
    crop = resized[oy : oy + CROP_SIZE, ox : ox + CROP_SIZE]
    if rng.random() < MIRROR_PROB:
        crop = crop[:, ::-1]
    return np.ascontiguousarray(crop)


def preprocess_infer(image: np.ndarray) -> np.ndarray:
    """Inference-path tensor: resize then centered crop."""
    resized = bilinear_resize(image, RESIZE_TO, RESIZE_TO)
    return np.ascontiguousarray(
        resized[CENTER_OFFSET : CENTER_OFFSET + CROP_SIZE,
                CENTER_OFFSET : CENTER_OFFSET + CROP_SIZE]
    )


def features(tensor: np.ndarray) -> np.ndarray:
    """32x32 grayscale block means of a 224x224 crop, scaled to [0, 1]."""
    gray = tensor @ np.array([0.299, 0.587, 0.114], dtype=np.float32)
    blocks = gray.reshape(FEATURE_GRID, FEATURE_BLOCK, FEATURE_GRID, FEATURE_BLOCK)
    return (blocks.mean(axis=(1, 3)) / 255.0).ravel().astype(np.float64)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def objective(w: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean logistic loss plus L2 on the feature weights (bias excluded)."""
    z = X @ w
    # log(1 + exp(-yz)) computed stably via logaddexp
    margins = np.where(y > 0, z, -z)
    loss = np.mean(np.logaddexp(0.0, -margins))
    return float(loss + 0.5 * l2 * np.dot(w[:-1], w[:-1]))


def gradient(w: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> np.ndarray:
    z = X @ w
    p = _sigmoid(z)
    g = X.T @ (p - y) / len(y)
    reg = l2 * w
    reg[-1] = 0.0
    return g + reg


def _design_matrix(feats: List[np.ndarray]) -> np.ndarray:
    X = np.vstack(feats)
    return np.hstack([X, np.ones((len(feats), 1))])


def train_on_features(
    feats: List[np.ndarray], labels: List[int], config: TrainConfig
) -> Tuple[BaselineModel, dict]:
    if len(set(labels)) < 2:
        raise DegenerateTrainingSet("training split contains a single class")
    X = _design_matrix(feats)
    y = np.asarray(labels, dtype=np.float64)
    # Standardize features for conditioning, then fold the affine transform
    # back into raw-feature weights so the persisted model stays a plain
    # 1024 + 1 weight vector.
    mu = X[:, :-1].mean(axis=0)
    sigma = np.maximum(X[:, :-1].std(axis=0), 1e-6)
    Xs = X.copy()
    Xs[:, :-1] = (X[:, :-1] - mu) / sigma
    w = np.zeros(X.shape[1], dtype=np.float64)
    loss_init = objective(w, Xs, y, config.l2)
    for _ in range(config.steps):
        w -= config.learning_rate * gradient(w, Xs, y, config.l2)
    loss_final = objective(w, Xs, y, config.l2)
    raw = np.empty_like(w)
    raw[:-1] = w[:-1] / sigma
    raw[-1] = w[-1] - np.dot(w[:-1], mu / sigma)
    model = BaselineModel(weights=raw, seed=config.seed, config=config)
    return model, {"loss_init": loss_init, "loss_final": loss_final}


def train_baseline(
    samples: List[Sample], images_root, config: TrainConfig
) -> Tuple[BaselineModel, dict]:
    """Train the reference classifier on the given (already selected) samples."""
    root = Path(images_root)
    feats = []
    labels = []
    for s in samples:
        img = decode_image(root / s.image_ref)
        crop = preprocess_train(img, derive_seed(config.seed, "crop", s.sample_id))
        feats.append(features(crop))
        labels.append(1 if s.label.value == "positive" else 0)
    if not feats:
        raise DegenerateTrainingSet("empty training selection")
    return train_on_features(feats, labels, config)


def predict(model: BaselineModel, image: np.ndarray) -> Tuple[float, float]:
    """Class probabilities (positive, negative); they sum to 1."""
    x = np.append(features(preprocess_infer(image)), 1.0)
    prob_pos = float(_sigmoid(np.array([x @ model.weights]))[0])
    return prob_pos, 1.0 - prob_pos


def save_model(model: BaselineModel, path) -> None:
    """Binary blob: magic, version, weight count, seed, float64 weights."""
    payload = struct.pack(
        "<4sIIQ", MODEL_MAGIC, MODEL_VERSION, len(model.weights), model.seed
    ) + model.weights.astype("<f8").tobytes()
    Path(path).write_bytes(payload)


def load_model(path) -> BaselineModel:
    data = Path(path).read_bytes()
    header_size = struct.calcsize("<4sIIQ")
    if len(data) < header_size:
        raise ValueError("model file too short")
    magic, version, count, seed = struct.unpack("<4sIIQ", data[:header_size])
    if magic != MODEL_MAGIC:
        raise ValueError("bad model magic")
    if version != MODEL_VERSION:
        raise ValueError(f"unsupported model version {version}")
    weights = np.frombuffer(data[header_size:], dtype="<f8")
    if len(weights) != count:
        raise ValueError("weight count mismatch")
    return BaselineModel(weights=np.array(weights), seed=seed)
