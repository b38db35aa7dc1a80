from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from ..imaging import GrayImage, to_input_tensor
from ..labels import N_CLASSES, ClassLabel
from .model import DEFAULT_LAYERS, CnnModel
from .optim import AdamState, adam_step

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 25
    steps_per_epoch: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        for name in ("epochs", "steps_per_epoch", "batch_size"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")


@dataclass
class EpochStats:
    epoch: int
    mean_loss: float
    train_accuracy: float
    holdout_accuracy: float | None = None


@dataclass
class TrainHistory:
    initial_loss: float = float("nan")
    epochs: list = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "mean_loss", "train_accuracy", "holdout_accuracy"])
            for e in self.epochs:
                hold = "" if e.holdout_accuracy is None else f"{e.holdout_accuracy:.6f}"
                w.writerow([e.epoch, f"{e.mean_loss:.6f}", f"{e.train_accuracy:.6f}", hold])


def as_batch(images, dtype=np.float32) -> np.ndarray:
    """Stack images into an (N, H, W, 1) float tensor in [0, 1].

    Accepts a list of GrayImage, a uint8 array (N, H, W) or an already scaled
    float array (N, H, W, 1).
    """
    if isinstance(images, np.ndarray):
        if images.dtype == np.uint8:
            return (images.astype(dtype) / 255.0)[..., None] if images.ndim == 3 else images.astype(dtype) / 255.0
        return images.astype(dtype, copy=False) if images.ndim == 4 else images[..., None].astype(dtype)
    return np.stack([to_input_tensor(img, dtype) for img in images])


class _BatchCycler:
    """Walks a seeded permutation of the data, reshuffling on every pass."""

    def __init__(self, n, batch_size, rng):
        self.n = n
        self.batch_size = batch_size
        self.rng = rng
        self.perm = rng.permutation(n)
        self.cursor = 0

    def next(self):
        out = []
        need = self.batch_size
        while need:
            take = self.perm[self.cursor:self.cursor + need]
            out.append(take)
            need -= len(take)
            self.cursor += len(take)
            if self.cursor >= self.n:
                self.perm = self.rng.permutation(self.n)
                self.cursor = 0
        return np.concatenate(out)


def train(images, labels, cfg: TrainConfig = None, layers=DEFAULT_LAYERS, holdout=None,
          dtype=np.float32, callback=None):
    """Train a heading classifier from scratch.

    ``images`` is anything :func:`as_batch` accepts, ``labels`` the class
    indices. ``holdout`` is an optional (images, labels) pair scored after
    every epoch. Returns (model, history). Given the same inputs and seed
    the resulting parameters are bit-identical.
    """
    cfg = cfg or TrainConfig()
    y = np.asarray([int(v) for v in labels], dtype=np.intp)
    if isinstance(images, np.ndarray) and images.dtype == np.uint8:
        pixels = images if images.ndim == 3 else images[..., 0]
    else:
        pixels = np.rint(as_batch(images, np.float64)[..., 0] * 255).astype(np.uint8)
    n = len(y)
    if n == 0 or len(pixels) != n:
        raise ValueError("images and labels must be nonempty and of equal length")
    counts = np.bincount(y, minlength=N_CLASSES)
    missing = [ClassLabel(i).name for i in range(N_CLASSES) if counts[i] == 0]
    if missing:
        raise ValueError(f"training set has no samples for class(es) {', '.join(missing)}")
    if cfg.batch_size > n:
        raise ValueError(f"batch_size {cfg.batch_size} exceeds dataset size {n}")

    input_shape = pixels.shape[1:] + (1,)
    model = CnnModel.initialize(layers, input_shape, seed=cfg.seed, dtype=dtype)
    opt = AdamState(lr=cfg.learning_rate)
    cycler = _BatchCycler(n, cfg.batch_size, np.random.default_rng(cfg.seed))
    history = TrainHistory()
    hold_x = hold_y = None
    if holdout is not None:
        hold_x = as_batch(holdout[0], dtype)
        hold_y = np.asarray([int(v) for v in holdout[1]], dtype=np.intp)

    for epoch in range(1, cfg.epochs + 1):
        losses = []
        correct = 0
        for step in range(cfg.steps_per_epoch):
            idx = cycler.next()
            xb = pixels[idx].astype(dtype)[..., None] / 255.0
            loss, probs, grads = model.loss_and_grads(xb, y[idx])
            if epoch == 1 and step == 0:
                history.initial_loss = loss
            losses.append(loss)
            correct += int((probs.argmax(axis=1) == y[idx]).sum())
            adam_step(model.params, grads, opt)
        stats = EpochStats(epoch, float(np.mean(losses)), correct / (cfg.steps_per_epoch * cfg.batch_size))
        if hold_x is not None and len(hold_y):
            pred = model.predict_proba(hold_x).argmax(axis=1)
            stats.holdout_accuracy = float((pred == hold_y).mean())
        history.epochs.append(stats)
        log.info("epoch %d/%d loss %.4f train acc %.3f holdout acc %s", epoch, cfg.epochs,
                 stats.mean_loss, stats.train_accuracy, stats.holdout_accuracy)
        if callback is not None:
            callback(stats)
    return model, history


def predict(model: CnnModel, img: GrayImage):
    """Classify one image; returns (ClassLabel, probabilities)."""
    if img.data.shape != model.input_shape[:2]:
        raise ValueError(f"expected a {model.input_shape[1]}x{model.input_shape[0]} image, "
                         f"got {img.width}x{img.height}")
    x = (img.data.astype(model.dtype) / 255.0)[None, :, :, None]
    probs = model.forward(x)[1][0]
    return ClassLabel(int(np.argmax(probs))), probs
