"""Stratified splitting, confusion matrices, accuracy and evaluation reports."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .labels import N_CLASSES, ClassLabel
from .sim.flight import as_classifier


def split_dataset(items, ratio: float = 0.9, seed: int = 0, labels=None):
    """Seeded stratified split into (train, holdout).

    ``labels`` gives the class of each item; by default it is read from the
    item's ``label`` attribute or, for tuples, its last element. Each class
    contributes round(ratio * class size) items to the train side.
    """
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    items = list(items)
    if labels is None:
        labels = [getattr(it, "label", None) if not isinstance(it, tuple) else it[-1] for it in items]
    labels = [int(lab) for lab in labels]
    if len(labels) != len(items):
        raise ValueError("one label per item is required")
    rng = np.random.default_rng(seed)
    train_idx, hold_idx = [], []
    for cls in sorted(set(labels)):
        idx = np.flatnonzero(np.asarray(labels) == cls)
        idx = idx[rng.permutation(idx.size)]
        n_train = int(round(ratio * idx.size))
        train_idx.extend(idx[:n_train].tolist())
        hold_idx.extend(idx[n_train:].tolist())
    train_idx.sort()
    hold_idx.sort()
    return [items[i] for i in train_idx], [items[i] for i in hold_idx]


@dataclass
class ConfusionMatrix:
    """Counts with rows = actual class and columns = predicted class."""

    counts: np.ndarray = field(default_factory=lambda: np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64))

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (N_CLASSES, N_CLASSES) or np.any(c < 0):
            raise ValueError(f"counts must be a non-negative {N_CLASSES}x{N_CLASSES} array")
        self.counts = c.astype(np.int64)

    @classmethod
    def from_pairs(cls, pairs) -> "ConfusionMatrix":
        cm = cls()
        for actual, predicted in pairs:
            cm.counts[int(actual), int(predicted)] += 1
        return cm

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def empty_rows(self) -> np.ndarray:
        """True for actual classes that have no samples."""
        return self.counts.sum(axis=1) == 0

    def normalized(self) -> np.ndarray:
        """Row percentages; rows without samples are NaN (see ``empty_rows``)."""
        sums = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        out = np.full(self.counts.shape, np.nan)
        ok = sums[:, 0] > 0
        out[ok] = 100.0 * self.counts[ok] / sums[ok]
        return out

    def __add__(self, other):
        return ConfusionMatrix(self.counts + other.counts)


def confusion_matrix(pairs) -> ConfusionMatrix:
    return ConfusionMatrix.from_pairs(pairs)


def accuracy(cm: ConfusionMatrix) -> float:
    """Correctly classified over all classified samples."""
    if cm.total == 0:
        raise ValueError("accuracy of an empty confusion matrix is undefined")
    return float(np.trace(cm.counts)) / cm.total


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    accuracy: float
    by_condition: dict = field(default_factory=dict)
    source: str = ""

    def to_text(self) -> str:
        lines = []
        if self.source:
            lines.append(f"dataset: {self.source}")
        lines += _table(self.confusion, "all images")
        lines.append(f"accuracy: {100 * self.accuracy:.1f}% ({int(np.trace(self.confusion.counts))}"
                     f"/{self.confusion.total})")
        for tag, groups in self.by_condition.items():
            for value, (cm, acc) in groups.items():
                lines.append("")
                lines += _table(cm, f"{tag} = {value}")
                lines.append(f"accuracy: {100 * acc:.1f}% ({int(np.trace(cm.counts))}/{cm.total})")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["condition", "value", "actual", "pred_left", "pred_center", "pred_right",
                    "pct_left", "pct_center", "pct_right", "accuracy"])
        rows = [("all", "", self.confusion, self.accuracy)]
        for tag, groups in self.by_condition.items():
            rows += [(tag, value, cm, acc) for value, (cm, acc) in groups.items()]
        for tag, value, cm, acc in rows:
            pct = cm.normalized()
            for lab in ClassLabel:
                w.writerow([tag, value, lab.name.lower(), *cm.counts[lab],
                            *(("" if np.isnan(p) else f"{p:.1f}") for p in pct[lab]), f"{acc:.6f}"])
        return buf.getvalue()


def _table(cm: ConfusionMatrix, title: str) -> list[str]:
    pct = cm.normalized()
    names = [lab.name.capitalize() for lab in ClassLabel]
    lines = [f"[{title}] rows: actual class, columns: predicted outcome",
             f"{'':>8}" + "".join(f"{n:>16}" for n in names)]
    for lab, name in zip(ClassLabel, names):
        cells = []
        for j in range(N_CLASSES):
            p = "  n/a" if np.isnan(pct[lab, j]) else f"{pct[lab, j]:5.1f}%"
            cells.append(f"{p} ({cm.counts[lab, j]:d})".rjust(16))
        lines.append(f"{name:>8}" + "".join(cells))
    return lines


def evaluate(classify, samples, tags=("illumination",), source: str = "") -> EvalReport:
    """Score ``classify(image) -> label`` over samples with ``image`` and ``label``.

    Breakdowns are computed for every attribute named in ``tags`` that the
    samples carry; each distinct value gets its own confusion matrix.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("cannot evaluate an empty sample set")
    preds = [int(classify(s.image)) for s in samples]
    overall = ConfusionMatrix.from_pairs((s.label, p) for s, p in zip(samples, preds))
    by_condition = {}
    for tag in tags:
        groups = defaultdict(list)
        for s, p in zip(samples, preds):
            value = getattr(s, tag, None)
            if value is None or (isinstance(value, float) and np.isnan(value)):
                continue
            groups[value].append((s.label, p))
        if groups:
            by_condition[tag] = {}
            for value in sorted(groups):
                cm = ConfusionMatrix.from_pairs(groups[value])
                by_condition[tag][value] = (cm, accuracy(cm))
    return EvalReport(overall, accuracy(overall), by_condition, source)


def model_classifier(model):
    """Wrap a CnnModel, fitted HeadingClassifier or labeling object as ``image -> label``."""
    return as_classifier(model).classify
