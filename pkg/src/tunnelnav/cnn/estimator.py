"""scikit-learn compatible wrappers around the from-scratch CNN."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..imaging import INPUT_SIZE, preprocess
from ..labels import N_CLASSES
from .model import DEFAULT_LAYERS
from .train import TrainConfig, as_batch, train


class FramePreprocessor(TransformerMixin, BaseEstimator):
    """Turn raw camera frames (gray or RGB, any size) into uint8 input images.

    Output is an (N, size, size) uint8 array, ready for
    :class:`HeadingClassifier`.
    """

    def __init__(self, size=INPUT_SIZE):
        self.size = size

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return np.stack([preprocess(frame, self.size).data for frame in X])


def _check_images(X):
    if isinstance(X, np.ndarray):
        arr = X
    else:
        arr = np.stack([getattr(img, "data", img) for img in X])
    if arr.ndim == 4 and arr.shape[-1] == 1:
        arr = arr[..., 0]
    if arr.ndim != 3:
        raise ValueError(f"expected images of shape (N, H, W), got {arr.shape}")
    if arr.dtype != np.uint8:
        arr = np.asarray(arr, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("input images contain NaN or infinity")
        if arr.min() < 0 or arr.max() > 1:
            raise ValueError("float images must be scaled to [0, 1]")
        arr = np.rint(arr * 255).astype(np.uint8)
    return arr


class HeadingClassifier(ClassifierMixin, BaseEstimator):
    """Three-class (left / center / right) CNN heading classifier.

    Parameters mirror :class:`~tunnelnav.cnn.train.TrainConfig`; ``layers``
    defaults to the standard conv-conv-conv-dense architecture.
    """

    def __init__(self, layers=None, epochs=25, steps_per_epoch=200, batch_size=32,
                 learning_rate=1e-3, random_state=0):
        self.layers = layers
        self.epochs = epochs
        self.steps_per_epoch = steps_per_epoch
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.random_state = random_state

    def fit(self, X, y, holdout=None):
        X = _check_images(X)
        y = np.asarray(y, dtype=np.intp)
        if y.ndim != 1 or len(y) != len(X):
            raise ValueError("y must be a 1-D array with one label per image")
        if y.min() < 0 or y.max() >= N_CLASSES:
            raise ValueError(f"labels must be class indices in [0, {N_CLASSES})")
        cfg = TrainConfig(self.epochs, self.steps_per_epoch, self.batch_size,
                          self.learning_rate, self.random_state)
        self.model_, self.history_ = train(X, y, cfg, self.layers or DEFAULT_LAYERS, holdout=holdout)
        self.classes_ = np.arange(N_CLASSES)
        return self

    @classmethod
    def from_model(cls, model):
        """Wrap an already trained :class:`CnnModel`."""
        est = cls(layers=model.layers, random_state=model.rng_seed)
        est.model_ = model
        est.classes_ = np.arange(N_CLASSES)
        return est

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        return self.model_.predict_proba(as_batch(_check_images(X), self.model_.dtype))

    def predict(self, X):
        return self.predict_proba(X).argmax(axis=1)
