"""Layer specifications, the CNN model container and its binary file format."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..labels import N_CLASSES
from . import layers as L

KINDS = ("conv2d", "maxpool2", "relu", "flatten", "dense", "softmax")

MAGIC = b"TPCNN1"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Base class for model file decoding errors."""


class BadMagicError(ModelFormatError):
    pass


class VersionMismatchError(ModelFormatError):
    pass


class TruncatedModelError(ModelFormatError):
    pass


class ShapeMismatchError(ModelFormatError):
    pass


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    kernel: int = 0
    filters: int = 0
    units: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.kind == "conv2d" and (self.kernel < 1 or self.kernel % 2 == 0 or self.filters < 1):
            raise ValueError("conv2d needs an odd kernel size and a positive filter count")
        if self.kind == "dense" and self.units < 1:
            raise ValueError("dense needs a positive unit count")

    @property
    def trainable(self) -> bool:
        return self.kind in ("conv2d", "dense")


def conv(filters, kernel=3):
    return LayerSpec("conv2d", kernel=kernel, filters=filters)


def dense(units):
    return LayerSpec("dense", units=units)


RELU = LayerSpec("relu")
POOL = LayerSpec("maxpool2")
FLATTEN = LayerSpec("flatten")
SOFTMAX = LayerSpec("softmax")

DEFAULT_LAYERS = (
    conv(32), RELU, POOL,
    conv(32), RELU, POOL,
    conv(64), RELU, POOL,
    FLATTEN,
    dense(64), RELU,
    dense(N_CLASSES), SOFTMAX,
)

DEFAULT_INPUT_SHAPE = (128, 128, 1)


def infer_shapes(specs, input_shape):
    """Output shape after every layer; raises ValueError on incompatibilities."""
    shape = tuple(input_shape)
    shapes = []
    for i, spec in enumerate(specs):
        if spec.kind == "conv2d":
            if len(shape) != 3:
                raise ValueError(f"layer {i}: conv2d needs an H x W x C input, got {shape}")
            shape = (shape[0], shape[1], spec.filters)
        elif spec.kind == "maxpool2":
            if len(shape) != 3 or shape[0] % 2 or shape[1] % 2:
                raise ValueError(f"layer {i}: maxpool2 needs even H x W x C input, got {shape}")
            shape = (shape[0] // 2, shape[1] // 2, shape[2])
        elif spec.kind == "flatten":
            shape = (int(np.prod(shape)),)
        elif spec.kind == "dense":
            if len(shape) != 1:
                raise ValueError(f"layer {i}: dense needs a flat input, got {shape}")
            shape = (spec.units,)
        elif spec.kind == "softmax":
            if len(shape) != 1 or i != len(specs) - 1:
                raise ValueError(f"layer {i}: softmax must be the last layer on a flat input")
        shapes.append(shape)
    if not specs or specs[-1].kind != "softmax" or shapes[-1] != (N_CLASSES,):
        raise ValueError(f"architecture must end in a {N_CLASSES}-unit softmax")
    return shapes


def param_shapes(specs, input_shape):
    """(weight_shape, bias_shape) for each trainable layer in order."""
    out = []
    shape = tuple(input_shape)
    for spec, next_shape in zip(specs, infer_shapes(specs, input_shape)):
        if spec.kind == "conv2d":
            out.append(((spec.kernel, spec.kernel, shape[2], spec.filters), (spec.filters,)))
        elif spec.kind == "dense":
            out.append(((shape[0], spec.units), (spec.units,)))
        shape = next_shape
    return out


@dataclass
class CnnModel:
    """Architecture plus parameters.

    ``params`` is a flat list [w0, b0, w1, b1, ...] over the trainable layers
    in declaration order.
    """

    layers: tuple
    params: list
    input_shape: tuple = DEFAULT_INPUT_SHAPE
    rng_seed: int = 0
    _shapes: list = field(init=False, repr=False, compare=False)
    _plan: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.layers = tuple(self.layers)
        self.input_shape = tuple(self.input_shape)
        expected = param_shapes(self.layers, self.input_shape)
        flat = [s for pair in expected for s in pair]
        if len(self.params) != len(flat):
            raise ShapeMismatchError(f"expected {len(flat)} parameter tensors, got {len(self.params)}")
        for i, (p, s) in enumerate(zip(self.params, flat)):
            if tuple(p.shape) != s:
                raise ShapeMismatchError(f"parameter {i} has shape {p.shape}, expected {s}")
        self._shapes = infer_shapes(self.layers, self.input_shape)
        # max-pooling commutes with relu; pooling first halves the relu work
        plan = [spec.kind for spec in self.layers[:-1]]
        for i in range(len(plan) - 1):
            if plan[i] == "relu" and plan[i + 1] == "maxpool2":
                plan[i], plan[i + 1] = "maxpool2", "relu"
        self._plan = tuple(plan)

    @classmethod
    def initialize(cls, layers=DEFAULT_LAYERS, input_shape=DEFAULT_INPUT_SHAPE, seed=0, dtype=np.float32):
        """He-uniform weights, zero biases."""
        rng = np.random.default_rng(seed)
        params = []
        for w_shape, b_shape in param_shapes(layers, input_shape):
            fan_in = int(np.prod(w_shape[:-1]))
            limit = np.sqrt(6.0 / fan_in)
            params.append(rng.uniform(-limit, limit, size=w_shape).astype(dtype))
            params.append(np.zeros(b_shape, dtype=dtype))
        return cls(layers, params, input_shape, seed)

    @property
    def dtype(self):
        return self.params[0].dtype

    def astype(self, dtype) -> "CnnModel":
        return CnnModel(self.layers, [p.astype(dtype) for p in self.params], self.input_shape, self.rng_seed)

    def copy(self) -> "CnnModel":
        return self.astype(self.dtype)

    def forward(self, x, keep_cache=False):
        """Run a batch (N, H, W, C) through the network.

        Returns (logits, probabilities, cache). The cache is None unless
        ``keep_cache`` is set; it holds what :meth:`backward` needs.
        """
        x = np.asarray(x, dtype=self.dtype)
        if x.shape[1:] != self.input_shape:
            raise ValueError(f"expected input of shape (N, {', '.join(map(str, self.input_shape))}), got {x.shape}")
        cache = [] if keep_cache else None
        pi = 0
        for kind in self._plan:
            if kind == "conv2d":
                w, b = self.params[pi], self.params[pi + 1]
                pi += 2
                if keep_cache:
                    x_shape = x.shape
                    x, cols = L._conv_cols(x, w, b)
                    cache.append((x_shape, cols))
                else:
                    x = L.conv2d_forward(x, w, b)
            elif kind == "dense":
                w, b = self.params[pi], self.params[pi + 1]
                pi += 2
                if keep_cache:
                    cache.append(x)
                x = L.dense_forward(x, w, b)
            elif kind == "relu":
                if keep_cache:
                    cache.append(x)
                x = L.relu_forward(x)
            elif kind == "maxpool2":
                x, idx = L.maxpool2_forward(x)
                if keep_cache:
                    cache.append(idx)
            elif kind == "flatten":
                if keep_cache:
                    cache.append(x.shape)
                x = x.reshape(x.shape[0], -1)
        return x, L.softmax(x), cache

    def backward(self, grad_logits, cache):
        """Gradients for every parameter, in the order of ``params``."""
        grads = [None] * len(self.params)
        pi = len(self.params)
        g = grad_logits
        for kind, saved in zip(reversed(self._plan), reversed(cache)):
            if kind == "conv2d":
                pi -= 2
                x_shape, cols = saved
                g, gw, gb = L._conv_backward_cols(g, x_shape, self.params[pi], cols, need_input_grad=pi > 0)
                grads[pi], grads[pi + 1] = gw, gb
            elif kind == "dense":
                pi -= 2
                g, gw, gb = L.dense_backward(g, saved, self.params[pi])
                grads[pi], grads[pi + 1] = gw, gb
            elif kind == "relu":
                g = L.relu_backward(g, saved)
            elif kind == "maxpool2":
                g = L.maxpool2_backward(g, saved)
            elif kind == "flatten":
                g = g.reshape(saved)
        return grads

    def loss_and_grads(self, x, targets):
        logits, probs, cache = self.forward(x, keep_cache=True)
        loss, grad_logits = L.cross_entropy(probs, targets)
        return loss, probs, self.backward(grad_logits, cache)

    def predict_proba(self, x, batch_size=64):
        x = np.asarray(x)
        out = [self.forward(x[i:i + batch_size])[1] for i in range(0, len(x), batch_size)]
        return np.concatenate(out) if out else np.empty((0, N_CLASSES), dtype=self.dtype)


_KIND_CODE = {k: i for i, k in enumerate(KINDS)}


def _pack_tensor(arr) -> bytes:
    arr = np.asarray(arr, dtype="<f4")
    head = struct.pack("<B", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    return head + arr.tobytes(order="C")


def dumps_model(model: CnnModel) -> bytes:
    parts = [MAGIC, struct.pack("<H", FORMAT_VERSION)]
    parts.append(struct.pack("<3I", *model.input_shape))
    parts.append(struct.pack("<Q", model.rng_seed & 0xFFFFFFFFFFFFFFFF))
    parts.append(struct.pack("<H", len(model.layers)))
    for spec in model.layers:
        parts.append(struct.pack("<B3I", _KIND_CODE[spec.kind], spec.kernel, spec.filters, spec.units))
    for p in model.params:
        parts.append(_pack_tensor(p))
    return b"".join(parts)


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def take(self, fmt):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.raw):
            raise TruncatedModelError(f"model file truncated at byte {len(self.raw)} (needed {self.pos + size})")
        vals = struct.unpack_from(fmt, self.raw, self.pos)
        self.pos += size
        return vals


def loads_model(raw: bytes) -> CnnModel:
    if raw[:len(MAGIC)] != MAGIC:
        raise BadMagicError(f"bad magic {raw[:len(MAGIC)]!r}, expected {MAGIC!r}")
    r = _Reader(raw)
    r.pos = len(MAGIC)
    (version,) = r.take("<H")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"model format version {version}, this reader supports {FORMAT_VERSION}")
    input_shape = r.take("<3I")
    (seed,) = r.take("<Q")
    (n_layers,) = r.take("<H")
    specs = []
    for _ in range(n_layers):
        code, kernel, filters, units = r.take("<B3I")
        if code >= len(KINDS):
            raise ModelFormatError(f"unknown layer code {code}")
        try:
            specs.append(LayerSpec(KINDS[code], kernel, filters, units))
        except ValueError as exc:
            raise ShapeMismatchError(str(exc)) from None
    try:
        expected = [s for pair in param_shapes(specs, input_shape) for s in pair]
    except ValueError as exc:
        raise ShapeMismatchError(str(exc)) from None
    params = []
    for want in expected:
        (ndim,) = r.take("<B")
        shape = r.take(f"<{ndim}I")
        if tuple(shape) != want:
            raise ShapeMismatchError(f"stored tensor shape {shape} does not match architecture {want}")
        count = int(np.prod(shape))
        if r.pos + 4 * count > len(raw):
            raise TruncatedModelError(f"model file truncated inside a tensor of shape {shape}")
        arr = np.frombuffer(raw, dtype="<f4", count=count, offset=r.pos).reshape(shape)
        params.append(arr.astype(np.float32))
        r.pos += 4 * count
    if r.pos != len(raw):
        raise ModelFormatError(f"{len(raw) - r.pos} trailing bytes after model payload")
    return CnnModel(specs, params, tuple(input_shape), seed)


def save_model(model: CnnModel, path) -> None:
    Path(path).write_bytes(dumps_model(model))


def load_model(path) -> CnnModel:
    return loads_model(Path(path).read_bytes())
