"""Forward and backward passes of the CNN building blocks.

Activations are NHWC arrays. Every function also accepts a single unbatched
H x W x C sample and returns results with the same batching.
"""

import numpy as np

from . import _kernels


def _batched(x, ndim):
    x = np.asarray(x)
    if x.ndim == ndim - 1:
        return x[None], True
    if x.ndim != ndim:
        raise ValueError(f"expected a {ndim - 1}-D sample or {ndim}-D batch, got shape {x.shape}")
    return x, False


def _im2col(xp, k, h, w):
    """Patches of a padded batch as an (N*H*W, k*k*C) matrix, (dy, dx, c) order."""
    n, c = xp.shape[0], xp.shape[3]
    cols = np.empty((n * h * w, k * k * c), dtype=xp.dtype)
    _kernels.im2col(np.ascontiguousarray(xp), k, h, w, cols)
    return cols


def _pad(x, p):
    return np.pad(x, ((0, 0), (p, p), (p, p), (0, 0))) if p else x


def conv2d_forward(x, weights, bias):
    """Stride-1 'same' convolution with zero padding.

    ``weights`` has shape (k, k, C, F) with odd k; output is (N, H, W, F).
    """
    x, single = _batched(x, 4)
    k, k2, c, f = weights.shape
    if k != k2 or k % 2 == 0:
        raise ValueError(f"kernel must be square with odd size, got {k}x{k2}")
    if x.shape[3] != c:
        raise ValueError(f"input has {x.shape[3]} channels, weights expect {c}")
    if bias.shape != (f,):
        raise ValueError(f"bias shape {bias.shape} does not match {f} filters")
    out, _ = _conv_cols(x, weights, bias)
    return out[0] if single else out


def _conv_cols(x, weights, bias):
    k, _, c, f = weights.shape
    n, h, w, _ = x.shape
    cols = _im2col(_pad(x, k // 2), k, h, w)
    out = cols @ weights.reshape(k * k * c, f)
    out += bias
    return out.reshape(n, h, w, f), cols


def conv2d_backward(grad_out, x, weights, need_input_grad=True):
    """Gradients of :func:`conv2d_forward` w.r.t. input, weights and bias.

    With ``need_input_grad=False`` the input gradient is skipped and returned
    as None (first layer of a network).
    """
    x, single = _batched(x, 4)
    grad_out, _ = _batched(grad_out, 4)
    k = weights.shape[0]
    cols = _im2col(_pad(x, k // 2), k, x.shape[1], x.shape[2])
    gx, gw, gb = _conv_backward_cols(grad_out, x.shape, weights, cols, need_input_grad)
    if single and gx is not None:
        gx = gx[0]
    return gx, gw, gb


def _conv_backward_cols(grad_out, x_shape, weights, cols, need_input_grad):
    k, _, c, f = weights.shape
    n, h, w, _ = x_shape
    if grad_out.shape != (n, h, w, f):
        raise ValueError(f"grad_out shape {grad_out.shape} does not match forward output {(n, h, w, f)}")
    p = k // 2
    g = grad_out.reshape(-1, f)
    grad_w = (cols.T @ g).reshape(weights.shape)
    grad_b = g.sum(axis=0)
    if not need_input_grad:
        return None, grad_w, grad_b
    gcols = g @ weights.reshape(k * k * c, f).T
    grad_xp = np.zeros((n, h + 2 * p, w + 2 * p, c), dtype=gcols.dtype)
    _kernels.col2im(gcols, k, h, w, grad_xp)
    grad_x = grad_xp[:, p:p + h, p:p + w, :] if p else grad_xp
    return grad_x, grad_w, grad_b


def maxpool2_forward(x):
    """2x2 max pooling with stride 2.

    Returns the pooled tensor and, per output cell, the argmax position
    within its window in row-major order (0..3). Ties go to the first index.
    """
    x, single = _batched(x, 4)
    h, w = x.shape[1:3]
    if h % 2 or w % 2:
        raise ValueError(f"max pooling needs even spatial extents, got {h}x{w}")
    shape = (x.shape[0], h // 2, w // 2, x.shape[3])
    out = np.empty(shape, dtype=x.dtype)
    idx = np.empty(shape, dtype=np.uint8)
    _kernels.maxpool2(np.ascontiguousarray(x), out, idx)
    if single:
        return out[0], idx[0]
    return out, idx


def maxpool2_backward(grad_out, argmax):
    grad_out, single = _batched(grad_out, 4)
    argmax, _ = _batched(argmax, 4)
    if argmax.shape != grad_out.shape:
        raise ValueError("argmax and grad_out shapes differ")
    if argmax.size and argmax.max() > 3:
        raise IndexError("argmax index out of range for a 2x2 window")
    n, h2, w2, c = grad_out.shape
    grad = np.zeros((n, 2 * h2, 2 * w2, c), dtype=grad_out.dtype)
    _kernels.maxpool2_grad(np.ascontiguousarray(grad_out), np.ascontiguousarray(argmax), grad)
    return grad[0] if single else grad


def relu_forward(x):
    return np.maximum(x, 0)


def relu_backward(grad_out, x):
    """Subgradient 0 at x == 0."""
    return np.where(x > 0, grad_out, 0).astype(np.result_type(grad_out), copy=False)


def dense_forward(x, weights, bias):
    """``x @ weights + bias`` for a vector (n,) or a batch (N, n)."""
    x = np.asarray(x)
    if x.shape[-1] != weights.shape[0]:
        raise ValueError(f"input size {x.shape[-1]} does not match weights {weights.shape}")
    if bias.shape != (weights.shape[1],):
        raise ValueError(f"bias shape {bias.shape} does not match weights {weights.shape}")
    return x @ weights + bias


def dense_backward(grad_out, x, weights):
    x2 = np.atleast_2d(x)
    g2 = np.atleast_2d(grad_out)
    if g2.shape[-1] != weights.shape[1] or x2.shape[0] != g2.shape[0]:
        raise ValueError("grad_out shape does not match the forward pass")
    grad_x = g2 @ weights.T
    grad_w = x2.T @ g2
    grad_b = g2.sum(axis=0)
    if np.ndim(x) == 1:
        grad_x = grad_x[0]
    return grad_x, grad_w, grad_b


def softmax(logits):
    """Row-wise softmax, stabilized by subtracting the row maximum."""
    z = np.asarray(logits, dtype=np.result_type(logits, np.float32))
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


P_FLOOR = 1e-12


def cross_entropy(probs, target):
    """Categorical cross-entropy of softmax outputs.

    ``target`` is a class index (or an array of them for a batch). Returns
    (loss, grad_logits); for a batch the loss is the mean and the gradient is
    scaled by 1/N accordingly. The gradient assumes ``probs`` came from
    :func:`softmax` of the logits, so it is p - onehot.
    """
    p = np.asarray(probs)
    single = p.ndim == 1
    p2 = np.atleast_2d(p)
    t = np.atleast_1d(np.asarray(target, dtype=np.intp))
    if t.shape[0] != p2.shape[0]:
        raise ValueError("one target per probability row is required")
    rows = np.arange(p2.shape[0])
    picked = np.maximum(p2[rows, t], P_FLOOR)
    losses = -np.log(picked)
    grad = p2.copy()
    grad[rows, t] -= 1
    if single:
        return float(losses[0]), grad[0]
    n = p2.shape[0]
    return float(losses.mean()), grad / n
