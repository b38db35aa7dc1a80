"""Slow, independent reference computations used to check the fast code."""

import math
from decimal import Decimal, getcontext

import numpy as np


def conv_direct(x, w, b):
    """Same-padded stride-1 convolution by explicit window sums, one sample (H, W, C)."""
    h, wd, c = x.shape
    k, _, _, f = w.shape
    p = k // 2
    out = np.zeros((h, wd, f))
    for y in range(h):
        for xx in range(wd):
            for o in range(f):
                acc = b[o]
                for dy in range(k):
                    for dx in range(k):
                        yy, xs = y + dy - p, xx + dx - p
                        if 0 <= yy < h and 0 <= xs < wd:
                            for ch in range(c):
                                acc += x[yy, xs, ch] * w[dy, dx, ch, o]
                out[y, xx, o] = acc
    return out


def window_max(x):
    h, w, c = x.shape
    out = np.zeros((h // 2, w // 2, c))
    for i in range(h // 2):
        for j in range(w // 2):
            for ch in range(c):
                out[i, j, ch] = max(x[2 * i + a, 2 * j + bb, ch] for a in range(2) for bb in range(2))
    return out


def numeric_grad(f, x, h=1e-3):
    """Central finite differences of a scalar function with respect to array ``x`` (in place)."""
    g = np.zeros_like(x, dtype=np.float64)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = x[idx]
        x[idx] = old + h
        fp = f()
        x[idx] = old - h
        fm = f()
        x[idx] = old
        g[idx] = (fp - fm) / (2 * h)
    return g


def rel_error(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12))


def softmax_decimal(z, digits=50):
    getcontext().prec = digits
    e = [Decimal(v).exp() for v in z]
    s = sum(e)
    return [float(v / s) for v in e]


def bilinear_line(values, n_out):
    """Resample a 1-D row by straight-line interpolation between neighbors.

    Sample positions use pixel-center alignment and are clamped to the ends.
    """
    n_in = len(values)
    scale = n_in / n_out
    out = []
    for i in range(n_out):
        src = (i + 0.5) * scale - 0.5
        src = min(max(src, 0.0), n_in - 1)
        lo = int(math.floor(src))
        hi = min(lo + 1, n_in - 1)
        t = src - lo
        out.append(values[lo] + t * (values[hi] - values[lo]))
    return out


def adam_recurrence(theta, grads, lr=1e-3, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    for t, g in enumerate(grads, 1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1 ** t)
        vh = v / (1 - b2 ** t)
        theta = theta - lr * mh / (math.sqrt(vh) + eps)
    return theta


def plane_distance(origin, direction, half_width, height):
    """Distance from an inside point to the box walls of a straight, x-aligned tunnel."""
    ox, oy, oz = origin
    dx, dy, dz = direction
    ts = []
    if dy > 0:
        ts.append((half_width - oy) / dy)
    elif dy < 0:
        ts.append((-half_width - oy) / dy)
    if dz > 0:
        ts.append((height - oz) / dz)
    elif dz < 0:
        ts.append(-oz / dz)
    return min(ts) if ts else math.inf
