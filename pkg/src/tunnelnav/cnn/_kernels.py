"""Compiled loops for the memory-bound parts of the conv and pooling layers."""

import numpy as np
from numba import njit


@njit(cache=True)
def im2col(xp, k, h, w, cols):
    n, c = xp.shape[0], xp.shape[3]
    for b in range(n):
        for y in range(h):
            for x in range(w):
                row = (b * h + y) * w + x
                j = 0
                for dy in range(k):
                    for dx in range(k):
                        for ch in range(c):
                            cols[row, j] = xp[b, y + dy, x + dx, ch]
                            j += 1


@njit(cache=True)
def col2im(gcols, k, h, w, grad_xp):
    n, c = grad_xp.shape[0], grad_xp.shape[3]
    for b in range(n):
        for y in range(h):
            for x in range(w):
                row = (b * h + y) * w + x
                j = 0
                for dy in range(k):
                    for dx in range(k):
                        for ch in range(c):
                            grad_xp[b, y + dy, x + dx, ch] += gcols[row, j]
                            j += 1


@njit(cache=True)
def maxpool2(x, out, idx):
    n, h2, w2, c = out.shape
    for b in range(n):
        for y in range(h2):
            for xx in range(w2):
                for ch in range(c):
                    best = x[b, 2 * y, 2 * xx, ch]
                    arg = 0
                    v = x[b, 2 * y, 2 * xx + 1, ch]
                    if v > best:
                        best = v
                        arg = 1
                    v = x[b, 2 * y + 1, 2 * xx, ch]
                    if v > best:
                        best = v
                        arg = 2
                    v = x[b, 2 * y + 1, 2 * xx + 1, ch]
                    if v > best:
                        best = v
                        arg = 3
                    out[b, y, xx, ch] = best
                    idx[b, y, xx, ch] = arg


@njit(cache=True)
def maxpool2_grad(g, idx, grad):
    n, h2, w2, c = g.shape
    for b in range(n):
        for y in range(h2):
            for xx in range(w2):
                for ch in range(c):
                    a = idx[b, y, xx, ch]
                    grad[b, 2 * y + a // 2, 2 * xx + a % 2, ch] = g[b, y, xx, ch]
