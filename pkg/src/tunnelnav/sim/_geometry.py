"""Compiled geometry kernels for the tunnel: centerline projection, wall
clearance, ray marching, camera rendering and lidar.

Segment rows are (s0, length, x0, y0, heading0, curvature, center_x,
center_y, cos heading0, sin heading0, end radial x, end radial y);
curvature > 0 turns left. The first and last segments extend
indefinitely past the tunnel ends.
"""

import math

import numpy as np
from numba import njit

HIT_TOL = 5e-4
BISECT_TOL = 5e-4
MAX_STEP = 3.0
MAX_ITER = 400

STATUS_OUTSIDE = -1
STATUS_MISS = 0
STATUS_HIT = 1


@njit(cache=True)
def _segment_local(segs, i, x, y, first, last):
    """(squared distance to the segment, param u, left offset) without trig for arcs."""
    length, x0, y0, k, cx, cy = segs[i, 1], segs[i, 2], segs[i, 3], segs[i, 5], segs[i, 6], segs[i, 7]
    if k == 0.0:
        c, s = segs[i, 8], segs[i, 9]
        u = (x - x0) * c + (y - y0) * s
        lat = -(x - x0) * s + (y - y0) * c
        out = 0.0
        if u < 0.0 and not first:
            out = -u
        elif u > length and not last:
            out = u - length
        return out * out + lat * lat, u, lat
    r = 1.0 / abs(k)
    sigma = 1.0 if k > 0 else -1.0
    ax, ay = x0 - cx, y0 - cy
    vx, vy = x - cx, y - cy
    dist = math.sqrt(vx * vx + vy * vy)
    lat = sigma * (r - dist)
    # inside the angular range iff v lies between the start and end radials
    bx, by = segs[i, 10], segs[i, 11]
    after_start = sigma * (ax * vy - ay * vx) >= 0.0
    before_end = sigma * (bx * vy - by * vx) <= 0.0
    if after_start and before_end:
        return lat * lat, -1.0, lat
    ex, ey = (x0, y0) if not after_start else (cx + r * bx, cy + r * by)
    return (x - ex) ** 2 + (y - ey) ** 2, -1.0, lat


@njit(cache=True)
def _arc_param(segs, i, x, y):
    x0, y0, k, cx, cy = segs[i, 2], segs[i, 3], segs[i, 5], segs[i, 6], segs[i, 7]
    sigma = 1.0 if k > 0 else -1.0
    ax, ay = x0 - cx, y0 - cy
    vx, vy = x - cx, y - cy
    return sigma * math.atan2(ax * vy - ay * vx, ax * vx + ay * vy) / abs(k)


@njit(cache=True)
def locate(segs, x, y):
    """(segment index, arclength, left offset, unit tangent x, y) of a world point."""
    best = 1e300
    bi = 0
    bu = 0.0
    bl = 0.0
    n = segs.shape[0]
    for i in range(n):
        d2, u, lat = _segment_local(segs, i, x, y, i == 0, i == n - 1)
        if d2 < best:
            best = d2
            bi = i
            bu = u
            bl = lat
    if segs[bi, 5] == 0.0:
        return bi, segs[bi, 0] + bu, bl, segs[bi, 8], segs[bi, 9]
    bu = _arc_param(segs, bi, x, y)
    psi = segs[bi, 4] + segs[bi, 5] * min(max(bu, 0.0), segs[bi, 1])
    return bi, segs[bi, 0] + bu, bl, math.cos(psi), math.sin(psi)


@njit(cache=True)
def local_coords(segs, x, y):
    """Arclength, left offset and unit tangent of the nearest centerline point."""
    _, s, lat, tx, ty = locate(segs, x, y)
    return s, lat, tx, ty


@njit(cache=True)
def centerline_point(segs, s):
    n = segs.shape[0]
    i = 0
    while i < n - 1 and s > segs[i, 0] + segs[i, 1]:
        i += 1
    u = s - segs[i, 0]
    x0, y0, psi0, k = segs[i, 2], segs[i, 3], segs[i, 4], segs[i, 5]
    if k == 0.0:
        return x0 + u * math.cos(psi0), y0 + u * math.sin(psi0), psi0
    psi = psi0 + k * u
    cx, cy = segs[i, 6], segs[i, 7]
    return cx + math.sin(psi) / k, cy - math.cos(psi) / k, psi


@njit(cache=True)
def _lookup(tables, grid, surf, s, u):
    if grid[7] == 0.0:
        return 0.0
    fs = min(max((s - grid[0]) * grid[8], 0.0), grid[2] - 1.000001)
    fu = min(max((u - grid[3]) * grid[8], 0.0), grid[5] - 1.000001)
    i = int(fs)
    j = int(fu)
    a = fs - i
    b = fu - j
    return ((1 - a) * ((1 - b) * tables[surf, i, j] + b * tables[surf, i, j + 1])
            + a * ((1 - b) * tables[surf, i + 1, j] + b * tables[surf, i + 1, j + 1]))


@njit(cache=True)
def _gaps_local(tables, grid, w, h, s, lat, z):
    zc = z - grid[6]
    gl = 0.5 * w + _lookup(tables, grid, 0, s, zc) - lat
    gr = 0.5 * w + _lookup(tables, grid, 1, s, zc) + lat
    gf = z + _lookup(tables, grid, 2, s, lat)
    gc = h + _lookup(tables, grid, 3, s, lat) - z
    return gl, gr, gf, gc


@njit(cache=True)
def gaps(segs, tables, grid, w, h, x, y, z):
    s, lat, tx, ty = local_coords(segs, x, y)
    return _gaps_local(tables, grid, w, h, s, lat, z)


@njit(cache=True)
def _min_gap(segs, tables, grid, w, h, x, y, z):
    gl, gr, gf, gc = gaps(segs, tables, grid, w, h, x, y, z)
    return min(min(gl, gr), min(gf, gc))


@njit(cache=True)
def _surface_normal(segs, tables, grid, w, h, x, y, z):
    """Outward unit normal of the nearest surface at a point near the wall."""
    s, lat, tx, ty = local_coords(segs, x, y)
    gl, gr, gf, gc = _gaps_local(tables, grid, w, h, s, lat, z)
    nlx, nly = -ty, tx
    e = 0.05
    zc = z - grid[6]
    m = min(min(gl, gr), min(gf, gc))
    if m == gl or m == gr:
        surf = 0 if m == gl else 1
        ds = (_lookup(tables, grid, surf, s + e, zc) - _lookup(tables, grid, surf, s - e, zc)) / (2 * e)
        du = (_lookup(tables, grid, surf, s, zc + e) - _lookup(tables, grid, surf, s, zc - e)) / (2 * e)
        side = 1.0 if surf == 0 else -1.0
        gx = -ds * tx + side * nlx
        gy = -ds * ty + side * nly
        gz = -du
    else:
        surf = 2 if m == gf else 3
        ds = (_lookup(tables, grid, surf, s + e, lat) - _lookup(tables, grid, surf, s - e, lat)) / (2 * e)
        du = (_lookup(tables, grid, surf, s, lat + e) - _lookup(tables, grid, surf, s, lat - e)) / (2 * e)
        gx = -ds * tx - du * nlx
        gy = -ds * ty - du * nly
        gz = -1.0 if surf == 2 else 1.0
    norm = math.sqrt(gx * gx + gy * gy + gz * gz)
    return gx / norm, gy / norm, gz / norm


@njit(cache=True)
def trace(segs, tables, grid, w, h, ox, oy, oz, dx, dy, dz, max_range):
    """March a ray from an inside point to the first wall; returns (status, distance)."""
    seg, s, lat, tx, ty = locate(segs, ox, oy)
    gl, gr, gf, gc = _gaps_local(tables, grid, w, h, s, lat, oz)
    return _trace_from(segs, tables, grid, w, h, ox, oy, oz, dx, dy, dz, max_range,
                       seg, s, lat, tx, ty, gl, gr, gf, gc)


@njit(cache=True)
def _trace_from(segs, tables, grid, w, h, ox, oy, oz, dx, dy, dz, max_range,
                seg, s, lat, tx, ty, gl, gr, gf, gc):
    """Ray march given the origin's precomputed local frame and wall gaps.

    Each step jumps to the nearest approached wall as seen in the local frame
    at the current point (plus a small overshoot); inside straight pieces that
    prediction is exact, in arcs the step is capped at MAX_STEP. Once a step
    lands outside, the crossing is refined by Illinois false position until
    the bracket is below BISECT_TOL.
    """
    g_in = min(min(gl, gr), min(gf, gc))
    if g_in <= 0.0:
        return STATUS_OUTSIDE, 0.0
    t = 0.0
    t_out = -1.0
    g_out = 0.0
    n_seg = segs.shape[0]
    for _ in range(MAX_ITER):
        rate = -dx * ty + dy * tx
        cand = 1e300
        if rate > 1e-12:
            cand = gl / rate
        elif rate < -1e-12:
            cand = gr / -rate
        if dz < -1e-12:
            cand = min(cand, gf / -dz)
        elif dz > 1e-12:
            cand = min(cand, gc / dz)
        cap = MAX_STEP
        if segs[seg, 5] == 0.0:
            along = dx * tx + dy * ty
            if seg == n_seg - 1 and along > 0.0:
                cap = 1e300
            elif along > 0.05:
                cap = max(MAX_STEP, (segs[seg, 0] + segs[seg, 1] - s) / along)
        t_new = t + min(cand + 2.0 * HIT_TOL, cap)
        if t_new > max_range:
            t_new = max_range
        seg, s, lat, tx, ty = locate(segs, ox + t_new * dx, oy + t_new * dy)
        gl, gr, gf, gc = _gaps_local(tables, grid, w, h, s, lat, oz + t_new * dz)
        g = min(min(gl, gr), min(gf, gc))
        if g <= 0.0:
            t_out = t_new
            g_out = g
            break
        t = t_new
        g_in = g
        if t >= max_range:
            return STATUS_MISS, max_range
    if t_out < 0.0:
        return STATUS_HIT, t
    lo, hi = t, t_out
    glo, ghi = g_in, g_out
    side = 0
    while hi - lo > BISECT_TOL:
        mid = (lo * ghi - hi * glo) / (ghi - glo)
        if not (lo < mid < hi):
            mid = 0.5 * (lo + hi)
        gm = _min_gap(segs, tables, grid, w, h, ox + mid * dx, oy + mid * dy, oz + mid * dz)
        if gm > 0.0:
            lo, glo = mid, gm
            if side == 1:
                ghi *= 0.5
            side = 1
            # probe just past the estimate to close the bracket in one go
            probe = mid + 0.9 * BISECT_TOL
            if probe < hi:
                gp = _min_gap(segs, tables, grid, w, h, ox + probe * dx, oy + probe * dy, oz + probe * dz)
                if gp <= 0.0:
                    hi, ghi = probe, gp
        else:
            hi, ghi = mid, gm
            if side == -1:
                glo *= 0.5
            side = -1
            probe = mid - 0.9 * BISECT_TOL
            if probe > lo:
                gp = _min_gap(segs, tables, grid, w, h, ox + probe * dx, oy + probe * dy, oz + probe * dz)
                if gp > 0.0:
                    lo, glo = probe, gp
    return STATUS_HIT, 0.5 * (lo + hi)


@njit(cache=True)
def render(segs, tables, grid, w, h, cx, cy, cz, yaw, hfov, width, height,
           gain, ambient, falloff, max_range, out):
    """Headlamp-lit pinhole render into ``out`` (float gray levels, unclamped noise-free)."""
    focal = 0.5 * width / math.tan(0.5 * hfov)
    seg, s, lat, tx, ty = locate(segs, cx, cy)
    gl, gr, gf, gc = _gaps_local(tables, grid, w, h, s, lat, cz)
    fx, fy = math.cos(yaw), math.sin(yaw)
    rx, ry = fy, -fx
    for i in range(height):
        yc = (0.5 * height - i - 0.5) / focal
        for j in range(width):
            xc = (j + 0.5 - 0.5 * width) / focal
            dx = fx + xc * rx
            dy = fy + xc * ry
            dz = yc
            norm = math.sqrt(dx * dx + dy * dy + dz * dz)
            dx /= norm
            dy /= norm
            dz /= norm
            status, t = _trace_from(segs, tables, grid, w, h, cx, cy, cz, dx, dy, dz, max_range,
                                    seg, s, lat, tx, ty, gl, gr, gf, gc)
            val = ambient
            if status == STATUS_HIT:
                nx, ny, nz = _surface_normal(segs, tables, grid, w, h, cx + t * dx, cy + t * dy, cz + t * dz)
                cos_inc = dx * nx + dy * ny + dz * nz
                if cos_inc > 0.0:
                    q = t / falloff
                    val += gain * cos_inc / (1.0 + q * q)
            out[i, j] = min(max(val, 0.0), 255.0)


@njit(cache=True)
def lidar(segs, tables, grid, w, h, x, y, z, yaw, bearings, max_range, out):
    seg, s, lat, tx, ty = locate(segs, x, y)
    gl, gr, gf, gc = _gaps_local(tables, grid, w, h, s, lat, z)
    for k in range(bearings.shape[0]):
        a = yaw + bearings[k]
        status, t = _trace_from(segs, tables, grid, w, h, x, y, z, math.cos(a), math.sin(a), 0.0, max_range,
                                seg, s, lat, tx, ty, gl, gr, gf, gc)
        out[k] = t if status == STATUS_HIT else max_range
