"""Procedural S-shaped tunnel: centerline, rectangular cross-section and
seeded wall roughness."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _geometry as G

ROUGHNESS_GRID_STEP = 0.1
ROUGHNESS_MARGIN = 60.0


@dataclass(frozen=True)
class TunnelParams:
    """Tunnel dimensions in meters; ``arc_angle_deg`` is the turn of each arc.

    The centerline is straight, arc left, arc right, straight.
    """

    width: float = 6.0
    height: float = 4.0
    length: float = 300.0
    arc_radius: float = 40.0
    arc_angle_deg: float = 45.0
    roughness: float = 0.1
    roughness_min_wavelength: float = 1.5
    roughness_max_wavelength: float = 8.0
    seed: int = 0

    def validate(self) -> None:
        if not (self.width > 0 and self.height > 0 and self.length > 0):
            raise ValueError(f"tunnel dimensions must be positive (width={self.width}, "
                             f"height={self.height}, length={self.length})")
        if self.arc_radius <= self.width / 2:
            raise ValueError("arc_radius must exceed half the tunnel width")
        if not 0 <= self.arc_angle_deg < 90:
            raise ValueError("arc_angle_deg must lie in [0, 90)")
        if not 0 <= self.roughness < self.width / 4:
            raise ValueError("roughness must lie in [0, width/4)")
        if self.roughness >= self.height / 4:
            raise ValueError("roughness must be below height/4")
        if not 0 < self.roughness_min_wavelength <= self.roughness_max_wavelength:
            raise ValueError("invalid roughness wavelength range")
        if 2 * self.arc_length > self.length:
            raise ValueError("the two arcs are longer than the tunnel")

    @property
    def arc_length(self) -> float:
        return self.arc_radius * math.radians(self.arc_angle_deg)


@dataclass(eq=False)
class TunnelMap:
    params: TunnelParams
    segments: np.ndarray = field(repr=False)
    tables: np.ndarray = field(repr=False)
    grid: np.ndarray = field(repr=False)

    @property
    def width(self) -> float:
        return self.params.width

    @property
    def height(self) -> float:
        return self.params.height

    @property
    def length(self) -> float:
        return self.params.length

    @property
    def seed(self) -> int:
        return self.params.seed

    def centerline(self, s):
        """Centerline points and tangent headings at arclength(s) ``s``.

        Returns (x, y, heading) arrays shaped like ``s``.
        """
        s = np.asarray(s, dtype=np.float64)
        flat = s.ravel()
        out = np.empty((flat.size, 3))
        for i, si in enumerate(flat):
            out[i] = G.centerline_point(self.segments, si)
        return tuple(out[:, k].reshape(s.shape) for k in range(3))

    def pose_at(self, s, lateral=0.0):
        """World (x, y) at arclength ``s`` offset ``lateral`` meters to the left."""
        x, y, psi = G.centerline_point(self.segments, float(s))
        return x - lateral * math.sin(psi), y + lateral * math.cos(psi), psi

    def local(self, x, y):
        """(s, lateral offset, tangent heading) of a world point."""
        s, l, tx, ty = G.local_coords(self.segments, float(x), float(y))
        return s, l, math.atan2(ty, tx)

    def gaps(self, x, y, z):
        """Distances to left wall, right wall, floor and ceiling (negative outside)."""
        return G.gaps(self.segments, self.tables, self.grid, self.width, self.height, float(x), float(y), float(z))

    def cast_ray(self, origin, direction, max_range: float = 50.0):
        """First wall hit along a ray from an inside point.

        Returns (distance, outward unit normal) or None when nothing is hit
        within ``max_range``. Raises ValueError if the origin is not inside.
        """
        ox, oy, oz = (float(v) for v in origin)
        d = np.asarray(direction, dtype=np.float64)
        norm = float(np.linalg.norm(d))
        if d.shape != (3,) or not norm > 0:
            raise ValueError("direction must be a nonzero 3-vector")
        dx, dy, dz = d / norm
        status, t = G.trace(self.segments, self.tables, self.grid, self.width, self.height,
                            ox, oy, oz, dx, dy, dz, float(max_range))
        if status == G.STATUS_OUTSIDE:
            raise ValueError(f"ray origin ({ox}, {oy}, {oz}) is outside the tunnel")
        if status == G.STATUS_MISS:
            return None
        normal = G._surface_normal(self.segments, self.tables, self.grid, self.width, self.height,
                                   ox + t * dx, oy + t * dy, oz + t * dz)
        return t, np.array(normal)

    def contains(self, x, y, z) -> bool:
        return min(self.gaps(x, y, z)) > 0

    def describe(self) -> dict:
        return asdict(self.params)


def _segment_table(p: TunnelParams) -> np.ndarray:
    arc = p.arc_length
    straight = (p.length - 2 * arc) / 2
    kappa = 1.0 / p.arc_radius if p.arc_angle_deg > 0 else 0.0
    pieces = [(straight, 0.0)]
    if arc > 0:
        pieces += [(arc, kappa), (arc, -kappa)]
    pieces.append((straight, 0.0))
    rows = []
    s0 = x0 = y0 = psi0 = 0.0
    for seg_len, k in pieces:
        if k == 0:
            cx = cy = 0.0
        else:
            cx = x0 - math.sin(psi0) / k
            cy = y0 + math.cos(psi0) / k
        if k == 0:
            ex = ey = 0.0
        else:
            sigma = math.copysign(1.0, k)
            psi_end = psi0 + k * seg_len
            ex, ey = sigma * math.sin(psi_end), -sigma * math.cos(psi_end)
        rows.append((s0, seg_len, x0, y0, psi0, k, cx, cy, math.cos(psi0), math.sin(psi0), ex, ey))
        if k == 0:
            x0 += seg_len * math.cos(psi0)
            y0 += seg_len * math.sin(psi0)
        else:
            psi1 = psi0 + k * seg_len
            x0 = cx + math.sin(psi1) / k
            y0 = cy - math.cos(psi1) / k
            psi0 = psi1
        s0 += seg_len
    return np.array(rows, dtype=np.float64)


def _roughness_tables(p: TunnelParams):
    """Bilinear lookup tables of outward wall displacement.

    Surfaces: 0 left wall, 1 right wall (indexed by s and z), 2 floor,
    3 ceiling (indexed by s and lateral offset).
    """
    ds = ROUGHNESS_GRID_STEP
    s_min = -ROUGHNESS_MARGIN
    ns = int(math.ceil((p.length + 2 * ROUGHNESS_MARGIN) / ds)) + 1
    u_half = max(p.width, p.height) / 2 + 1.0
    nu = int(math.ceil(2 * u_half / ds)) + 1
    # walls index u = z - height/2, floor/ceiling index u = lateral offset;
    # grid[7] flags a rough surface, grid[8] is 1 / ds
    grid = np.array([s_min, ds, ns, -u_half, ds, nu, p.height / 2, float(p.roughness > 0), 1.0 / ds],
                    dtype=np.float64)
    tables = np.zeros((4, ns, nu))
    if p.roughness > 0:
        rng = np.random.default_rng(p.seed)
        s = s_min + ds * np.arange(ns)
        u = -u_half + ds * np.arange(nu)
        n_waves = 12
        for surf in range(4):
            wavelength = rng.uniform(p.roughness_min_wavelength, p.roughness_max_wavelength, n_waves)
            direction = rng.uniform(0, 2 * np.pi, n_waves)
            phase = rng.uniform(0, 2 * np.pi, n_waves)
            amp = rng.uniform(0.5, 1.0, n_waves)
            field_ = np.zeros((ns, nu))
            for k in range(n_waves):
                ks = 2 * np.pi / wavelength[k] * np.cos(direction[k])
                ku = 2 * np.pi / wavelength[k] * np.sin(direction[k])
                field_ += amp[k] * np.sin(ks * s[:, None] + ku * u[None, :] + phase[k])
            tables[surf] = p.roughness * field_ / np.abs(field_).max()
    return tables, grid


def generate_tunnel(seed: int = 0, params: TunnelParams | None = None, **overrides) -> TunnelMap:
    """Build the tunnel; geometry is a deterministic function of the seed and params."""
    base = params or TunnelParams()
    p = TunnelParams(**{**asdict(base), **overrides, "seed": seed})
    p.validate()
    segments = _segment_table(p)
    tables, grid = _roughness_tables(p)
    return TunnelMap(p, segments, tables, grid)


def max_heading_change(tunnel: TunnelMap, step: float = 0.5) -> float:
    s = np.arange(0.0, tunnel.length + step, step)
    _, _, psi = tunnel.centerline(s)
    return float(np.max(np.abs(psi - psi[0])))
