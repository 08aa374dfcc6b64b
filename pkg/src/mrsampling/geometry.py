"""Box domains, Voronoi cells and quadrature over cells."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box ``prod_i [lo_i, hi_i]`` in one or two dimensions."""

    bounds: tuple

    def __post_init__(self):
        b = tuple((float(a), float(c)) for a, c in self.bounds)
        if not 1 <= len(b) <= 2:
            raise ValueError("only d = 1 and d = 2 are supported")
        for a, c in b:
            if not c > a:
                raise ValueError(f"empty interval [{a}, {c}]")
        object.__setattr__(self, "bounds", b)

    @classmethod
    def interval(cls, a: float, b: float) -> "BoxDomain":
        return cls(((a, b),))

    @classmethod
    def square(cls, a: float, b: float) -> "BoxDomain":
        return cls(((a, b), (a, b)))

    @property
    def d(self) -> int:
        return len(self.bounds)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([c - a for a, c in self.bounds])

    @property
    def measure(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.lengths))

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        p = as_points(points, self.d)
        ok = np.ones(len(p), dtype=bool)
        for i, (a, c) in enumerate(self.bounds):
            ok &= (p[:, i] >= a - tol) & (p[:, i] <= c + tol)
        return ok

    def grid(self, spacing: float) -> np.ndarray:
        """Regular grid with step at most ``spacing`` including the boundary."""
        axes = []
        for a, c in self.bounds:
            count = int(np.ceil((c - a) / spacing - 1e-12)) + 1
            axes.append(np.linspace(a, c, count))
        if self.d == 1:
            return axes[0][:, None]
        X, Y = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def uniform(self, rng: np.random.Generator, count: int) -> np.ndarray:
        lo = np.array([a for a, _ in self.bounds])
        return lo + rng.random((count, self.d)) * self.lengths

    def polygon(self) -> np.ndarray:
        (a, b), (c, d) = self.bounds
        return np.array([[a, c], [b, c], [b, d], [a, d]])


def as_points(points, d: int) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    if d == 1:
        return p.reshape(-1, 1)
    return p.reshape(-1, d)


# --- convex polygons ---------------------------------------------------------


def clip_halfplane(poly: np.ndarray, normal, offset: float) -> np.ndarray:
    """Keep the part of a convex polygon with ``normal . x <= offset``."""
    if len(poly) == 0:
        return poly
    s = poly @ np.asarray(normal, dtype=float) - offset
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        sp, sq = s[i], s[(i + 1) % n]
        if sp <= 0:
            out.append(p)
        if (sp < 0 < sq) or (sq < 0 < sp):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.array(out) if out else np.empty((0, 2))


def clip_box(poly: np.ndarray, x0, x1, y0, y1) -> np.ndarray:
    for normal, off in (((-1, 0), -x0), ((1, 0), x1), ((0, -1), -y0), ((0, 1), y1)):
        poly = clip_halfplane(poly, normal, off)
        if len(poly) < 3:
            return np.empty((0, 2))
    return poly


def polygon_area(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@lru_cache(maxsize=None)
def _triangle_rule(order: int):
    """Collapsed Gauss rule on the reference triangle (exact to degree 2*order-2)."""
    g, w = np.polynomial.legendre.leggauss(order)
    g = 0.5 * (g + 1.0)
    w = 0.5 * w
    U, V = np.meshgrid(g, g, indexing="ij")
    WU, WV = np.meshgrid(w, w, indexing="ij")
    # (u, v) in unit square -> (s, t) = (u, v (1 - u)) in the triangle
    s = U.ravel()
    t = (V * (1.0 - U)).ravel()
    weights = (WU * WV * (1.0 - U)).ravel()
    return s, t, weights


def polygon_quadrature(poly: np.ndarray, order: int = 6):
    """Points and weights integrating over a convex polygon (fan triangulation)."""
    if len(poly) < 3:
        return np.empty((0, 2)), np.empty(0)
    s, t, w = _triangle_rule(order)
    pts, wts = [], []
    p0 = poly[0]
    for i in range(1, len(poly) - 1):
        e1 = poly[i] - p0
        e2 = poly[i + 1] - p0
        jac = abs(e1[0] * e2[1] - e1[1] * e2[0])
        if jac == 0.0:
            continue
        pts.append(p0 + np.outer(s, e1) + np.outer(t, e2))
        wts.append(w * jac)
    if not pts:
        return np.empty((0, 2)), np.empty(0)
    return np.vstack(pts), np.concatenate(wts)


def split_by_grid(poly: np.ndarray, xs: np.ndarray, ys: np.ndarray):
    """Pieces of a convex polygon cut along the grid lines ``xs`` and ``ys``."""
    lo = poly.min(axis=0)
    hi = poly.max(axis=0)
    ix = np.arange(max(np.searchsorted(xs, lo[0], "right") - 1, 0), min(np.searchsorted(xs, hi[0], "left"), len(xs) - 1))
    iy = np.arange(max(np.searchsorted(ys, lo[1], "right") - 1, 0), min(np.searchsorted(ys, hi[1], "left"), len(ys) - 1))
    pieces = []
    for i in ix:
        strip = clip_halfplane(clip_halfplane(poly, (-1, 0), -xs[i]), (1, 0), xs[i + 1])
        if len(strip) < 3:
            continue
        for k in iy:
            piece = clip_halfplane(clip_halfplane(strip, (0, -1), -ys[k]), (0, 1), ys[k + 1])
            if len(piece) >= 3 and polygon_area(piece) > 0:
                pieces.append(piece)
    return pieces


# --- Voronoi cells -----------------------------------------------------------


@dataclass(frozen=True)
class Cells:
    """Voronoi decomposition of a box.

    In 1-D ``intervals`` is an ``(M, 2)`` array of cell endpoints; in 2-D
    ``polygons`` lists one convex polygon per node (possibly empty for a
    duplicated node).
    """

    domain: BoxDomain
    nodes: np.ndarray
    intervals: np.ndarray | None = None
    polygons: tuple | None = None

    def __len__(self) -> int:
        return len(self.nodes)

    def measures(self) -> np.ndarray:
        if self.domain.d == 1:
            return self.intervals[:, 1] - self.intervals[:, 0]
        return np.array([abs(polygon_area(p)) for p in self.polygons])


def merge_tolerance(domain: BoxDomain) -> float:
    return 1e-12 * domain.diameter


def duplicate_groups(nodes: np.ndarray, tol: float):
    """Map each node to the first node within ``tol`` of it."""
    owner = np.arange(len(nodes))
    for i in range(len(nodes)):
        if owner[i] != i:
            continue
        close = np.linalg.norm(nodes[i + 1 :] - nodes[i], axis=1) < tol
        idx = np.nonzero(close)[0] + i + 1
        owner[idx] = np.where(owner[idx] == idx, i, owner[idx])
    return owner


def voronoi_cells(nodes, domain: BoxDomain) -> Cells:
    """Nearest-node cells clipped to the domain.

    Nodes closer than ``1e-12 * diam`` to an earlier node get an empty cell
    (the earlier node owns the region).
    """
    pts = as_points(nodes, domain.d)
    if len(pts) == 0:
        raise ValueError("empty node set")
    owner = duplicate_groups(pts, merge_tolerance(domain))
    if np.any(owner != np.arange(len(pts))):
        log.warning("merged %d coincident node(s)", int(np.sum(owner != np.arange(len(pts)))))
    if domain.d == 1:
        (a, b), = domain.bounds
        keep = np.nonzero(owner == np.arange(len(pts)))[0]
        x = pts[keep, 0]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        mids = 0.5 * (xs[1:] + xs[:-1])
        left = np.concatenate([[a], mids])
        right = np.concatenate([mids, [b]])
        intervals = np.zeros((len(pts), 2))
        intervals[:, :] = np.nan
        intervals[keep[order], 0] = left
        intervals[keep[order], 1] = right
        dup = owner != np.arange(len(pts))
        intervals[dup] = intervals[owner[dup]][:, [1, 1]]
        return Cells(domain, pts, intervals=intervals)
    box = domain.polygon()
    polys = []
    for i, p in enumerate(pts):
        if owner[i] != i:
            polys.append(np.empty((0, 2)))
            continue
        poly = box
        for k, q in enumerate(pts):
            if k == i or owner[k] != k:
                continue
            normal = q - p
            poly = clip_halfplane(poly, normal, float(normal @ (0.5 * (p + q))))
            if len(poly) < 3:
                break
        polys.append(poly)
    return Cells(domain, pts, polygons=tuple(polys))


def covering_radius(nodes, domain: BoxDomain, probe_resolution: float):
    """Largest probe-to-nearest-node distance and the probe attaining it."""
    from scipy.spatial import cKDTree

    pts = as_points(nodes, domain.d)
    probes = domain.grid(probe_resolution)
    dist, _ = cKDTree(pts).query(probes)
    i = int(np.argmax(dist))
    return float(dist[i]), probes[i]
