"""Sampling sets and the quasi-interpolation operators Q, S and V."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .geometry import BoxDomain, Cells, as_points, covering_radius, duplicate_groups, merge_tolerance, voronoi_cells
from .spaces import Basis, HatFamily

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DensityCertificate:
    passed: bool
    delta: float
    covering_radius: float
    worst_point: np.ndarray
    probe_resolution: float

    def to_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "delta": float(self.delta),
            "covering_radius": float(self.covering_radius),
            "worst_point": [float(v) for v in np.atleast_1d(self.worst_point)],
            "probe_resolution": float(self.probe_resolution),
        }


def check_delta_dense(nodes, domain: BoxDomain, delta: float, probe_resolution: float | None = None) -> DensityCertificate:
    """Probe-grid certificate that the ``delta``-balls around the nodes cover the domain."""
    if probe_resolution is None:
        probe_resolution = delta / 4
    if probe_resolution > delta / 4 * (1 + 1e-12):
        raise ValueError("probe resolution must be at most delta / 4")
    pts = as_points(nodes, domain.d)
    if len(pts) == 0:
        return DensityCertificate(False, delta, np.inf, np.full(domain.d, np.nan), probe_resolution)
    radius, worst = covering_radius(pts, domain, probe_resolution)
    return DensityCertificate(radius <= delta, delta, radius, worst, probe_resolution)


def voronoi_partition(nodes, domain: BoxDomain) -> Cells:
    return voronoi_cells(nodes, domain)


@dataclass
class SamplingSet:
    """Nodes in a box with their Voronoi cells.

    ``delta`` defaults to the probe-grid covering radius, i.e. the smallest
    radius for which the node set certifies as dense.
    """

    nodes: np.ndarray
    domain: BoxDomain
    delta: float | None = None
    cells: Cells = field(init=False)

    def __post_init__(self):
        self.nodes = as_points(self.nodes, self.domain.d)
        if not np.all(self.domain.contains(self.nodes, tol=1e-12)):
            raise ValueError("nodes must lie in the domain")
        self.cells = voronoi_cells(self.nodes, self.domain)
        if self.delta is None:
            res = min(self.domain.lengths) / 2048
            self.delta = covering_radius(self.nodes, self.domain, res)[0] + res

    def __len__(self) -> int:
        return len(self.nodes)

    def certificate(self, delta: float | None = None, probe_resolution: float | None = None) -> DensityCertificate:
        return check_delta_dense(self.nodes, self.domain, self.delta if delta is None else delta, probe_resolution)

    def owner(self, points) -> np.ndarray:
        """Index of the cell containing each point (nearest node)."""
        keep = duplicate_groups(self.nodes, merge_tolerance(self.domain)) == np.arange(len(self.nodes))
        idx = np.nonzero(keep)[0]
        _, near = cKDTree(self.nodes[idx]).query(as_points(points, self.domain.d))
        return idx[near]

    def samples(self, f) -> "SampleVector":
        """Evaluate a callable ``f(points)`` at the nodes."""
        pts = self.nodes[:, 0] if self.domain.d == 1 else self.nodes
        return SampleVector(np.asarray(f(pts), dtype=float), "measured")

    def hats(self) -> HatFamily:
        return HatFamily(self.nodes[:, 0], self.domain)


@dataclass
class SampleVector:
    values: np.ndarray
    source: str = "measured"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def check_duplicate_values(sset: SamplingSet, values, tol: float = 0.0) -> None:
    """Reject samples that disagree at coincident nodes."""
    values = np.asarray(values)
    owner = duplicate_groups(sset.nodes, merge_tolerance(sset.domain))
    bad = np.abs(values - values[owner]) > tol
    if np.any(bad):
        raise ValueError(f"conflicting samples at {int(bad.sum())} coincident node(s)")


def quasi_interpolate_Q(samples, sset: SamplingSet, x, psi: str = "voronoi") -> np.ndarray:
    """``sum_l f(x_l) psi_l(x)`` with Voronoi indicators (default) or hats."""
    values = np.asarray(samples, dtype=float)
    if psi == "voronoi":
        return values[sset.owner(x)]
    if psi == "hat":
        return sset.hats().values(x) @ values
    raise ValueError(f"unknown partition of unity {psi!r}")


def quasi_interpolate_V(samples, sset: SamplingSet, x) -> np.ndarray:
    """Piecewise constant Voronoi interpolation (``Q`` with cell indicators)."""
    return quasi_interpolate_Q(samples, sset, x, "voronoi")


def default_xi(basis: Basis) -> np.ndarray:
    """Midpoints of the (domain-clipped) element supports."""
    box = basis.supports()
    mid = box.mean(axis=2)
    return mid[:, 0] if basis.d == 1 else mid


def quasi_interpolate_S(samples, basis: Basis, x, xi=None) -> np.ndarray:
    """``2^{-dj/2} sum_k f(xi_k) phi_{j,k}(x)`` with ``xi_k`` in supp phi_{j,k}."""
    values = np.asarray(samples, dtype=float)
    if len(values) != len(basis):
        raise ValueError("need one sample per basis element")
    if xi is not None:
        p = as_points(xi, basis.d)
        box = basis.supports()
        ok = np.all((p >= box[:, :, 0] - 1e-12) & (p <= box[:, :, 1] + 1e-12), axis=1)
        if not np.all(ok):
            raise ValueError(f"sampling points outside element supports: {np.nonzero(~ok)[0].tolist()}")
    return basis.normalization * (basis.evaluate(x) @ values)


def s_as_sampling_set(basis: Basis, xi=None):
    """Nodes ``xi_k`` and the weights ``2^{-dj/2} phi_{j,k}`` playing the role of psi."""
    xi = default_xi(basis) if xi is None else np.asarray(xi, dtype=float)
    return xi, lambda x: basis.normalization * basis.evaluate(x)


def oscillation(f, delta: float, grid, domain: BoxDomain | None = None) -> float:
    """``sup_x sup_{|y - x| <= delta} |f(x) - f(y)|`` over a regular grid.

    ``grid`` is a 1-D array of equally spaced points, or a pair of such axes
    in 2-D; ``f`` is evaluated on it.  The grid spacing must be at most
    ``delta / 8``.
    """
    if isinstance(grid, (tuple, list)) and len(grid) == 2:
        xs, ys = (np.asarray(g, dtype=float) for g in grid)
        hx, hy = xs[1] - xs[0], ys[1] - ys[0]
        if max(hx, hy) > delta / 8 * (1 + 1e-12):
            raise ValueError("grid spacing must be at most delta / 8")
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        vals = np.asarray(f(np.column_stack([X.ravel(), Y.ravel()])), dtype=float).reshape(X.shape)
        rx, ry = int(np.floor(delta / hx + 1e-9)), int(np.floor(delta / hy + 1e-9))
        ii, jj = np.meshgrid(np.arange(-rx, rx + 1), np.arange(-ry, ry + 1), indexing="ij")
        foot = (ii * hx) ** 2 + (jj * hy) ** 2 <= delta**2 * (1 + 1e-12)
        hi = ndimage.maximum_filter(vals, footprint=foot, mode="nearest")
        lo = ndimage.minimum_filter(vals, footprint=foot, mode="nearest")
    else:
        xs = np.asarray(grid, dtype=float)
        hx = xs[1] - xs[0]
        if hx > delta / 8 * (1 + 1e-12):
            raise ValueError("grid spacing must be at most delta / 8")
        vals = np.asarray(f(xs), dtype=float)
        r = int(np.floor(delta / hx + 1e-9))
        hi = ndimage.maximum_filter1d(vals, 2 * r + 1, mode="nearest")
        lo = ndimage.minimum_filter1d(vals, 2 * r + 1, mode="nearest")
    return float(np.maximum(hi - vals, vals - lo).max())


def oscillation_constant(basis: Basis, G=None, resolution: int = 64) -> float:
    """Measured ``C_j`` with ``osc_delta(f) <= C_j * delta * ||f||_2`` on ``V_j``.

    ``|f(x) - f(y)| <= delta * ||c||_inf * max_x sum_k |grad phi_k(x)|`` and
    ``||c||_inf <= lambda_min(G)^{-1/2} ||f||_2``.  The maximum over ``x``
    is taken on a grid with ``resolution`` points per level-j cell.
    """
    from .spaces import gramian

    G = gramian(basis).matrix if G is None else np.asarray(G, dtype=float)
    lam_min = float(np.linalg.eigvalsh(G)[0])
    step = 2.0 ** (-basis.level) / resolution
    pts = basis.domain.grid(step)
    grads = np.linalg.norm(basis.gradients(pts), axis=2)
    return float(np.abs(grads).sum(axis=1).max() / np.sqrt(lam_min))
