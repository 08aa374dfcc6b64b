"""Level-j spaces on boxes spanned by restricted translates of a refinable function.

The level-j elements on an interval ``[a, b]`` are

    phi_{j,k}(x) = 2^{j/2} phi(2^j (x - a) - k),   restricted to [a, b],

for every shift ``k`` whose support meets the open interval, so that
``2^{-j/2} sum_k phi_{j,k} = 1`` on the domain.  Bivariate spaces are tensor
products.  The module also assembles Gramians, canonical and compactly
supported duals, and the matrix of inner products between a partition of
unity and the dual elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.interpolate import BSpline

from .geometry import BoxDomain, Cells, as_points, polygon_quadrature, split_by_grid
from .refinable import DEFAULT_LEVEL, DyadicFunction, Mask, cascade_evaluate


class QuadratureError(RuntimeError):
    pass


class SingularGramianError(np.linalg.LinAlgError):
    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


# --- mother functions --------------------------------------------------------


class BSplineMother:
    """Cardinal B-spline of the given degree on ``[s0, s0 + degree + 1]``."""

    piecewise_degree: int

    def __init__(self, degree: int, s0: int = 0):
        self.support = (s0, s0 + degree + 1)
        self.piecewise_degree = degree
        self.breakpoint_step = 1.0
        knots = np.arange(s0, s0 + degree + 2, dtype=float)
        self._f = BSpline.basis_element(knots, extrapolate=False)
        self._df = self._f.derivative() if degree > 0 else None
        self._F = self._f.antiderivative()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s0, s1 = self.support
        out = np.zeros(t.shape)
        inside = (t >= s0) & (t < s1)
        out[inside] = self._f(t[inside])
        return out

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        s0, s1 = self.support
        out = np.zeros(t.shape)
        inside = (t > s0) & (t < s1)
        if self._df is not None:
            out[inside] = self._df(t[inside])
        return out

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        s0, s1 = self.support
        c = np.clip(t, s0, s1)
        out = np.zeros(t.shape)
        inside = c > s0
        # BSpline.basis_element antiderivative is anchored at s0
        out[inside] = self._F(np.minimum(c[inside], np.nextafter(s1, s0)))
        out[c >= s1] = 1.0
        return out


class CascadeMother:
    """Refinable function tabulated by the cascade algorithm.

    Evaluation uses the piecewise linear interpolant, so products of two such
    functions are piecewise quadratic between ``2^-L`` breakpoints.
    """

    piecewise_degree = 1

    def __init__(self, table: DyadicFunction):
        self.table = table
        self.support = table.support
        self.breakpoint_step = table.step

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.asarray(self.table(t), dtype=float).reshape(t.shape)

    def derivative(self, t):
        return self.table.derivative(t)

    def antiderivative(self, t):
        return self.table.antiderivative(t)


def is_bspline_mask(mask: Mask) -> bool:
    """True for binomial masks ``C(d+1, k) / 2^d`` (Haar included)."""
    d = len(mask.coeffs) - 2
    if d < 0:
        return False
    ref = [math.comb(d + 1, k) / 2**d for k in range(d + 2)]
    return all(abs(float(c) - r) <= 1e-15 for c, r in zip(mask.coeffs, ref))


def mother_function(mask: Mask, L: int = DEFAULT_LEVEL, exact_bspline: bool = True):
    """Closed-form B-spline for binomial masks (``h = n``), cascade table otherwise."""
    if exact_bspline and is_bspline_mask(mask):
        return BSplineMother(len(mask.coeffs) - 2, mask.offset)
    return CascadeMother(cascade_evaluate(mask, L))


# --- univariate factor -------------------------------------------------------


class AxisBasis:
    """Restricted level-j translates on one interval."""

    def __init__(self, mother, level: int, interval, shifts=None, mask: Mask | None = None):
        a, b = map(float, interval)
        cells = (b - a) * 2**level
        if abs(cells - round(cells)) > 1e-9 or round(cells) < 1:
            raise ValueError(f"interval length {b - a} is not a multiple of 2^-{level}")
        self.mother = mother
        self.mask = mask
        self.level = int(level)
        self.interval = (a, b)
        self.cells = int(round(cells))
        s0, s1 = mother.support
        if shifts is None:
            shifts = np.arange(1 - s1, self.cells - s0)
        self.shifts = np.asarray(shifts, dtype=int)
        self.scale = 2.0**self.level

    def __len__(self) -> int:
        return len(self.shifts)

    def _t(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        return self.scale * (x - self.interval[0]), x

    def _inside(self, x):
        a, b = self.interval
        return (x >= a) & (x <= b)

    def values(self, x) -> np.ndarray:
        t, x = self._t(x)
        out = np.sqrt(self.scale) * self.mother(t[:, None] - self.shifts[None, :])
        out[~self._inside(x)] = 0.0
        # closed right end: take the left limit at b
        at_end = x == self.interval[1]
        if np.any(at_end):
            tt = np.nextafter(t[at_end], -np.inf)
            out[at_end] = np.sqrt(self.scale) * self.mother(tt[:, None] - self.shifts[None, :])
        return out

    def derivatives(self, x) -> np.ndarray:
        t, x = self._t(x)
        out = self.scale**1.5 * self.mother.derivative(t[:, None] - self.shifts[None, :])
        out[~self._inside(x)] = 0.0
        return out

    def integrals(self, lo, hi) -> np.ndarray:
        """``int_lo^hi phi_{j,k}`` for each pair of endpoints, shape ``(N, P)``."""
        a, b = self.interval
        lo = np.clip(np.asarray(lo, dtype=float).reshape(-1), a, b)
        hi = np.clip(np.asarray(hi, dtype=float).reshape(-1), a, b)
        tl = self.scale * (lo - a)
        th = self.scale * (hi - a)
        F = self.mother.antiderivative
        k = self.shifts[:, None]
        return (F(th[None, :] - k) - F(tl[None, :] - k)) / np.sqrt(self.scale)

    def breakpoints(self) -> np.ndarray:
        a, b = self.interval
        step = self.mother.breakpoint_step / self.scale
        count = int(round((b - a) / step))
        return a + step * np.arange(count + 1)

    def supports(self) -> np.ndarray:
        a, b = self.interval
        s0, s1 = self.mother.support
        lo = np.maximum(a + (self.shifts + s0) / self.scale, a)
        hi = np.minimum(a + (self.shifts + s1) / self.scale, b)
        return np.column_stack([lo, hi])


@dataclass
class Basis:
    """Level-j basis on a box; one :class:`AxisBasis` per dimension.

    Element ``(k1, k2)`` of a tensor basis has flat index ``k1 * N2 + k2``.
    """

    axes: tuple
    domain: BoxDomain = field(init=False)

    def __post_init__(self):
        self.axes = tuple(self.axes)
        levels = {ax.level for ax in self.axes}
        if len(levels) != 1:
            raise ValueError("tensor factors must share the level")
        self.domain = BoxDomain(tuple(ax.interval for ax in self.axes))

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def level(self) -> int:
        return self.axes[0].level

    @property
    def shape(self) -> tuple:
        return tuple(len(ax) for ax in self.axes)

    def __len__(self) -> int:
        return int(np.prod(self.shape))

    @property
    def normalization(self) -> float:
        """``2^{-dj/2}``: scaling that turns the elements into a partition of unity."""
        return 2.0 ** (-self.d * self.level / 2)

    def evaluate(self, points) -> np.ndarray:
        """Matrix ``(phi_k(x_p))`` of shape ``(P, N)``."""
        p = as_points(points, self.d)
        out = self.axes[0].values(p[:, 0])
        for i in range(1, self.d):
            v = self.axes[i].values(p[:, i])
            out = (out[:, :, None] * v[:, None, :]).reshape(len(p), -1)
        return out

    def gradients(self, points) -> np.ndarray:
        """Array ``(P, N, d)`` of partial derivatives."""
        p = as_points(points, self.d)
        vals = [ax.values(p[:, i]) for i, ax in enumerate(self.axes)]
        ders = [ax.derivatives(p[:, i]) for i, ax in enumerate(self.axes)]
        if self.d == 1:
            return ders[0][:, :, None]
        gx = (ders[0][:, :, None] * vals[1][:, None, :]).reshape(len(p), -1)
        gy = (vals[0][:, :, None] * ders[1][:, None, :]).reshape(len(p), -1)
        return np.stack([gx, gy], axis=-1)

    def expand(self, coeffs, points) -> np.ndarray:
        return self.evaluate(points) @ np.asarray(coeffs)

    def integrals(self) -> np.ndarray:
        """``int_Omega phi_k`` for every element."""
        out = np.ones(1)
        for ax in self.axes:
            a, b = ax.interval
            out = np.kron(out, ax.integrals([a], [b])[:, 0])
        return out

    def supports(self) -> np.ndarray:
        """Support boxes, shape ``(N, d, 2)``."""
        per_axis = [ax.supports() for ax in self.axes]
        if self.d == 1:
            return per_axis[0][:, None, :]
        sx, sy = per_axis
        n1, n2 = len(sx), len(sy)
        return np.stack([np.repeat(sx, n2, axis=0), np.tile(sy, (n1, 1))], axis=1)

    def breakpoints(self) -> tuple:
        return tuple(ax.breakpoints() for ax in self.axes)

    def overlap_counts(self) -> np.ndarray:
        """Number of elements whose support meets each element's support."""
        box = self.supports()
        lo, hi = box[:, :, 0], box[:, :, 1]
        meet = np.ones((len(box), len(box)), dtype=bool)
        for i in range(self.d):
            meet &= (lo[:, None, i] < hi[None, :, i]) & (lo[None, :, i] < hi[:, None, i])
        return meet.sum(axis=1)


def build_interval_basis(mask: Mask, j: int, domain, L: int = DEFAULT_LEVEL, exact_bspline: bool = True) -> Basis:
    """Restricted translates of the refinable function of ``mask`` at level ``j``."""
    if isinstance(domain, BoxDomain):
        if domain.d != 1:
            raise ValueError("build_interval_basis needs a 1-D domain")
        interval = domain.bounds[0]
    else:
        interval = domain
    return Basis((AxisBasis(mother_function(mask, L, exact_bspline), j, interval, mask=mask),))


def tensor_basis(bx: Basis, by: Basis) -> Basis:
    if bx.d != 1 or by.d != 1:
        raise ValueError("tensor_basis combines two univariate bases")
    return Basis((bx.axes[0], by.axes[0]))


def refinement_matrix(coarse: Basis, fine: Basis) -> np.ndarray:
    """``A`` with ``Phi_{j-1} = A Phi_j`` on the domain (univariate, same mask)."""
    if coarse.d != 1 or fine.d != 1 or fine.level != coarse.level + 1:
        raise ValueError("need univariate bases at consecutive levels")
    mask = coarse.axes[0].mask
    if mask is None:
        raise ValueError("basis was not built from a mask")
    a = dict(zip(mask.indices.tolist(), mask.as_array()))
    cs = coarse.axes[0].shifts
    fs = fine.axes[0].shifts
    A = np.zeros((len(cs), len(fs)))
    for r, k in enumerate(cs):
        for c, m in enumerate(fs):
            A[r, c] = a.get(int(m - 2 * k), 0.0) / np.sqrt(2.0)
    return A


# --- Gramians and duals ------------------------------------------------------


@dataclass
class GramianMatrix:
    matrix: np.ndarray
    quad_order: int
    subintervals: int
    max_refinement_change: float = 0.0

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    @property
    def shape(self):
        return self.matrix.shape


def _gauss_on(breaks: np.ndarray, order: int):
    return _gauss_on_intervals(breaks[:-1], breaks[1:], order)


def _gauss_on_intervals(a: np.ndarray, b: np.ndarray, order: int):
    g, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    pts = (0.5 * (a + b))[:, None] + half[:, None] * g[None, :]
    wts = half[:, None] * w[None, :]
    return pts.ravel(), wts.ravel()


def _cross_gram_1d(ax_a: AxisBasis, ax_b: AxisBasis, order: int, refine: int = 1) -> tuple[np.ndarray, int]:
    breaks = np.union1d(ax_a.breakpoints(), ax_b.breakpoints())
    if refine > 1:
        fine = [np.linspace(l, r, refine + 1)[:-1] for l, r in zip(breaks[:-1], breaks[1:])]
        breaks = np.append(np.concatenate(fine), breaks[-1])
    x, w = _gauss_on(breaks, order)
    Va = sp.csr_matrix(ax_a.values(x))
    Vb = sp.csr_matrix(ax_b.values(x))
    G = (Va.T @ sp.diags(w) @ Vb).toarray()
    return G, len(breaks) - 1


def _order_for(ax_a: AxisBasis, ax_b: AxisBasis, order: int) -> int:
    degree = ax_a.mother.piecewise_degree + ax_b.mother.piecewise_degree
    return min(order, degree // 2 + 1)


def gramian(basis: Basis, order: int = 8, check: bool = True, tol: float = 1e-10) -> GramianMatrix:
    """Gramian ``(<phi_h, phi_k>)`` by composite Gauss-Legendre quadrature.

    Quadrature nodes are placed on every breakpoint interval of the
    piecewise-polynomial elements.  Bivariate Gramians are Kronecker products
    of the univariate ones.
    """
    mats, subs, change = [], 0, 0.0
    for ax in basis.axes:
        q = _order_for(ax, ax, order)
        G, n_sub = _cross_gram_1d(ax, ax, q)
        G = np.triu(G) + np.triu(G, 1).T
        if check:
            G2, _ = _cross_gram_1d(ax, ax, q, refine=2)
            change = max(change, float(np.abs(G2 - G).max()))
            if change > tol:
                raise QuadratureError(f"Gramian changes by {change:.3g} under refinement")
        mats.append(G)
        subs += n_sub
    G = mats[0]
    for M in mats[1:]:
        G = np.kron(G, M)
    return GramianMatrix(G, order, subs, change)


def _as_array(G) -> np.ndarray:
    return np.asarray(G.matrix if isinstance(G, GramianMatrix) else G, dtype=float)


def condition_number(G, tol: float = 1e-10, normalize: bool = False) -> float:
    """Spectral condition number of a symmetric positive definite matrix.

    With ``normalize`` the matrix is first scaled to unit diagonal, i.e. the
    condition number of the Gramian of the L2-normalized elements.
    """
    A = _as_array(G)
    if normalize:
        s = 1.0 / np.sqrt(np.diag(A))
        A = A * s[:, None] * s[None, :]
    lam, vec = scipy.linalg.eigh(A)
    resid = np.linalg.norm(A @ vec - vec * lam, axis=0).max()
    if resid > tol * max(np.linalg.norm(A, 2), 1e-300):
        raise np.linalg.LinAlgError(f"eigen residual {resid:.3g} too large")
    if lam[0] <= 0:
        raise SingularGramianError("matrix is not positive definite", np.inf)
    return float(lam[-1] / lam[0])


def canonical_dual_coeffs(G, max_condition: float = 1e13) -> np.ndarray:
    """Inverse Gramian: row k holds the coordinates of the k-th dual element."""
    A = _as_array(G)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > max_condition:
        raise SingularGramianError(f"Gramian is numerically singular (cond ~ {cond:.3g})", cond)
    inv = np.linalg.inv(A)
    return 0.5 * (inv + inv.T)


class CanonicalDual:
    """Dual basis ``G^{-1} Phi``; generally supported on the whole domain."""

    banded = False

    def __init__(self, basis: Basis, G=None):
        self.basis = basis
        self.gram = G if G is not None else gramian(basis)
        self.coeffs = canonical_dual_coeffs(self.gram)

    def evaluate(self, points) -> np.ndarray:
        return self.basis.evaluate(points) @ self.coeffs.T

    def apply_to_primal_integrals(self, B):
        """Turn integrals against primal elements into integrals against duals."""
        return self.coeffs @ B


def _cut_by_boundary(ax: AxisBasis) -> np.ndarray:
    s0, s1 = ax.mother.support
    return (ax.shifts + s0 < 0) | (ax.shifts + s1 > ax.cells)


def _boundary_cross_gram(ax: AxisBasis, dax: AxisBasis, order: int) -> np.ndarray:
    """``X_hm = <phi_h, phid_m>`` with exact ``delta_hm`` unless both are cut."""
    X = np.eye(len(ax))
    ia = np.nonzero(_cut_by_boundary(ax))[0]
    im = np.nonzero(_cut_by_boundary(dax))[0]
    if len(ia) == 0 or len(im) == 0:
        return X
    sub_a = AxisBasis(ax.mother, ax.level, ax.interval, shifts=ax.shifts[ia])
    sub_d = AxisBasis(dax.mother, dax.level, dax.interval, shifts=dax.shifts[im])
    breaks = np.union1d(ax.breakpoints(), dax.breakpoints())
    # keep only intervals meeting the support of some cut element of each family
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    sa, sd = sub_a.supports(), sub_d.supports()
    hit = (((mid[:, None] > sa[None, :, 0]) & (mid[:, None] < sa[None, :, 1])).any(axis=1)
           & ((mid[:, None] > sd[None, :, 0]) & (mid[:, None] < sd[None, :, 1])).any(axis=1))
    x, w = _gauss_on_intervals(breaks[:-1][hit], breaks[1:][hit], _order_for(ax, dax, order))
    X[np.ix_(ia, im)] = (sub_a.values(x) * w[:, None]).T @ sub_d.values(x)
    return X


class CompactDual:
    """Dual built from restricted translates of a dual refinable function.

    Restriction to the domain destroys biorthogonality near the boundary,
    so the raw dual translates ``phid_m`` (same shifts as the primal) are
    recombined as ``sum_m C_km phid_m`` with ``C = X^{-T}``,
    ``X_hm = <phi_h, phid_m>``.  Whenever one of the two supports lies inside
    the interval the restricted product equals the unrestricted one, which
    is ``delta_hm`` by biorthogonality, so only the block of pairs cut by the
    boundary is computed by quadrature.  ``C`` then differs from the identity
    in that block alone.
    """

    banded = True

    def __init__(self, basis: Basis, dual_mask: Mask, L: int = DEFAULT_LEVEL, drop_tol: float = 1e-15, order: int = 8):
        self.basis = basis
        self.dual_mask = dual_mask
        dual_mother = CascadeMother(cascade_evaluate(dual_mask, L))
        axes = []
        for ax in basis.axes:
            axes.append(AxisBasis(dual_mother, ax.level, ax.interval, shifts=ax.shifts, mask=dual_mask))
        self.raw = Basis(tuple(axes))
        C = None
        for ax, dax in zip(basis.axes, self.raw.axes):
            X = _boundary_cross_gram(ax, dax, order)
            Ci = np.linalg.inv(X).T
            Ci[np.abs(Ci) < drop_tol * np.abs(Ci).max()] = 0.0
            Ci = sp.csr_matrix(Ci)
            C = Ci if C is None else sp.kron(C, Ci, format="csr")
        self.coeffs = C

    def evaluate(self, points) -> np.ndarray:
        return np.asarray(self.coeffs @ self.raw.evaluate(points).T).T

    def apply_to_raw_integrals(self, B):
        return self.coeffs @ B


# --- projector matrix --------------------------------------------------------


@dataclass
class ProjectorMatrix:
    """``M[k, l] = <psi_l, phid_k>``; sparse when the dual is banded."""

    matrix: object
    banded: bool

    @property
    def shape(self):
        return self.matrix.shape

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.asarray(self.matrix)

    @property
    def bandwidth(self) -> int:
        """Half-width of the band holding the nonzeros.

        For a rectangular matrix the row index is mapped onto the column range
        first, so a matrix with ``O(1)`` nonzeros per row near its diagonal
        has ``O(1)`` bandwidth.
        """
        return matrix_bandwidth(self.matrix)


def matrix_bandwidth(A) -> int:
    M = sp.coo_matrix(A)
    if M.nnz == 0:
        return 0
    rows, cols = M.shape
    scale = (cols - 1) / (rows - 1) if rows > 1 else 0.0
    return int(np.ceil(np.abs(M.col - M.row * scale).max() - 1e-9))


def cell_integrals(basis: Basis, cells, order: int = 6) -> np.ndarray:
    """``B[k, l] = int_{Omega_l} phi_k`` (``(N, M)``) for Voronoi cells or hats."""
    if isinstance(cells, HatFamily):
        return cells.integrals(basis)
    if basis.d == 1:
        return basis.axes[0].integrals(cells.intervals[:, 0], cells.intervals[:, 1])
    xs, ys = (np.unique(np.concatenate([bp, [ax.interval[0], ax.interval[1]]])) for bp, ax in zip(_coarse_breaks(basis), basis.axes))
    out = np.zeros((len(basis), len(cells)))
    for l, poly in enumerate(cells.polygons):
        if len(poly) < 3:
            continue
        pts, wts = [], []
        for piece in split_by_grid(poly, xs, ys):
            p, w = polygon_quadrature(piece, order)
            pts.append(p)
            wts.append(w)
        if not pts:
            continue
        P = np.vstack(pts)
        W = np.concatenate(wts)
        out[:, l] = basis.evaluate(P).T @ W
    return out


def _coarse_breaks(basis: Basis):
    # piecewise-linear cascade tables would need 2^-L cuts; use the level grid
    out = []
    for ax in basis.axes:
        if isinstance(ax.mother, BSplineMother):
            out.append(ax.breakpoints())
        else:
            a, b = ax.interval
            out.append(np.linspace(a, b, ax.cells + 1))
    return out


class HatFamily:
    """Piecewise linear hat functions on sorted 1-D nodes (smooth alternative to cells)."""

    def __init__(self, nodes, domain: BoxDomain):
        if domain.d != 1:
            raise ValueError("hat partitions are univariate")
        x = np.asarray(nodes, dtype=float).reshape(-1)
        self.nodes = x
        self.domain = domain
        self.order = np.argsort(x, kind="stable")

    def __len__(self) -> int:
        return len(self.nodes)

    def values(self, points) -> np.ndarray:
        t = np.asarray(points, dtype=float).reshape(-1)
        xs = self.nodes[self.order]
        out = np.zeros((len(t), len(xs)))
        eye = np.eye(len(xs))
        for i in range(len(xs)):
            out[:, self.order[i]] = np.interp(t, xs, eye[i])
        return out

    def integrals(self, basis: Basis, order: int = 8) -> np.ndarray:
        (a, b), = self.domain.bounds
        breaks = np.unique(np.concatenate([basis.axes[0].breakpoints(), self.nodes, [a, b]]))
        breaks = breaks[(breaks >= a) & (breaks <= b)]
        x, w = _gauss_on(breaks, order)
        return (basis.evaluate(x) * w[:, None]).T @ self.values(x)


def projector_matrix(basis: Basis, dual, cells, order: int = 6) -> ProjectorMatrix:
    """Inner products of the partition of unity with the dual elements."""
    measures = cells.measures() if isinstance(cells, Cells) else None
    if measures is not None and abs(measures.sum() - basis.domain.measure) > 1e-8 * basis.domain.measure:
        raise ValueError("cells do not cover the domain")
    if isinstance(dual, CompactDual):
        B = cell_integrals(dual.raw, cells, order)
        M = sp.csr_matrix(dual.apply_to_raw_integrals(B))
        M.eliminate_zeros()
        return ProjectorMatrix(M, True)
    B = cell_integrals(basis, cells, order)
    return ProjectorMatrix(dual.apply_to_primal_integrals(B), False)
