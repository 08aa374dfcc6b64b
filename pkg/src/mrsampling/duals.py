"""Compactly supported biorthogonal duals for GP masks.

The GP symbol factors as ``m(xi) = e^{-i(n+1)xi/2} cos(xi/2)^N r(cos xi)``
with ``N = n - 1`` and ``r`` affine.  A dual of the same shape,
``e^{-i(n+1)xi/2} cos(xi/2)^Nd rd(cos xi)``, satisfies the duality identity
when ``r(x) rd(x) - sum_{i<l} C(l-1+i, i) y^i`` (``y = (1-x)/2``,
``2l = N + Nd``) is divisible by ``y^l`` with an odd quotient.  Those
requirements are linear in the coefficients of ``rd`` and are solved here in
exact rational arithmetic whenever the primal mask is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .refinable import CascadeError, Mask, MaskError, cascade_evaluate, mask_symbol

__all__ = [
    "BiorthReport",
    "DualError",
    "DualSpec",
    "condition_count",
    "dual_linear_system",
    "dual_polynomial",
    "gp_symbol_factorization",
    "solve_dual_mask",
    "symbol_identity_residual",
    "shifted_inner_products",
    "verify_biorthogonality",
]


class DualError(ValueError):
    """The dual system is singular or over-determined."""


def _exact(h):
    if isinstance(h, Fraction):
        return h
    if isinstance(h, int) or (isinstance(h, float) and h.is_integer()):
        return Fraction(int(h))
    return float(h)


def gp_symbol_factorization(n: int, h):
    """Return ``(N, r)`` with ``r`` the coefficient list of the affine factor.

    ``r(x) = (2^(h-n+1) - 1 + x) / 2^(h-n+1)``, low degree first.
    """
    if n < 2:
        raise MaskError("n must be at least 2")
    h = _exact(h)
    if not h > n - 1:
        raise MaskError(f"need h > n - 1, got n={n}, h={h}")
    if isinstance(h, Fraction) and h.denominator == 1:
        c = Fraction(2) ** (int(h) - n + 1)
    else:
        c = 2.0 ** (float(h) - n + 1)
    return n - 1, [(c - 1) / c, 1 / c]


# --- polynomial helpers (coefficient lists, lowest degree first) -------------


def _pmul(p, q):
    zero = p[0] * 0
    out = [zero] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def _ppow(p, k):
    out = [p[0] ** 0]
    for _ in range(k):
        out = _pmul(out, p)
    return out


def _padd(p, q):
    n = max(len(p), len(q))
    zero = (p[0] if p else q[0]) * 0
    p = list(p) + [zero] * (n - len(p))
    q = list(q) + [zero] * (n - len(q))
    return [a + b for a, b in zip(p, q)]


def _divmod_rows(rows, divisor):
    """Polynomial long division applied row-wise.

    ``rows[d]`` is the coefficient of ``x^d`` expressed as a vector of
    linear forms; ``divisor`` is a scalar coefficient list.
    """
    rows = [list(r) for r in rows]
    dq = len(divisor) - 1
    lead = divisor[-1]
    nq = len(rows) - dq
    quotient = [None] * max(nq, 0)
    for d in range(len(rows) - 1, dq - 1, -1):
        factor = [v / lead for v in rows[d]]
        quotient[d - dq] = factor
        for i, c in enumerate(divisor):
            rows[d - dq + i] = [a - c * f for a, f in zip(rows[d - dq + i], factor)]
    return quotient, rows[:dq]


@dataclass(frozen=True)
class DualSpec:
    """Parameters of the dual search.

    ``dual_vanishing`` is the power of ``cos(xi/2)`` in the dual symbol and
    ``m`` the degree of the dual polynomial; both default per
    :meth:`default`.
    """

    n: int
    h: object
    dual_vanishing: int
    m: int

    @property
    def N(self) -> int:
        return self.n - 1

    @property
    def ell(self) -> int:
        return (self.N + self.dual_vanishing) // 2

    def __post_init__(self):
        if (self.N + self.dual_vanishing) % 2:
            raise DualError("N + dual_vanishing must be even")
        if self.ell < 1:
            raise DualError("l = (N + dual_vanishing)/2 must be at least 1")
        if self.m < self.ell:
            raise DualError(f"degree m={self.m} must be at least l={self.ell}")

    @classmethod
    def default(cls, n: int, h, dual_vanishing: int | None = None, m: int | None = None):
        N = n - 1
        if dual_vanishing is None:
            dual_vanishing = 2 if N % 2 == 0 else 1
        ell = (N + dual_vanishing) // 2
        return cls(n, h, dual_vanishing, ell if m is None else m)


def condition_count(ell: int, m: int) -> int:
    """Number of linear conditions generated for degree ``m``."""
    return (m + 1 - ell) // 2 + ell + 1


def dual_linear_system(spec: DualSpec):
    """Assemble ``A a = b`` for the coefficients of the dual polynomial.

    Rows are the remainder coefficients of ``s[a]`` modulo ``((1-x)/2)^l``
    (lowest degree first) followed by the even coefficients of
    ``q(x) + q(-x)``, ``q`` being the quotient.
    """
    _, r = gp_symbol_factorization(spec.n, spec.h)
    one = r[0] ** 0
    zero = one * 0
    ell, m = spec.ell, spec.m
    y = [one / 2, -one / 2]  # (1 - x)/2
    target = [zero]
    for i in range(ell):
        target = _padd(target, [math.comb(ell - 1 + i, i) * c for c in _ppow(y, i)])
    degree = max(m + 1, len(target) - 1, ell)
    # each row: coefficients of a_0..a_m, then the constant term
    rows = [[zero] * (m + 2) for _ in range(degree + 1)]
    for j in range(m + 1):
        for d, c in enumerate(r):
            rows[j + d][j] += c
    for d, c in enumerate(target):
        rows[d][m + 1] -= c
    quotient, remainder = _divmod_rows(rows, _ppow(y, ell))
    eqs = remainder + [[2 * v for v in quotient[d]] for d in range(0, len(quotient), 2)]
    A = [row[: m + 1] for row in eqs]
    b = [-row[m + 1] for row in eqs]
    return A, b


def _eliminate(A, b, exact: bool, tol: float = 1e-12):
    """Gauss-Jordan elimination; returns the unique solution or raises."""
    rows = [list(r) + [v] for r, v in zip(A, b)]
    ncol = len(A[0]) if A else 0
    scale = max((abs(v) for r in rows for v in r), default=1.0) or 1.0
    small = (lambda v: v == 0) if exact else (lambda v: abs(v) <= tol * scale)
    pivot_row = 0
    pivots = []
    for col in range(ncol):
        best = max(range(pivot_row, len(rows)), key=lambda i: abs(rows[i][col]), default=None)
        if best is None or small(rows[best][col]):
            continue
        rows[pivot_row], rows[best] = rows[best], rows[pivot_row]
        piv = rows[pivot_row][col]
        rows[pivot_row] = [v / piv for v in rows[pivot_row]]
        for i in range(len(rows)):
            if i != pivot_row and not small(rows[i][col]):
                f = rows[i][col]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[pivot_row])]
        pivots.append(col)
        pivot_row += 1
    for r in rows[pivot_row:]:
        if not small(r[-1]):
            raise DualError("linear conditions are inconsistent (over-determined)")
    if len(pivots) < ncol:
        raise DualError(f"linear system is singular: rank {len(pivots)} < {ncol} unknowns")
    sol = [None] * ncol
    for i, col in enumerate(pivots):
        sol[col] = rows[i][-1]
    return sol


def _mask_from_polynomial(n: int, dual_vanishing: int, rd, exact: bool) -> Mask:
    """Expand ``e^{-i(n+1)xi/2} cos(xi/2)^Nd rd(cos xi)`` into mask coefficients.

    Works with Laurent polynomials in ``w = e^{-i xi/2}``.
    """
    one = Fraction(1) if exact else 1.0
    terms = {n + 1: one}

    def mul(p, q):
        out = {}
        for e1, c1 in p.items():
            for e2, c2 in q.items():
                out[e1 + e2] = out.get(e1 + e2, 0 * one) + c1 * c2
        return out

    for _ in range(dual_vanishing):
        terms = mul(terms, {1: one / 2, -1: one / 2})
    cos_xi = {2: one / 2, -2: one / 2}
    poly = {0: 0 * one}
    power = {0: one}
    for c in rd:
        poly = {e: poly.get(e, 0 * one) + c * power.get(e, 0 * one) for e in set(poly) | set(power)}
        power = mul(power, cos_xi)
    terms = mul(terms, poly)
    exps = sorted(e for e, c in terms.items() if c != 0)
    if any(e % 2 for e in exps):
        raise DualError("dual symbol is not a trigonometric polynomial in xi")
    lo, hi = exps[0] // 2, exps[-1] // 2
    coeffs = tuple(2 * terms.get(2 * k, 0 * one) for k in range(lo, hi + 1))
    return Mask(coeffs, lo)


def dual_polynomial(spec: DualSpec, extra=None):
    """Coefficients ``a_0, ..., a_m`` of the dual polynomial.

    When the generated conditions leave freedom (``m >= l + 2``) the caller
    may pass ``extra = (rows, rhs)``; otherwise the solution minimizing the
    Euclidean norm of the dual mask coefficients is chosen.
    """
    A, b = dual_linear_system(spec)
    exact = all(isinstance(v, Fraction) for row in A for v in row)
    m = spec.m
    if extra is not None:
        rows, rhs = extra
        A = A + [list(r) for r in rows]
        b = b + list(rhs)
        return _eliminate(A, b, exact)
    if len(A) >= m + 1:
        return _eliminate(A, b, exact)
    # min |T a|^2 subject to A a = b, where T maps a to the mask coefficients
    one = Fraction(1) if exact else 1.0
    zero = 0 * one
    images = [
        _mask_from_polynomial(spec.n, spec.dual_vanishing, [zero] * j + [one], exact)
        for j in range(m + 1)
    ]
    lo = min(mk.offset for mk in images)
    hi = max(mk.offset + len(mk.coeffs) for mk in images)
    T = [[zero] * (m + 1) for _ in range(hi - lo)]
    for j, mk in enumerate(images):
        for i, c in enumerate(mk.coeffs):
            T[mk.offset - lo + i][j] = c
    TtT = [[sum(row[i] * row[j] for row in T) for j in range(m + 1)] for i in range(m + 1)]
    p = len(A)
    K = [[2 * v for v in TtT[i]] + [A[r][i] for r in range(p)] for i in range(m + 1)]
    K += [list(A[r]) + [zero] * p for r in range(p)]
    return _eliminate(K, [zero] * (m + 1) + list(b), exact)[: m + 1]


def solve_dual_mask(spec: DualSpec, extra=None) -> Mask:
    """Dual mask for the GP mask ``(spec.n, spec.h)``."""
    rd = dual_polynomial(spec, extra)
    exact = all(isinstance(v, Fraction) for v in rd)
    mask = _mask_from_polynomial(spec.n, spec.dual_vanishing, rd, exact)
    return Mask(mask.coeffs, mask.offset, spec.n, spec.h)


@dataclass
class BiorthReport:
    """Outcome of :func:`verify_biorthogonality`.

    ``max_time_residual`` uses inner products extrapolated (Aitken) from the
    trapezoid sums at levels ``L-2, L-1, L``; ``raw_time_residual`` is the
    plain level-``L`` trapezoid value.
    """

    max_symbol_residual: float
    max_time_residual: float
    converged: bool
    raw_time_residual: float = float("nan")
    inner_products: dict = field(default_factory=dict)
    diagnostic: str = ""

    def to_json(self) -> str:
        d = asdict(self)
        d["inner_products"] = {str(k): v for k, v in self.inner_products.items()}
        return json.dumps(d, sort_keys=True)


def symbol_identity_residual(primal: Mask, dual: Mask, points: int = 1024) -> float:
    """``sup |m conj(md) + m(.+pi) conj(md(.+pi)) - 1|`` on a uniform grid."""
    xi = np.linspace(0.0, 2 * np.pi, points, endpoint=False)
    m0 = mask_symbol(primal, xi)
    d0 = mask_symbol(dual, xi)
    m1 = mask_symbol(primal, xi + np.pi)
    d1 = mask_symbol(dual, xi + np.pi)
    return float(np.abs(m0 * np.conj(d0) + m1 * np.conj(d1) - 1.0).max())


def shifted_inner_products(primal: Mask, dual: Mask, L: int) -> dict[int, float]:
    """``int phi(x) phid(x - k) dx`` for all overlapping shifts, trapezoid rule."""
    f = cascade_evaluate(primal, L)
    g = cascade_evaluate(dual, L)
    step = 2**L
    s0, s1 = f.support
    t0, t1 = g.support
    out = {}
    for k in range(s0 - t1 + 1, s1 - t0):
        # common grid of x on [max(s0, t0+k), min(s1, t1+k)]
        a, b = max(s0, t0 + k), min(s1, t1 + k)
        fi = f.values[(a - s0) * step : (b - s0) * step + 1]
        gi = g.values[(a - t0 - k) * step : (b - t0 - k) * step + 1]
        prod = fi * gi
        out[k] = float((prod.sum() - 0.5 * (prod[0] + prod[-1])) / step)
    return out


def _aitken(a: float, b: float, c: float) -> float:
    denom = (c - b) - (b - a)
    if denom == 0.0:
        return c
    return c - (c - b) ** 2 / denom


def verify_biorthogonality(primal: Mask, dual: Mask, L: int = 10, tol: float = 1e-6) -> BiorthReport:
    """Check the duality identity in frequency and in time."""
    sym = symbol_identity_residual(primal, dual)
    try:
        levels = [shifted_inner_products(primal, dual, lv) for lv in (L - 2, L - 1, L)]
    except CascadeError as exc:
        return BiorthReport(sym, float("inf"), False, diagnostic=f"cascade failed: {exc}")
    inner = {k: _aitken(levels[0][k], levels[1][k], levels[2][k]) for k in levels[2]}
    delta = {k: 1.0 if k == 0 else 0.0 for k in inner}
    time_res = max(abs(v - delta[k]) for k, v in inner.items())
    raw = max(abs(v - delta[k]) for k, v in levels[2].items())
    ok = sym <= tol and time_res <= tol
    return BiorthReport(sym, time_res, ok, raw, inner, "" if ok else "residual above tolerance")
