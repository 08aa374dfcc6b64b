"""Refinement masks of the GP family, their symbols and the cascade algorithm.

A mask ``a = {a_k : k = offset, ..., offset + len - 1}`` defines the
refinement equation ``phi(x) = sum_k a_k phi(2x - k)``.  Refinable functions
are tabulated on dyadic grids by :func:`cascade_evaluate` and evaluated
between grid points by linear interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational, Real
from typing import Sequence

import numpy as np

DEFAULT_LEVEL = 10


class MaskError(ValueError):
    """Mask parameters outside the admissible class."""


class CascadeError(RuntimeError):
    """The cascade algorithm failed for a mask.

    ``kind`` is ``"degenerate"`` when the eigenvalue-1 eigenspace of the
    transfer matrix is not one-dimensional and ``"divergent"`` when the
    subdivision values blow up.
    """

    def __init__(self, message: str, kind: str):
        super().__init__(message)
        self.kind = kind


def _exact_value(v):
    if isinstance(v, Rational):
        return Fraction(v)
    if isinstance(v, float) and v.is_integer():
        return Fraction(int(v))
    return v


@dataclass(frozen=True)
class Mask:
    """Finite refinement mask.

    Parameters
    ----------
    coeffs : tuple
        Coefficients ``a_offset, ..., a_{offset+len-1}``.  Exact
        :class:`~fractions.Fraction` values are kept whenever possible.
    offset : int
        Index of the first coefficient.
    order_n, shape_h :
        GP parameters when the mask was generated by :func:`gp_mask`.
    """

    coeffs: tuple
    offset: int = 0
    order_n: int | None = None
    shape_h: Real | None = None

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise MaskError("empty mask")
        object.__setattr__(self, "coeffs", tuple(_exact_value(c) for c in self.coeffs))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coeffs)

    @property
    def support(self) -> tuple[int, int]:
        """Integer support ``[s0, s1]`` of the refinable function."""
        return self.offset, self.offset + len(self.coeffs) - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.coeffs))

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def total(self):
        """Sum of coefficients (exact when the mask is exact)."""
        return sum(self.coeffs, Fraction(0) if self.is_exact else 0.0)

    def is_symmetric(self, tol: float = 1e-14) -> bool:
        if self.is_exact:
            return all(a == b for a, b in zip(self.coeffs, reversed(self.coeffs)))
        c = self.as_array()
        return bool(np.allclose(c, c[::-1], rtol=0.0, atol=tol * max(1.0, np.abs(c).max())))

    def symbol(self, xi):
        return mask_symbol(self, xi)

    def to_record(self) -> str:
        """Serialize as ``n h offset c0 c1 ...`` (``-`` for absent fields)."""
        n = "-" if self.order_n is None else str(self.order_n)
        h = "-" if self.shape_h is None else _format_number(self.shape_h)
        body = " ".join(_format_number(c) for c in self.coeffs)
        return f"{n} {h} {self.offset} {body}"

    @classmethod
    def from_record(cls, record: str) -> "Mask":
        parts = record.split()
        if len(parts) < 4:
            raise MaskError(f"malformed mask record: {record!r}")
        n = None if parts[0] == "-" else int(parts[0])
        h = None if parts[1] == "-" else _parse_number(parts[1])
        coeffs = tuple(_parse_number(p) for p in parts[3:])
        return cls(coeffs, int(parts[2]), n, h)


def _format_number(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _parse_number(text: str):
    if "/" in text:
        return Fraction(text)
    try:
        return Fraction(int(text))
    except ValueError:
        return float(text)


def gp_mask(n: int, h) -> Mask:
    """Mask of the GP refinable function with parameters ``(n, h)``.

    ``a_k = 2^-h [C(n+1, k) + 4 (2^(h-n) - 1) C(n-1, k-1)]`` for
    ``k = 0, ..., n+1``.  Coefficients are exact fractions when ``h`` is an
    integer and floats otherwise.  ``h = n`` gives the B-spline of degree n.
    """
    if int(n) != n or n < 2:
        raise MaskError(f"GP masks need an integer n >= 2, got n={n}")
    n = int(n)
    h = _exact_value(h)
    if not h > n - 1:
        raise MaskError(f"GP masks need h > n - 1 = {n - 1}, got h={h}")
    if isinstance(h, Fraction) and h.denominator == 1:
        two_h = Fraction(2) ** int(h)
        excess = Fraction(2) ** (int(h) - n) - 1
    else:
        h = float(h)
        two_h = 2.0**h
        excess = 2.0 ** (h - n) - 1.0
    coeffs = []
    for k in range(n + 2):
        inner = math.comb(n - 1, k - 1) if 1 <= k <= n else 0
        coeffs.append((math.comb(n + 1, k) + 4 * excess * inner) / two_h)
    return Mask(tuple(coeffs), 0, n, h)


def haar_mask() -> Mask:
    return Mask((Fraction(1), Fraction(1)), 0)


def mask_symbol(mask: Mask, xi):
    """Trigonometric symbol ``m(xi) = 1/2 sum_k a_k exp(-i k xi)``."""
    xi = np.asarray(xi, dtype=float)
    k = mask.indices
    a = mask.as_array()
    return 0.5 * np.exp(-1j * np.multiply.outer(xi, k)) @ a


@dataclass(frozen=True)
class DyadicFunction:
    """Values of a compactly supported function on ``s0 + i 2^-L``.

    The function is taken right-continuous with ``phi(s1) = 0``.
    """

    level_L: int
    support: tuple[int, int]
    values: np.ndarray = field(repr=False)

    @property
    def step(self) -> float:
        return 2.0**-self.level_L

    @property
    def grid(self) -> np.ndarray:
        s0, s1 = self.support
        return s0 + self.step * np.arange(len(self.values))

    def __call__(self, x):
        return evaluate_at(self, x)

    def derivative(self, x):
        """Slope of the piecewise linear interpolant (0 outside support)."""
        x = np.asarray(x, dtype=float)
        s0, s1 = self.support
        slopes = np.diff(self.values) / self.step
        idx = np.floor((x - s0) / self.step).astype(int)
        inside = (x >= s0) & (x < s1)
        out = np.zeros(x.shape)
        out[inside] = slopes[np.clip(idx[inside], 0, len(slopes) - 1)]
        return out

    def antiderivative(self, x):
        """``int_{s0}^x f`` of the piecewise linear interpolant."""
        x = np.asarray(x, dtype=float)
        s0, s1 = self.support
        cum = np.concatenate([[0.0], np.cumsum(0.5 * self.step * (self.values[1:] + self.values[:-1]))])
        t = np.clip(x, s0, s1)
        pos = (t - s0) / self.step
        idx = np.clip(np.floor(pos).astype(int), 0, len(self.values) - 2)
        frac = (pos - idx) * self.step
        v0 = self.values[idx]
        slope = (self.values[idx + 1] - v0) / self.step
        return cum[idx] + v0 * frac + 0.5 * slope * frac**2

    def restrict(self, level: int) -> "DyadicFunction":
        """Subsample onto a coarser dyadic grid."""
        if level > self.level_L:
            raise ValueError("can only restrict to a coarser level")
        stride = 2 ** (self.level_L - level)
        return DyadicFunction(level, self.support, self.values[::stride].copy())


def transfer_matrix(mask: Mask) -> np.ndarray:
    """Matrix ``(a_{2i-j})`` acting on integer samples ``phi(s0), ..., phi(s1-1)``."""
    s0, s1 = mask.support
    pts = np.arange(s0, s1)
    a = dict(zip(mask.indices.tolist(), mask.as_array()))
    return np.array([[a.get(2 * i - j, 0.0) for j in pts] for i in pts])


def integer_values(mask: Mask, tol: float = 1e-9) -> np.ndarray:
    """Values of the refinable function at ``s0, ..., s1`` normalized to unit sum."""
    T = transfer_matrix(mask)
    A = T - np.eye(len(T))
    _, sing, vt = np.linalg.svd(A)
    scale = max(1.0, np.abs(T).max())
    null = np.sum(sing <= tol * scale)
    if null != 1:
        raise CascadeError(
            f"eigenvalue 1 of the transfer matrix has a {null}-dimensional eigenspace",
            "degenerate",
        )
    v = vt[-1]
    total = v.sum()
    if abs(total) < tol:
        raise CascadeError("integer samples sum to zero; cannot normalize", "degenerate")
    return np.append(v / total, 0.0)


def cascade_evaluate(mask: Mask, L: int = DEFAULT_LEVEL) -> DyadicFunction:
    """Tabulate the refinable function of ``mask`` on the grid of step ``2^-L``.

    Integer samples come from the eigenvector of the transfer matrix,
    normalized so that ``sum_k phi(x - k) = 1``; finer levels follow by
    applying the refinement equation, which is exact on dyadic points.
    """
    if L < 0:
        raise ValueError("level must be nonnegative")
    s0, s1 = mask.support
    a = mask.as_array()
    values = integer_values(mask)
    norms = [np.abs(values).max()]
    for level in range(1, L + 1):
        size = (s1 - s0) * 2**level + 1
        i = np.arange(size)
        new = np.zeros(size)
        for k, ak in zip(mask.indices, a):
            # 2x - k on the coarser grid, x = s0 + i 2^-level
            idx = (s0 - k) * 2 ** (level - 1) + i
            ok = (idx >= 0) & (idx < len(values))
            new[ok] += ak * values[idx[ok]]
        values = new
        norms.append(np.abs(values).max())
        if level >= 2 and norms[-1] > 10.0 * norms[-3]:
            raise CascadeError(
                f"cascade diverges: sup norm {norms[-3]:.3g} -> {norms[-1]:.3g} over two levels",
                "divergent",
            )
    return DyadicFunction(L, (s0, s1), values)


def evaluate_at(f: DyadicFunction, x):
    """Linear interpolation of the dyadic samples; zero outside the support."""
    x = np.asarray(x, dtype=float)
    s0, s1 = f.support
    out = np.interp(x, f.grid, f.values, left=0.0, right=0.0)
    out = np.where((x < s0) | (x >= s1), 0.0, out)
    return out if out.ndim else float(out)
