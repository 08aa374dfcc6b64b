"""Iterative quadrature from nonuniform samples (INTEGRATE)."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .reconstruction import DivergenceError, OperatorPack, contraction_radius
from .spaces import Basis


@dataclass
class WeightVector:
    """``omega_k = int_Omega phi_{j,k}``."""

    values: np.ndarray
    normalization: float

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self) -> int:
        return len(self.values)

    def normalized_total(self) -> float:
        """``sum_k 2^{-dj/2} omega_k``, the measure of the domain."""
        return float(self.normalization * self.values.sum())


def basis_weights(basis: Basis) -> WeightVector:
    """Element integrals; exact for B-splines, exact on the cascade interpolant otherwise."""
    return WeightVector(basis.integrals(), basis.normalization)


@dataclass
class IntegrationTrace:
    estimates: list
    increments: list = field(default_factory=list)
    reference: float | None = None

    @property
    def value(self) -> float:
        return self.estimates[-1]

    @property
    def errors(self) -> list | None:
        if self.reference is None:
            return None
        return [abs(e - self.reference) for e in self.estimates]

    def checkpoints(self, iterations) -> list:
        """``(iteration, estimate, abs_error)`` rows for the requested iterations."""
        errs = self.errors
        rows = []
        for n in iterations:
            if n < len(self.estimates):
                rows.append((n, self.estimates[n], errs[n] if errs else None))
        return rows


def integrate(pack: OperatorPack, weights, f_s, n_max: int = 10_000, tol: float | None = 1e-14,
              reference: float | None = None, divergence_window: int = 50, divergence_factor: float = 10.0,
              check_contraction: bool = True):
    """Run INTEGRATE; returns ``(value, trace)``.

    ``trace.estimates[n]`` is the estimate after ``n`` updates.  Stops when
    an increment is at most ``tol * (1 + |estimate|)`` or after ``n_max``
    updates (``tol=None`` always runs ``n_max``).  ``f_s`` may hold several
    sample vectors as columns, in which case estimates are arrays.
    """
    if check_contraction:
        rho = contraction_radius(pack)
        if rho is not None and rho >= 1.0 - 1e-9:
            raise DivergenceError(f"spectral radius of I - PQ is {rho:.6f}: sampling set too sparse (eta >= 1)")
    w = np.asarray(pack.M.matrix.T @ np.asarray(weights, dtype=float)).ravel()
    f0 = np.asarray(f_s, dtype=float)
    value = w @ f0
    f = pack.apply_s(f0)
    trace = IntegrationTrace([value], [], reference)
    residuals = [float(np.max(np.abs(f0 - f)))]
    for n in range(1, n_max + 1):
        r = f0 - f
        inc = w @ r
        value = value + inc
        f = f + pack.apply_s(r)
        trace.estimates.append(value)
        trace.increments.append(inc)
        residuals.append(float(np.max(np.abs(f0 - f))))
        if not np.all(np.isfinite(value)) or (
            n >= divergence_window and residuals[-1] > divergence_factor * residuals[n - divergence_window] > 0):
            raise DivergenceError("integration residual diverges: sampling set too sparse (eta >= 1)")
        if tol is not None and np.all(np.abs(inc) <= tol * (1 + np.abs(value))):
            break
    return value, trace


def monomial_moment(domain, powers) -> float:
    """Exact ``int_Omega prod_i x_i^{p_i}``."""
    out = 1.0
    for (a, b), p in zip(domain.bounds, powers):
        out *= (b ** (p + 1) - a ** (p + 1)) / (p + 1)
    return out


@dataclass
class ExactnessReport:
    rows: list  # (powers, estimate, exact, abs_error, iterations)

    @property
    def max_error(self) -> float:
        return max(r[3] for r in self.rows)


def polynomial_exactness_check(pack: OperatorPack, weights, degree: int, n_max: int = 100_000,
                               tol: float = 1e-15) -> ExactnessReport:
    """Integrate every monomial of total degree at most ``degree`` from the pack's nodes."""
    basis = pack.basis
    domain = basis.domain
    rows = []
    for powers in product(range(degree + 1), repeat=domain.d):
        if sum(powers) > degree:
            continue
        samples = np.prod(pack.nodes ** np.array(powers), axis=1)
        value, trace = integrate(pack, weights, samples, n_max=n_max, tol=tol)
        exact = monomial_moment(domain, powers)
        rows.append((powers, float(value), exact, abs(float(value) - exact), len(trace.estimates) - 1))
    return ExactnessReport(rows)
