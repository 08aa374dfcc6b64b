"""Iterative reconstruction from nonuniform samples (RESTORE).

With ``M[k, l] = <psi_l, phid_k>`` the discrete operators are

    PQ_s f^s = Phi_s M f^s        (values at the nodes)
    PQ_c f^s = Phi_c M f^s        (values on the output grid)

and the iteration adds ``PQ(f0^s - f^s)`` to both the node and the grid
values until the node residual vanishes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .geometry import BoxDomain
from .sampling import SamplingSet
from .spaces import Basis, CanonicalDual, ProjectorMatrix, matrix_bandwidth, projector_matrix

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_NMAX = 100_000


class DivergenceError(RuntimeError):
    """Residual growth shows that ``I - PQ`` is not a contraction."""

    def __init__(self, message: str, state: "RestoreState | None" = None):
        super().__init__(message)
        self.state = state


def output_grid(domain: BoxDomain, tau: float | None = None) -> tuple[np.ndarray, float]:
    """Regular grid ``tau * i`` inside the domain; ``tau`` defaults to 2^-7 of the shortest side."""
    if tau is None:
        tau = float(min(domain.lengths)) / 2**7
    return domain.grid(tau), tau


def _dense_or_sparse(A, threshold: float = 0.25):
    if sp.issparse(A):
        return A.tocsr() if A.nnz < threshold * np.prod(A.shape) else A.toarray()
    return A


@dataclass
class OperatorPack:
    """Matrices used by RESTORE and INTEGRATE."""

    basis: Basis
    nodes: np.ndarray
    grid: np.ndarray
    tau: float
    Phi_s: object
    Phi_c: object
    M: ProjectorMatrix
    PQ_s: object = field(repr=False)
    PQ_c: object = field(repr=False)
    certificate: object = None

    @property
    def banded(self) -> bool:
        return self.M.banded

    def bandwidths(self) -> dict:
        out = {name: matrix_bandwidth(getattr(self, name)) for name in ("Phi_s", "Phi_c", "PQ_s")}
        out["M"] = self.M.bandwidth
        return out

    def flops_per_iteration(self) -> int:
        """Multiply-adds for one application of PQ_s and PQ_c."""
        def cost(A):
            return int(A.nnz) if sp.issparse(A) else int(np.prod(A.shape))
        return cost(self.PQ_s) + cost(self.PQ_c)

    def apply_s(self, r):
        return self.PQ_s @ r

    def apply_c(self, r):
        return self.PQ_c @ r

    def coefficients(self, r):
        """Coefficients of ``P Q r`` in the primal basis."""
        return self.M.matrix @ r


def assemble_pack(basis: Basis, dual, sset: SamplingSet, tau: float | None = None, psi: str = "voronoi",
                  grid=None, require_dense: float | None = None) -> OperatorPack:
    """Build ``Phi_s``, ``Phi_c`` and ``M`` for a basis, dual and sampling set.

    ``dual`` is a :class:`CanonicalDual`, a :class:`CompactDual` or ``None``
    (canonical).  When ``require_dense`` is given the node set must certify
    as ``require_dense``-dense, otherwise only a warning is emitted.
    """
    if dual is None:
        dual = CanonicalDual(basis)
    cert = sset.certificate()
    if require_dense is not None:
        cert = sset.certificate(require_dense)
        if not cert.passed:
            raise ValueError(f"node set is not {require_dense}-dense (covering radius {cert.covering_radius:.4g})")
    if grid is None:
        grid, tau = output_grid(basis.domain, tau)
    family = sset.hats() if psi == "hat" else sset.cells
    M = projector_matrix(basis, dual, family)
    pts = sset.nodes
    Phi_s = basis.evaluate(pts)
    Phi_c = basis.evaluate(grid)
    if M.banded:
        Phi_s = sp.csr_matrix(Phi_s)
        Phi_c = sp.csr_matrix(Phi_c)
        PQ_s = _dense_or_sparse(Phi_s @ M.matrix)
        PQ_c = _dense_or_sparse(Phi_c @ M.matrix)
    else:
        PQ_s = Phi_s @ M.matrix
        PQ_c = Phi_c @ M.matrix
    return OperatorPack(basis, pts, grid, tau, Phi_s, Phi_c, M, PQ_s, PQ_c, cert)


@dataclass
class RestoreState:
    """Iterates and the residual history ``||f0^s - f^s||_inf`` (entry n after n updates)."""

    iteration: int
    f_s: np.ndarray
    f_c: np.ndarray
    history: list
    increments: list
    coeffs: np.ndarray | None = None
    coeff_history: list | None = None
    grid_history: list | None = None
    stop_reason: str = ""


def _sup(v) -> float:
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


def contraction_radius(pack: OperatorPack, max_size: int = 3000) -> float | None:
    """Spectral radius of ``I - M Phi_s`` on coefficient space (``None`` if too large).

    A value ``>= 1`` means ``I - PQ`` is not contractive on the space, for
    instance when there are fewer nodes than basis elements.
    """
    n = len(pack.basis)
    if n > max_size:
        return None
    Phi_s = pack.Phi_s.toarray() if sp.issparse(pack.Phi_s) else pack.Phi_s
    A = np.eye(n) - pack.M.dense() @ Phi_s
    return float(np.abs(np.linalg.eigvals(A)).max())


def restore(pack: OperatorPack, f0_s, n_max: int = DEFAULT_NMAX, tol: float | None = DEFAULT_TOL,
            track: bool = False, divergence_window: int = 50, divergence_factor: float = 10.0,
            check_contraction: bool = True):
    """Run RESTORE; returns the grid values and the final :class:`RestoreState`.

    Stops when the node residual falls to ``tol``, when the geometric tail
    bound on the remaining updates does (the fixed point of data outside the
    space), or after ``n_max`` updates.  ``tol=None`` always runs ``n_max`` updates.
    ``f0_s`` may carry several sample vectors as columns.

    Raises :class:`DivergenceError` when the residual grows by
    ``divergence_factor`` over ``divergence_window`` updates, or up front
    when ``check_contraction`` finds ``I - M Phi_s`` non-contractive.
    """
    f0 = np.asarray(f0_s, dtype=float)
    if check_contraction:
        rho = contraction_radius(pack)
        if rho is not None and rho >= 1.0 - 1e-9:
            raise DivergenceError(
                f"spectral radius of I - PQ on the space is {rho:.6f}: sampling set too sparse (eta >= 1)")
    f_c = pack.apply_c(f0)
    f_s = pack.apply_s(f0)
    coeffs = pack.coefficients(f0) if track else None
    history = [_sup(f0 - f_s)]
    increments = [_sup(f_s)]
    state = RestoreState(0, f_s, f_c, history, increments, coeffs,
                         [coeffs.copy()] if track else None, [f_c.copy()] if track else None)
    if tol is not None and history[0] <= tol:
        state.stop_reason = "residual"
        return f_c, state
    for n in range(1, n_max + 1):
        r = f0 - f_s
        f_c = f_c + pack.apply_c(r)
        step = pack.apply_s(r)
        f_s = f_s + step
        if track:
            coeffs = coeffs + pack.coefficients(r)
            state.coeff_history.append(coeffs.copy())
            state.grid_history.append(f_c.copy())
        res = _sup(f0 - f_s)
        history.append(res)
        increments.append(_sup(step))
        state.iteration, state.f_s, state.f_c, state.coeffs = n, f_s, f_c, coeffs
        if not np.isfinite(res) or (n >= divergence_window and res > divergence_factor * history[n - divergence_window] and res > 0):
            state.stop_reason = "diverged"
            raise DivergenceError(
                f"residual grew from {history[max(n - divergence_window, 0)]:.3g} to {res:.3g} in "
                f"{divergence_window} iterations: sampling set too sparse (eta >= 1)", state)
        if tol is not None and res <= tol:
            state.stop_reason = "residual"
            break
        if tol is not None and _remaining_error(increments) <= tol:
            state.stop_reason = "fixed point"
            break
    else:
        state.stop_reason = "n_max"
    return f_c, state


def _remaining_error(increments) -> float:
    # geometric tail bound: sum_{i>=1} rho^i * last, rho from the last two updates
    if len(increments) < 3 or increments[-2] == 0.0:
        return increments[-1] if increments[-1] == 0.0 else np.inf
    rho = increments[-1] / increments[-2]
    if rho >= 1.0:
        return np.inf
    return increments[-1] * rho / (1.0 - rho)


def contraction_estimate(state: RestoreState, min_history: int = 10) -> float:
    """Geometric-mean residual ratio over the tail half of the history."""
    h = np.asarray(state.history, dtype=float)
    if len(h) < min_history:
        raise ValueError(f"need at least {min_history} residuals, have {len(h)}")
    tail = h[len(h) // 2 :]
    if np.any(tail == 0.0):
        return 0.0
    steps = len(tail) - 1
    return float((tail[-1] / tail[0]) ** (1.0 / steps))


def fixed_point_residual(pack: OperatorPack, f_inf_s, f0_s) -> float:
    """``||PQ_s(f0^s - f_inf^s)||_inf``; vanishes at the limit of RESTORE."""
    return _sup(pack.apply_s(np.asarray(f0_s, dtype=float) - np.asarray(f_inf_s, dtype=float)))


def log_residual_fit(history, skip: int = 0, floor: float = 1e-13):
    """Least-squares line through ``log10`` residuals above ``floor``; returns ``(slope, r2)``."""
    h = np.asarray(history, dtype=float)[skip:]
    n = np.arange(skip, skip + len(h))
    keep = h > floor
    n, y = n[keep], np.log10(h[keep])
    if len(y) < 3:
        return 0.0, 1.0
    coef = np.polyfit(n, y, 1)
    fit = np.polyval(coef, n)
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return float(coef[0]), 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
