from fractions import Fraction

import numpy as np
import pytest

from mrsampling.duals import DualSpec, solve_dual_mask
from mrsampling.geometry import BoxDomain, voronoi_cells
from mrsampling.refinable import gp_mask, haar_mask
from mrsampling.spaces import (
    BSplineMother,
    CanonicalDual,
    CascadeMother,
    CompactDual,
    QuadratureError,
    SingularGramianError,
    build_interval_basis,
    canonical_dual_coeffs,
    cell_integrals,
    condition_number,
    gramian,
    projector_matrix,
    refinement_matrix,
    tensor_basis,
)


def _gauss(a, b, cells, order=8):
    g, w = np.polynomial.legendre.leggauss(order)
    e = np.linspace(a, b, cells + 1)
    half = np.diff(e) / 2
    return ((e[:-1] + e[1:]) / 2 + half * g[:, None]).T.ravel(), (half * w[:, None]).T.ravel()


class TestBasis:
    @pytest.mark.parametrize("n,j,length", [(3, 0, 4), (3, 2, 1), (2, 0, 3), (5, 5, 1)])
    def test_element_count(self, n, j, length):
        b = build_interval_basis(gp_mask(n, n), j, (0, length))
        assert len(b) == 2**j * length + n

    def test_exact_mother_for_bsplines(self):
        assert isinstance(build_interval_basis(gp_mask(3, 3), 0, (0, 4)).axes[0].mother, BSplineMother)
        assert isinstance(build_interval_basis(gp_mask(3, 4), 0, (0, 4)).axes[0].mother, CascadeMother)

    @pytest.mark.parametrize("h", [3, 4, 6.5])
    def test_partition_of_unity(self, h):
        b = build_interval_basis(gp_mask(3, h), 2, (0, 2))
        x = np.linspace(0, 2, 301)
        np.testing.assert_allclose(b.normalization * b.evaluate(x).sum(axis=1), 1.0, atol=1e-12)

    def test_tensor_partition_and_index(self):
        b1 = build_interval_basis(gp_mask(2, 2), 0, (0, 3))
        b = tensor_basis(b1, b1)
        pts = np.random.default_rng(0).uniform(0, 3, (50, 2))
        V = b.evaluate(pts)
        np.testing.assert_allclose(V.sum(axis=1), 1.0, atol=1e-12)
        v1, v2 = b1.evaluate(pts[:, 0]), b1.evaluate(pts[:, 1])
        np.testing.assert_allclose(V[:, 2 * 5 + 3], v1[:, 2] * v2[:, 3], atol=1e-15)

    def test_gradients_match_finite_differences(self):
        b = build_interval_basis(gp_mask(3, 3), 1, (0, 2))
        x = np.array([0.31, 0.77, 1.23])
        fd = (b.evaluate(x + 1e-6) - b.evaluate(x - 1e-6)) / 2e-6
        np.testing.assert_allclose(b.gradients(x)[:, :, 0], fd, atol=1e-6)

    def test_integrals_of_interior_element(self):
        b = build_interval_basis(gp_mask(3, 3), 0, (0, 4))
        w = b.integrals()
        interior = (b.axes[0].shifts >= 0) & (b.axes[0].shifts <= 0)
        np.testing.assert_allclose(w[interior], 1.0, atol=1e-14)
        assert w.sum() == pytest.approx(4.0, abs=1e-12)

    def test_refinement_matrix(self):
        m = gp_mask(3, 4)
        c = build_interval_basis(m, 1, (0, 2))
        f = build_interval_basis(m, 2, (0, 2))
        A = refinement_matrix(c, f)
        # the cascade interpolant obeys the refinement relation on its dyadic grid
        x = np.arange(0, 2, 2.0**-7)
        np.testing.assert_allclose(c.evaluate(x), f.evaluate(x) @ A.T, atol=1e-12)

    def test_supports_and_overlaps(self):
        b = build_interval_basis(gp_mask(3, 3), 0, (0, 4))
        s = b.supports()[:, 0, :]
        assert s[0].tolist() == [0.0, 1.0] and s[-1].tolist() == [3.0, 4.0]
        assert b.overlap_counts().max() == 7


class TestGramian:
    def test_cubic_interior_entries(self):
        b = build_interval_basis(gp_mask(3, 3), 0, (0, 8))
        G = gramian(b).matrix
        mid = len(b) // 2
        exact = [Fraction(151, 315), Fraction(397, 1680), Fraction(1, 42), Fraction(1, 5040)]
        np.testing.assert_allclose(G[mid, mid : mid + 4], [float(v) for v in exact], atol=1e-14)

    def test_matches_brute_force_quadrature(self):
        b = build_interval_basis(gp_mask(3, 5), 1, (0, 2))
        x, w = _gauss(0, 2, 2**12, 2)
        V = b.evaluate(x)
        np.testing.assert_allclose(gramian(b).matrix, (V * w[:, None]).T @ V, atol=1e-12)

    def test_kronecker_structure(self):
        b1 = build_interval_basis(gp_mask(2, 2), 0, (0, 3))
        G1 = gramian(b1).matrix
        G2 = gramian(tensor_basis(b1, b1)).matrix
        np.testing.assert_allclose(G2, np.kron(G1, G1), atol=1e-12)
        x, w = _gauss(0, 3, 3, 4)
        X, Y = np.meshgrid(x, x, indexing="ij")
        W = np.outer(w, w).ravel()
        V = tensor_basis(b1, b1).evaluate(np.column_stack([X.ravel(), Y.ravel()]))
        np.testing.assert_allclose(G2, (V * W[:, None]).T @ V, atol=1e-12)
        assert condition_number(G2) == pytest.approx(condition_number(G1) ** 2, rel=1e-9)

    def test_symmetric_positive_definite(self):
        G = gramian(build_interval_basis(gp_mask(3, 4), 3, (0, 1))).matrix
        np.testing.assert_array_equal(G, G.T)
        assert np.linalg.eigvalsh(G)[0] > 0

    def test_haar_gramian_is_identity(self):
        G = gramian(build_interval_basis(haar_mask(), 2, (0, 1))).matrix
        np.testing.assert_allclose(G, np.eye(4), atol=1e-14)
        assert condition_number(G) == pytest.approx(1.0)

    def test_orthonormal_basis_has_unit_condition(self):
        G = gramian(build_interval_basis(gp_mask(3, 3), 2, (0, 1))).matrix
        L = np.linalg.cholesky(G)
        Li = np.linalg.inv(L)
        assert condition_number(Li @ G @ Li.T) == pytest.approx(1.0, abs=1e-10)

    def test_normalized_condition_is_scale_free(self):
        G = gramian(build_interval_basis(gp_mask(3, 4), 3, (0, 1))).matrix
        D = np.diag(np.linspace(1, 5, len(G)))
        assert condition_number(D @ G @ D, normalize=True) == pytest.approx(condition_number(G, normalize=True))

    def test_low_order_quadrature_rejected(self):
        with pytest.raises(QuadratureError):
            gramian(build_interval_basis(gp_mask(3, 3), 0, (0, 4)), order=1)

    def test_singular_gramian_rejected(self):
        with pytest.raises(SingularGramianError):
            canonical_dual_coeffs(np.ones((3, 3)))


class TestDuals:
    def test_canonical_biorthogonality(self):
        b = build_interval_basis(gp_mask(3, 4), 2, (0, 2))
        dual = CanonicalDual(b)
        x, w = _gauss(0, 2, 2**13, 2)
        cross = (b.evaluate(x) * w[:, None]).T @ dual.evaluate(x)
        np.testing.assert_allclose(cross, np.eye(len(b)), atol=1e-8)

    def test_compact_dual_biorthogonality(self):
        m = gp_mask(3, 4)
        b = build_interval_basis(m, 1, (0, 4), L=12)
        dual = CompactDual(b, solve_dual_mask(DualSpec.default(3, 4)), L=12)
        x, w = _gauss(0, 4, 2**15, 2)
        cross = (b.evaluate(x) * w[:, None]).T @ dual.evaluate(x)
        # residual of the piecewise-linear tables shrinks like 4^-L
        np.testing.assert_allclose(cross, np.eye(len(b)), atol=1e-5)
        # away from the boundary the recombination is the identity
        C = dual.coeffs.toarray()
        mid = len(b) // 2
        assert C[mid, mid] == 1.0
        assert np.count_nonzero(C[mid]) == 1

    def test_projector_reproduces_constants(self):
        b = build_interval_basis(gp_mask(3, 3), 0, (0, 4))
        dom = BoxDomain.interval(0, 4)
        cells = voronoi_cells(np.array([0.1, 0.9, 1.55, 1.6, 2.4, 3.2, 3.9]), dom)
        M = projector_matrix(b, CanonicalDual(b), cells).dense()
        x = np.linspace(0, 4, 33)
        np.testing.assert_allclose(b.evaluate(x) @ M @ np.ones(7), 1.0, atol=1e-12)

    def test_cell_integrals_sum_to_element_integrals(self):
        b = tensor_basis(*(2 * [build_interval_basis(gp_mask(2, 2), 0, (0, 3))]))
        dom = BoxDomain.square(0, 3)
        cells = voronoi_cells(dom.uniform(np.random.default_rng(2), 40), dom)
        B = cell_integrals(b, cells)
        np.testing.assert_allclose(B.sum(axis=1), b.integrals(), atol=1e-12)

    def test_compact_projector_is_sparse(self):
        m = gp_mask(3, 3)
        b = build_interval_basis(m, 3, (0, 4))
        dom = BoxDomain.interval(0, 4)
        cells = voronoi_cells(np.linspace(0.01, 3.99, 90), dom)
        P = projector_matrix(b, CompactDual(b, solve_dual_mask(DualSpec.default(3, 3))), cells)
        assert P.banded
        assert P.matrix.nnz < 0.3 * np.prod(P.shape)
