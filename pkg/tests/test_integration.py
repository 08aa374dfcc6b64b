import numpy as np
import pytest

from mrsampling.geometry import BoxDomain
from mrsampling.integration import basis_weights, integrate, monomial_moment, polynomial_exactness_check
from mrsampling.reconstruction import DivergenceError, assemble_pack, contraction_radius, restore
from mrsampling.refinable import gp_mask, haar_mask
from mrsampling.sampling import SamplingSet
from mrsampling.spaces import build_interval_basis

from conftest import IRREGULAR_NODES


class TestWeights:
    def test_haar_weights_are_one(self):
        w = basis_weights(build_interval_basis(haar_mask(), 0, (0, 4)))
        np.testing.assert_allclose(w.values, 1.0, atol=1e-15)

    @pytest.mark.parametrize("n,h,j", [(3, 3, 0), (3, 4, 2), (5, 4.1, 3), (2, 2, 1)])
    def test_normalized_total_is_measure(self, n, h, j):
        w = basis_weights(build_interval_basis(gp_mask(n, h), j, (0, 2)))
        assert w.normalized_total() == pytest.approx(2.0, abs=1e-10)
        assert np.all(w.values > 0)

    def test_cubic_interior_weight(self, cubic_basis):
        w = basis_weights(cubic_basis)
        assert w.values[3] == pytest.approx(1.0, abs=1e-14)
        # boundary elements carry the clipped part of the spline
        assert w.values[0] == pytest.approx(1 / 24, abs=1e-14)

    def test_tensor_weights(self, quad_tensor_basis):
        w = basis_weights(quad_tensor_basis)
        assert w.normalized_total() == pytest.approx(9.0, abs=1e-12)


class TestIntegrate:
    def test_constant_exact_at_start(self, cubic_pack, cubic_basis):
        value, trace = integrate(cubic_pack, basis_weights(cubic_basis), np.full(7, 1.5))
        assert trace.estimates[0] == pytest.approx(6.0, abs=1e-12)
        assert len(trace.estimates) == len(trace.increments) + 1

    def test_linearity_every_iteration(self, cubic_pack, cubic_basis):
        w = basis_weights(cubic_basis)
        rng = np.random.default_rng(0)
        f, g = rng.standard_normal((2, 7))
        a, b = -2.5, 0.75
        tr = [integrate(cubic_pack, w, v, n_max=300, tol=None)[1] for v in (f, g, a * f + b * g)]
        np.testing.assert_allclose(tr[2].estimates, a * np.array(tr[0].estimates) + b * np.array(tr[1].estimates),
                                   atol=1e-12)

    def test_limit_matches_direct_quadrature(self, dense_pack, cubic_basis):
        c = np.random.default_rng(1).standard_normal(len(cubic_basis))
        exact = basis_weights(cubic_basis).values @ c
        g, wq = np.polynomial.legendre.leggauss(6)
        x = (np.arange(4)[:, None] + 0.5 + 0.5 * g).ravel()
        direct = np.tile(0.5 * wq, 4) @ (cubic_basis.evaluate(x) @ c)
        assert exact == pytest.approx(direct, abs=1e-13)
        value, _ = integrate(dense_pack, basis_weights(cubic_basis), dense_pack.Phi_s @ c, tol=1e-15)
        assert value == pytest.approx(direct, abs=1e-8)

    def test_estimates_are_integrals_of_restore_iterates(self, cubic_pack, cubic_basis):
        w = basis_weights(cubic_basis)
        f0 = np.exp(-IRREGULAR_NODES)
        _, trace = integrate(cubic_pack, w, f0, n_max=100, tol=None)
        _, state = restore(cubic_pack, f0, n_max=100, tol=None, track=True)
        np.testing.assert_allclose(trace.estimates, [w.values @ c for c in state.coeff_history], atol=1e-10)

    def test_increments_decay_geometrically(self, cubic_pack, cubic_basis):
        _, trace = integrate(cubic_pack, basis_weights(cubic_basis), np.sin(IRREGULAR_NODES), n_max=600, tol=None)
        inc = np.abs(trace.increments[300:600])
        ratio = (inc[-1] / inc[0]) ** (1 / (len(inc) - 1))
        assert ratio == pytest.approx(0.9899, abs=2e-3)

    def test_bounded_by_projector_norm(self, dense_pack, cubic_basis):
        w = basis_weights(cubic_basis)
        rng = np.random.default_rng(2)
        f0 = rng.uniform(-1, 1, len(dense_pack.nodes))
        _, trace = integrate(dense_pack, w, f0, n_max=200, tol=None)
        eta = contraction_radius(dense_pack)
        assert eta < 1
        PQ = np.asarray(dense_pack.PQ_c)
        bound = 4.0 * np.abs(PQ).sum(axis=1).max() / (1 - eta) * np.abs(f0).max()
        assert np.abs(trace.estimates).max() <= bound

    def test_reference_errors(self, cubic_pack, cubic_basis):
        _, trace = integrate(cubic_pack, basis_weights(cubic_basis), IRREGULAR_NODES**2, reference=64 / 3, n_max=50, tol=None)
        rows = trace.checkpoints([0, 10, 50, 99])
        assert [r[0] for r in rows] == [0, 10, 50]
        assert rows[0][2] == pytest.approx(abs(trace.estimates[0] - 64 / 3))

    def test_divergence(self, cubic_basis):
        pack = assemble_pack(cubic_basis, None, SamplingSet(np.array([0.5, 2.0, 3.5]), BoxDomain.interval(0, 4)))
        with pytest.raises(DivergenceError):
            integrate(pack, basis_weights(cubic_basis), np.ones(3))


class TestExactness:
    def test_cubic_moments_on_interval(self, dense_pack):
        rep = polynomial_exactness_check(dense_pack, basis_weights(dense_pack.basis), 3)
        assert rep.max_error <= 1e-8
        assert rep.rows[0][0] == (0,) and rep.rows[0][3] <= 1e-12

    def test_x_squared_on_unit_interval(self):
        basis = build_interval_basis(gp_mask(3, 3), 2, (0, 1))
        nodes = np.linspace(0.02, 0.98, 20)
        pack = assemble_pack(basis, None, SamplingSet(nodes, BoxDomain.interval(0, 1)))
        value, _ = integrate(pack, basis_weights(basis), nodes**2, tol=1e-15)
        assert value == pytest.approx(1 / 3, abs=1e-8)

    def test_tensor_moments(self, pack_2d):
        rep = polynomial_exactness_check(pack_2d, basis_weights(pack_2d.basis), 2)
        assert len(rep.rows) == 6
        assert rep.max_error <= 1e-8

    def test_monomial_moment(self):
        assert monomial_moment(BoxDomain(((0, 3), (1, 2))), (2, 1)) == pytest.approx(9 * 1.5)
