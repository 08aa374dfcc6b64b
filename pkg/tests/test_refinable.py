from fractions import Fraction
from math import comb

import numpy as np
import pytest
from scipy.interpolate import BSpline

from mrsampling.refinable import (
    CascadeError,
    DyadicFunction,
    Mask,
    MaskError,
    cascade_evaluate,
    gp_mask,
    haar_mask,
    integer_values,
    mask_symbol,
    transfer_matrix,
)


def cardinal_bspline(degree):
    return BSpline.basis_element(np.arange(degree + 2), extrapolate=False)


class TestGPMask:
    def test_bspline_case_is_binomial(self):
        for n in range(2, 7):
            m = gp_mask(n, n)
            expected = [Fraction(comb(n + 1, k), 2**n) for k in range(n + 2)]
            assert list(m.coeffs) == expected
            assert m.is_exact

    def test_cubic_h4_values(self):
        m = gp_mask(3, 4)
        assert m.coeffs == (Fraction(1, 16), Fraction(1, 2), Fraction(7, 8), Fraction(1, 2), Fraction(1, 16))

    @pytest.mark.parametrize("n,h", [(2, 2), (3, 4), (5, 4.1), (5, 7), (4, 3.5)])
    def test_sum_rules(self, n, h):
        m = gp_mask(n, h)
        a = m.as_array()
        k = m.indices
        assert a.sum() == pytest.approx(2.0, abs=1e-14)
        assert a[k % 2 == 0].sum() == pytest.approx(1.0, abs=1e-14)
        assert m.is_symmetric()

    def test_non_integer_h_is_float(self):
        m = gp_mask(5, 4.1)
        assert not m.is_exact
        assert len(m.coeffs) == 7

    def test_rejects_bad_parameters(self):
        with pytest.raises(MaskError):
            gp_mask(3, 2)
        with pytest.raises(MaskError):
            gp_mask(1, 1)

    def test_record_round_trip(self):
        for m in (gp_mask(3, 4), gp_mask(5, 4.1), haar_mask()):
            back = Mask.from_record(m.to_record())
            assert back == m

    def test_record_format(self):
        assert gp_mask(3, 4).to_record() == "3 4 0 1/16 1/2 7/8 1/2 1/16"

    def test_symbol_at_zero_and_pi(self):
        m = gp_mask(3, 5)
        np.testing.assert_allclose(mask_symbol(m, np.array([0.0, np.pi])), [1.0, 0.0], atol=1e-15)


class TestCascade:
    def test_integer_values_cubic(self):
        np.testing.assert_allclose(integer_values(gp_mask(3, 3)), [0, 1 / 6, 2 / 3, 1 / 6, 0], atol=1e-14)

    def test_transfer_matrix_shape(self):
        assert transfer_matrix(gp_mask(3, 3)).shape == (4, 4)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_matches_closed_form_bspline(self, n):
        f = cascade_evaluate(gp_mask(n, n), 10)
        exact = np.nan_to_num(cardinal_bspline(n)(f.grid))
        np.testing.assert_allclose(f.values, exact, atol=1e-12)

    def test_interpolant_close_to_bspline_off_grid(self):
        f = cascade_evaluate(gp_mask(3, 3), 10)
        x = np.random.default_rng(1).uniform(0, 4, 500)
        np.testing.assert_allclose(f(x), cardinal_bspline(3)(x), atol=1e-6)

    @pytest.mark.parametrize("h", [3, 4, 5.5, 8])
    def test_partition_of_unity(self, h):
        f = cascade_evaluate(gp_mask(3, h), 8)
        x = np.linspace(0, 1, 257)
        total = sum(f(x + k) for k in range(-4, 5))
        np.testing.assert_allclose(total, 1.0, atol=1e-12)

    def test_refinement_equation_holds(self):
        m = gp_mask(3, 4)
        f = cascade_evaluate(m, 10)
        x = f.grid[::4][:-1] / 1.0
        x = x[(x * 2 ** 9) % 1 == 0]
        rhs = sum(a * f(2 * x - k) for k, a in zip(m.indices, m.as_array()))
        np.testing.assert_allclose(f(x), rhs, atol=1e-13)

    def test_positive(self):
        f = cascade_evaluate(gp_mask(5, 4.1), 8)
        assert np.all(f.values >= -1e-15)

    def test_haar_is_indicator(self):
        f = cascade_evaluate(haar_mask(), 6)
        np.testing.assert_allclose(f.values[:-1], 1.0)
        assert f.values[-1] == 0.0
        assert f(np.array([0.0, 0.999, 1.0])).tolist()[2] == 0.0

    def test_antiderivative_total_is_one(self):
        f = cascade_evaluate(gp_mask(3, 4), 10)
        assert f.antiderivative(np.array(4.0)) == pytest.approx(1.0, abs=1e-12)

    def test_restrict(self):
        f = cascade_evaluate(gp_mask(3, 3), 6)
        g = f.restrict(3)
        np.testing.assert_allclose(g.values, cascade_evaluate(gp_mask(3, 3), 3).values, atol=1e-15)
        with pytest.raises(ValueError):
            f.restrict(7)

    def test_divergent_mask_detected(self):
        with pytest.raises(CascadeError) as info:
            cascade_evaluate(Mask((Fraction(-1), Fraction(3), Fraction(3), Fraction(-1)), 0), 12)
        assert info.value.kind in ("divergent", "degenerate")

    def test_degenerate_mask_detected(self):
        # the transfer matrix is the identity: every vector is fixed
        m = Mask((Fraction(1), Fraction(1), Fraction(0)), 0)
        np.testing.assert_array_equal(transfer_matrix(m), np.eye(2))
        with pytest.raises(CascadeError):
            integer_values(m)

    def test_dyadic_function_derivative_outside_support(self):
        f = DyadicFunction(2, (0, 1), np.array([0.0, 0.5, 1.0, 0.5, 0.0]))
        np.testing.assert_allclose(f.derivative(np.array([-0.5, 0.1, 0.6, 1.5])), [0, 2, -2, 0])
