import numpy as np
import pytest

from mrsampling import fileio
from mrsampling.expressions import Expression, ExpressionError
from mrsampling.refinable import gp_mask


class TestFormats:
    def test_csv_round_trip_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        pts = rng.random(20)
        vals = rng.standard_normal(20) * 1e-7
        fileio.write_grid(tmp_path / "g.csv", pts, vals)
        header, data = fileio.read_csv(tmp_path / "g.csv")
        assert header == ["x", "value"]
        np.testing.assert_array_equal(data[:, 0], pts)
        np.testing.assert_array_equal(data[:, 1], vals)

    def test_samples_with_and_without_values(self, tmp_path):
        nodes = np.array([[0.1, 0.2], [1.5, 2.5]])
        fileio.write_samples(tmp_path / "a.csv", nodes, [1.0, 2.0])
        fileio.write_samples(tmp_path / "b.csv", nodes)
        n, v = fileio.read_samples(tmp_path / "a.csv", 2)
        np.testing.assert_array_equal(n, nodes)
        assert v.tolist() == [1.0, 2.0]
        assert fileio.read_samples(tmp_path / "b.csv", 2)[1] is None
        with pytest.raises(ValueError):
            fileio.read_samples(tmp_path / "a.csv", 1)

    def test_history_header(self, tmp_path):
        fileio.write_history(tmp_path / "h.csv", [1.0, 0.5])
        assert (tmp_path / "h.csv").read_text().splitlines() == ["iter,sup_residual", "0,1.0", "1,0.5"]

    def test_banded_matrix_round_trip(self, tmp_path):
        A = np.diag(np.arange(1.0, 6.0)) + np.diag(np.full(4, 0.5), 1) + np.diag(np.full(4, -0.25), -1)
        fileio.write_matrix(tmp_path / "m.txt", A, 1)
        lines = (tmp_path / "m.txt").read_text().splitlines()
        assert lines[0] == "5 5 1"
        assert len(lines[1].split()) == 2 and len(lines[2].split()) == 3
        np.testing.assert_array_equal(fileio.read_matrix(tmp_path / "m.txt"), A)

    def test_dense_matrix_round_trip(self, tmp_path):
        A = np.random.default_rng(1).random((3, 4))
        fileio.write_matrix(tmp_path / "m.txt", A)
        np.testing.assert_array_equal(fileio.read_matrix(tmp_path / "m.txt"), A)

    def test_mask_file(self, tmp_path):
        fileio.write_mask(tmp_path / "mask.txt", gp_mask(5, 4.1))
        assert fileio.read_mask(tmp_path / "mask.txt") == gp_mask(5, 4.1)

    def test_config_parsing(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("# comment\nn = 3\n\nf = sin(pi*x)  # trailing\n")
        assert fileio.read_config(p) == {"n": "3", "f": "sin(pi*x)"}
        p.write_text("n 3\n")
        with pytest.raises(ValueError):
            fileio.read_config(p)


class TestExpressions:
    def test_arithmetic_and_functions(self):
        x = np.linspace(0, 1, 11)
        np.testing.assert_allclose(Expression("(x-1/2)^2 - 0.1")(x), (x - 0.5) ** 2 - 0.1)
        np.testing.assert_allclose(Expression("sin(pi*x) + exp(-x) * cos(2*x)")(x), np.sin(np.pi * x) + np.exp(-x) * np.cos(2 * x))
        np.testing.assert_allclose(Expression("-x**3 + e")(x), -(x**3) + np.e)

    def test_two_variables(self):
        p = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(Expression("x*y + 1")(p), [3.0, 13.0])

    def test_constant_broadcasts(self):
        assert Expression("2")(np.zeros(4)).tolist() == [2.0] * 4

    @pytest.mark.parametrize("text", ["__import__('os')", "x.real", "open(x)", "sin(x, x)", "z + 1", "[x]", "x if x else 1", "1 +"])
    def test_rejects_unsafe_or_invalid(self, text):
        with pytest.raises(ExpressionError):
            Expression(text)

    def test_y_needs_two_dimensions(self):
        with pytest.raises(ExpressionError):
            Expression("x + y")(np.zeros(3))
