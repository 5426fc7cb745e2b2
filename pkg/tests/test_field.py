"""Grid, quadrature, coefficient builder, norms, and field I/O."""

import math

import numpy as np
import pytest

from zkdamper.fields import (
    CoefficientSpec,
    EmptyRegionError,
    Grid2D,
    GridMismatchError,
    ScalarField,
    build_coefficient,
    integrate,
    integrate_weighted,
    norms,
    read_field,
    write_field,
)


def sine_mode(grid):
    return ScalarField.from_function(
        grid, lambda X, Y: np.sin(np.pi * X / grid.L) * np.sin(np.pi * Y / grid.L)
    )


class TestGrid:
    def test_spacing(self):
        g = Grid2D(2.0, 7, 15)
        assert g.dx == pytest.approx(0.25)
        assert g.dy == pytest.approx(0.125)
        assert g.shape == (9, 17)

    def test_too_coarse(self):
        with pytest.raises(ValueError):
            Grid2D(1.0, 3, 8)

    def test_weights_sum_to_length(self):
        g = Grid2D(3.0, 11, 5)
        wx, wy = g.trapezoid_weights()
        assert wx.sum() == pytest.approx(3.0, rel=1e-15)
        assert wy.sum() == pytest.approx(3.0, rel=1e-15)


class TestQuadrature:
    def test_constant_exact(self):
        g = Grid2D(1.0, 16, 16)
        for c in (1.0, -3.7, 42.0):
            f = ScalarField.constant(g, c)
            w = ScalarField.constant(g, 1.0)
            err = abs(integrate_weighted(w, f, 2) - c**2 * g.L**2)
            assert err <= 1e-14 * c**2 * g.L**2

    def test_unit_square_unit_field(self):
        g = Grid2D(1.0, 12, 12)
        one = ScalarField.constant(g, 1.0)
        assert integrate_weighted(one, one, 2) == pytest.approx(1.0, abs=1e-15)

    def test_zero_weight(self):
        g = Grid2D(1.0, 12, 12)
        assert integrate_weighted(ScalarField.zeros(g), sine_mode(g), 2) == 0.0

    def test_sine_squared_value(self):
        g = Grid2D(1.0, 63, 63)
        one = ScalarField.constant(g, 1.0)
        # analytic: integral of sin^2 sin^2 = 1/4
        assert integrate_weighted(one, sine_mode(g), 2) == pytest.approx(0.25, abs=2e-4)

    def test_l2_of_sine_mode_exact_by_periodicity(self):
        # trapezoid integrates trig polynomials of the grid period exactly, so
        # the L2 norm of the sine mode carries no discretization error at all
        for n in (31, 63):
            l2, _, _ = norms(sine_mode(Grid2D(1.0, n, n)))
            assert abs(l2 - 0.5) < 1e-13

    def test_second_order_convergence_of_gradient_norm(self):
        # the centered-difference H1 seminorm is the genuinely second-order
        # quantity in norms(); its error must quarter when the grid doubles
        exact = math.pi / math.sqrt(2.0)
        errs = []
        for n in (31, 63):
            g = Grid2D(1.0, n, n)
            _, h1s, _ = norms(sine_mode(g))
            errs.append(abs(h1s - exact))
        ratio = errs[0] / errs[1]
        assert 3.2 <= ratio <= 4.8

    def test_grid_mismatch(self):
        f = ScalarField.zeros(Grid2D(1.0, 8, 8))
        w = ScalarField.zeros(Grid2D(1.0, 9, 8))
        with pytest.raises(GridMismatchError):
            integrate_weighted(w, f, 1)


class TestNorms:
    def test_sine_fixture(self):
        g = Grid2D(1.0, 63, 63)
        l2, h1s, l3 = norms(sine_mode(g))
        assert l2 == pytest.approx(0.5, abs=1e-3)
        assert l3 == pytest.approx(0.5648, abs=2e-3)
        assert h1s == pytest.approx(math.pi / math.sqrt(2.0), abs=5e-3)

    def test_zero_field(self):
        g = Grid2D(1.0, 8, 8)
        assert norms(ScalarField.zeros(g)) == (0.0, 0.0, 0.0)


class TestCoefficient:
    def test_full_domain_constant(self):
        g = Grid2D(1.0, 16, 16)
        spec = CoefficientSpec(0.0, 1.0, 0.0, 1.0, amplitude=1.0, ramp=0.0)
        a = build_coefficient(g, spec)
        assert np.all(a.values == 1.0)
        assert a.max_abs() == 1.0

    def test_zero_amplitude(self):
        g = Grid2D(1.0, 16, 16)
        a = build_coefficient(g, CoefficientSpec(0.2, 0.8, 0.2, 0.8, amplitude=0.0))
        assert np.all(a.values == 0.0)

    def test_half_domain_indicator(self):
        g = Grid2D(1.0, 31, 31)
        spec = CoefficientSpec(0.0, 0.5, 0.0, 1.0, amplitude=2.0, ramp=0.0)
        a = build_coefficient(g, spec)
        X, _ = g.meshgrid()
        assert np.all(a.values[X <= 0.5] == 2.0)
        assert np.all(a.values[X > 0.5] == 0.0)
        one = ScalarField.constant(g, 1.0)
        val = integrate_weighted(a, one, 1)
        assert abs(val - 1.0) <= g.dx

    def test_empty_region(self):
        g = Grid2D(1.0, 16, 16)
        with pytest.raises(EmptyRegionError):
            build_coefficient(g, CoefficientSpec(2.0, 3.0, 0.0, 1.0, amplitude=1.0))

    def test_random_specs_nonnegative_and_floored(self):
        rng = np.random.default_rng(11)
        g = Grid2D(1.0, 24, 24)
        for _ in range(100):
            x0 = float(rng.uniform(0.0, 0.7))
            x1 = x0 + float(rng.uniform(0.1, 1.0 - x0))
            y0 = float(rng.uniform(0.0, 0.7))
            y1 = y0 + float(rng.uniform(0.1, 1.0 - y0))
            floor = float(rng.uniform(0.0, 1.0))
            amp = floor + float(rng.uniform(0.0, 2.0))
            ramp = float(rng.choice([0.0, 0.05, 0.2]))
            a = build_coefficient(
                g, CoefficientSpec(x0, x1, y0, y1, amplitude=amp, floor=floor, ramp=ramp)
            )
            assert np.all(a.values >= 0.0)
            X, Y = g.meshgrid()
            inside = (X >= x0) & (X <= x1) & (Y >= y0) & (Y <= y1)
            assert np.all(a.values[inside] >= floor - 1e-15)
            assert a.max_abs() <= amp + 1e-15

    def test_ramp_is_continuous_profile(self):
        g = Grid2D(1.0, 49, 49)
        a = build_coefficient(
            g, CoefficientSpec(0.4, 0.6, 0.4, 0.6, amplitude=1.0, ramp=0.2)
        )
        # neighbouring nodes differ by at most amplitude * dx / ramp per axis
        jump = np.max(np.abs(np.diff(a.values, axis=0)))
        assert jump <= 1.0 * g.dx / 0.2 + 1e-12

    def test_amplitude_below_floor_rejected(self):
        with pytest.raises(ValueError):
            CoefficientSpec(0.0, 1.0, 0.0, 1.0, amplitude=0.5, floor=1.0)


class TestFieldValidation:
    def test_nan_rejected(self):
        g = Grid2D(1.0, 8, 8)
        vals = np.zeros(g.shape)
        vals[3, 3] = np.nan
        with pytest.raises(ValueError):
            ScalarField(g, vals)

    def test_trace_helpers(self):
        g = Grid2D(1.0, 8, 8)
        f = ScalarField.constant(g, 2.0)
        assert not f.has_zero_trace()
        f.enforce_zero_trace()
        assert f.has_zero_trace()
        assert f.values[4, 4] == 2.0


class TestIO:
    def test_round_trip(self, tmp_path):
        g = Grid2D(1.5, 9, 7)
        f = sine_mode(g)
        path = tmp_path / "field.txt"
        write_field(path, f)
        f2 = read_field(path)
        assert f2.grid == g
        np.testing.assert_array_equal(f2.values, f.values)

    def test_grid_check(self, tmp_path):
        g = Grid2D(1.0, 8, 8)
        path = tmp_path / "field.txt"
        write_field(path, ScalarField.zeros(g))
        with pytest.raises(GridMismatchError):
            read_field(path, grid=Grid2D(1.0, 9, 8))


def test_integral_of_x_weight():
    # trapezoid is exact for linear integrands: integral of x over the unit square
    g = Grid2D(1.0, 10, 10)
    xw = ScalarField.from_function(g, lambda X, Y: X)
    one = ScalarField.constant(g, 1.0)
    assert integrate_weighted(xw, one, 1) == pytest.approx(0.5, rel=1e-14)
