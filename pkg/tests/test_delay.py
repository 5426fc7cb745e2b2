"""Delay line: exact shifts, sampling, history energies, transport residual."""

import numpy as np
import pytest

from zkdamper.delay import DelayLine, HistoryError
from zkdamper.fields import Grid2D, ScalarField

G = Grid2D(1.0, 8, 8)


def state(c):
    f = ScalarField.constant(G, c)
    return f.enforce_zero_trace()


def random_state(rng):
    f = ScalarField.zeros(G)
    f.interior[:] = rng.standard_normal((G.nx, G.ny))
    return f


class TestPushSample:
    def test_constant_history_any_rho(self):
        line = DelayLine.frozen(state(3.0), n_rho=4, h=1.0)
        for rho in (0.0, 0.3, 0.5, 1.0):
            assert np.array_equal(line.sample(rho).values, state(3.0).values)

    def test_rho_zero_is_current_state(self):
        rng = np.random.default_rng(0)
        line = DelayLine.frozen(random_state(rng), n_rho=4, h=1.0)
        f = random_state(rng)
        out = line.push_and_sample(f, rho=0.0)
        assert np.array_equal(out.values, f.values)

    def test_ramp_exact_shift(self):
        # history zeta(., s) = s * indicator; step h/n_rho; sample(1) == state at t-h
        n_rho, h = 4, 2.0
        dt = h / n_rho
        line = DelayLine.frozen(state(0.0), n_rho=n_rho, h=h, t0=0.0)
        t = 0.0
        for _ in range(3 * n_rho):
            t += dt
            line.push(state(t), dt)
        lag = line.sample(1.0)
        assert np.array_equal(lag.values, state(t - h).values)

    def test_bit_identical_shift_random_pushes(self):
        rng = np.random.default_rng(42)
        n_rho = 6
        line = DelayLine.frozen(random_state(rng), n_rho=n_rho, h=1.0)
        pushed = []
        for _ in range(50):
            f = random_state(rng)
            pushed.append(f.values.copy())
            line.push(f)
        for k in range(1, n_rho + 1):
            sampled = line.sample(k / n_rho)
            expected = pushed[-1 - k]
            assert np.array_equal(sampled.values, expected)

    def test_linear_interpolation_between_nodes(self):
        line = DelayLine.frozen(state(0.0), n_rho=4, h=1.0)
        for c in (1.0, 2.0, 3.0, 4.0, 5.0):
            line.push(state(c))
        # slots: rho_k = k/4 holds 5-k; rho=0.375 interpolates slots 1 and 2
        mid = line.sample(0.375)
        assert mid.values[4, 4] == pytest.approx(0.5 * 4.0 + 0.5 * 3.0)

    def test_courant_guard(self):
        line = DelayLine.frozen(state(1.0), n_rho=4, h=1.0)
        with pytest.raises(ValueError):
            line.push(state(1.0), dt=0.5)  # nu = 2

    def test_fractional_upwind_is_convex_combination(self):
        rng = np.random.default_rng(9)
        line = DelayLine.frozen(random_state(rng), n_rho=4, h=1.0)
        before = line.ring.copy()
        line.push(random_state(rng), dt=0.1)  # nu = 0.4
        for k in range(1, 5):
            expected = 0.6 * before[k] + 0.4 * before[k - 1]
            np.testing.assert_allclose(line.ring[k], expected, atol=1e-15)


class TestDelayEnergy:
    def test_untapered_constant(self):
        h = 2.0
        line = DelayLine.frozen(ScalarField.constant(G, 1.0), n_rho=8, h=h)
        w = ScalarField.constant(G, 1.0)
        assert line.delay_energy(w, factor=h / 2.0) == pytest.approx(1.0, rel=1e-13)

    def test_mu_mode_total(self):
        # xi=2, a=1, unit history: delay part 1.0, so total with E_state=0.5 is 1.5
        xi = 2.0
        line = DelayLine.frozen(ScalarField.constant(G, 1.0), n_rho=8, h=2.0)
        w = ScalarField.constant(G, 1.0)
        e_delay = line.delay_energy(w, factor=xi / 2.0)
        assert e_delay == pytest.approx(1.0, rel=1e-13)
        assert 0.5 + e_delay == pytest.approx(1.5, rel=1e-13)

    def test_tapered_constant(self):
        line = DelayLine.frozen(ScalarField.constant(G, 1.0), n_rho=16, h=1.0)
        w = ScalarField.constant(G, 2.0)
        val = line.delay_energy(w, factor=3.0, taper="one_minus_rho")
        assert val == pytest.approx(3.0 * 2.0 * 0.5, rel=1e-13)

    def test_linearity_in_weight(self):
        rng = np.random.default_rng(17)
        line = DelayLine.frozen(random_state(rng), n_rho=4, h=1.0)
        for _ in range(4):
            line.push(random_state(rng))
        w1 = ScalarField(G, rng.uniform(0.0, 1.0, G.shape))
        w2 = ScalarField(G, rng.uniform(0.0, 1.0, G.shape))
        w12 = ScalarField(G, w1.values + w2.values)
        for taper in ("none", "one_minus_rho"):
            s = line.delay_energy(w1, 1.3, taper) + line.delay_energy(w2, 1.3, taper)
            tot = line.delay_energy(w12, 1.3, taper)
            assert tot == pytest.approx(s, rel=1e-12)

    def test_nonnegative_and_zero_iff_zero(self):
        line = DelayLine.frozen(state(0.0), n_rho=4, h=1.0)
        w = ScalarField.constant(G, 1.0)
        assert line.delay_energy(w, 1.0) == 0.0
        # a pushed state enters the lagged slots one push later
        line.push(state(1.0))
        line.push(state(0.0))
        assert line.delay_energy(w, 1.0) > 0.0


class TestTransportResidual:
    def test_needs_history(self):
        line = DelayLine.frozen(state(1.0), n_rho=4, h=1.0)
        with pytest.raises(HistoryError):
            line.transport_residual(0.25)

    def test_constant_history(self):
        line = DelayLine.frozen(state(2.0), n_rho=4, h=1.0)
        line.push(state(2.0))
        assert line.transport_residual(0.25) == 0.0

    def test_ramp_exact_on_characteristics(self):
        n_rho, h = 4, 1.0
        dt = h / n_rho
        line = DelayLine.frozen(state(0.0), n_rho=n_rho, h=h)
        t = 0.0
        for _ in range(2 * n_rho):
            t += dt
            line.push(state(t), dt)
        assert line.transport_residual(dt) <= 1e-12

    def test_quadratic_history_first_order(self):
        resids = []
        for m in (1, 2):
            n_rho = 4 * m
            h = 1.0
            dt = h / n_rho
            line = DelayLine.frozen(state(0.0), n_rho=n_rho, h=h)
            t = 0.0
            for _ in range(3 * n_rho):
                t += dt
                line.push(state(t * t), dt)
            resids.append(line.transport_residual(dt))
        ratio = resids[0] / resids[1]
        assert 1.4 <= ratio <= 2.6


def test_from_snapshots_order():
    snaps = [ScalarField.constant(G, c) for c in (5.0, 4.0, 3.0, 2.0, 1.0)]  # oldest first
    line = DelayLine.from_snapshots(snaps, h=1.0)
    assert line.n_rho == 4
    assert line.sample(1.0).values[4, 4] == 5.0
    assert line.sample(0.0).values[4, 4] == 1.0
