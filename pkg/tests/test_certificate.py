"""Certificate formulas against a high-precision mpmath oracle."""

import math

import numpy as np
import pytest
from mpmath import mp, mpf

from zkdamper.certificate import (
    InfeasibleError,
    MuCertInputs,
    PhysicalParams,
    ZkCertInputs,
    certify_mu,
    certify_zk,
    eta_sigma_zk,
    horizon_zk,
    theta_kappa_zk,
    xi_interval_mu,
)

mp.dps = 40

UNIT = PhysicalParams(alpha=1.0, gamma=1.0, L=1.0, h=1.0)


def mp_zk_chain(alpha, L, h, xi, eta_choice, mu, eps, b_inf):
    """Independent >=30-digit re-evaluation of the whole zk certificate chain."""
    alpha, L, h, xi = mpf(alpha), mpf(L), mpf(h), mpf(xi)
    eta = mpf(eta_choice) * (xi - 1) / (2 * L * (1 + 2 * xi))
    sigma = xi - 1 - 2 * L * eta * (1 + 2 * xi)
    theta = min(3 * alpha * eta / ((1 + 2 * eta * L) * L**2), sigma / (2 * h * (xi + sigma)))
    kappa = 1 + max(2 * eta * L, sigma / xi)
    mu, eps, b_inf = mpf(mu), mpf(eps), mpf(b_inf)
    T0 = mp.log(2 * xi * kappa / mu) / (2 * theta) + 1
    nu = mp.log(1 / (mu + eps)) / T0
    Tmin = -mp.log(mu / 2) / nu + (2 * b_inf / nu + 1) * T0
    return dict(eta=eta, sigma=sigma, theta=theta, kappa=kappa, T0=T0, nu=nu, Tmin=Tmin)


def rel_err(a, b):
    return abs(float(a) - float(b)) / abs(float(b))


class TestEtaSigma:
    def test_reference_point(self):
        eta, sigma = eta_sigma_zk(xi=2.0, L=1.0, eta_choice=0.5)
        assert eta == pytest.approx(0.05, rel=1e-14)
        assert sigma == pytest.approx(0.5, rel=1e-14)

    def test_xi_at_one_is_infeasible(self):
        with pytest.raises(InfeasibleError):
            eta_sigma_zk(xi=1.0, L=1.0)

    def test_wider_domain(self):
        eta, sigma = eta_sigma_zk(xi=3.0, L=2.0, eta_choice=0.5)
        assert eta == pytest.approx(1.0 / 28.0, rel=1e-14)
        assert sigma == pytest.approx(1.0, rel=1e-14)

    def test_sigma_positive_across_choices(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            xi = float(rng.uniform(1.0 + 1e-6, 50.0))
            L = float(rng.uniform(0.1, 10.0))
            c = float(rng.uniform(1e-3, 1.0 - 1e-3))
            eta, sigma = eta_sigma_zk(xi, L, c)
            assert eta > 0 and sigma > 0
            # closed form: sigma = (1 - c) * (xi - 1)
            assert sigma == pytest.approx((1 - c) * (xi - 1), rel=1e-12)


class TestThetaKappa:
    def test_reference_point(self):
        theta, kappa = theta_kappa_zk(UNIT, xi=2.0, eta=0.05, sigma=0.5)
        assert theta == pytest.approx(0.1, rel=1e-14)
        assert kappa == pytest.approx(1.25, rel=1e-14)

    def test_doubling_alpha_keeps_history_bound_active(self):
        p2 = PhysicalParams(alpha=2.0, gamma=1.0, L=1.0, h=1.0)
        theta, kappa = theta_kappa_zk(p2, xi=2.0, eta=0.05, sigma=0.5)
        assert theta == pytest.approx(0.1, rel=1e-14)
        assert kappa == pytest.approx(1.25, rel=1e-14)

    def test_theta_vanishes_with_sigma(self):
        theta, _ = theta_kappa_zk(UNIT, xi=2.0, eta=0.05, sigma=1e-12)
        assert theta < 1e-12

    def test_theta_nondecreasing_in_alpha(self):
        thetas = []
        for alpha in np.linspace(0.1, 10.0, 40):
            p = PhysicalParams(alpha=float(alpha), gamma=1.0, L=1.0, h=1.0)
            theta, _ = theta_kappa_zk(p, xi=2.0, eta=0.05, sigma=0.5)
            thetas.append(theta)
        assert all(b >= a - 1e-15 for a, b in zip(thetas, thetas[1:]))


class TestHorizon:
    def test_reference_point_against_oracle(self):
        T0, nu, Tmin = horizon_zk(theta=0.1, xi=2.0, kappa=1.25, mu=0.5, eps=0.1, b_inf=0.1)
        ref = mp_zk_chain(1, 1, 1, 2, "0.5", "0.5", "0.1", "0.1")
        assert rel_err(T0, ref["T0"]) < 1e-14
        assert rel_err(nu, ref["nu"]) < 1e-14
        assert rel_err(Tmin, ref["Tmin"]) < 1e-14

    def test_no_delay_weight(self):
        T0, nu, Tmin = horizon_zk(theta=0.1, xi=2.0, kappa=1.25, mu=0.5, eps=0.1, b_inf=0.0)
        assert Tmin == pytest.approx(-math.log(0.25) / nu + T0, rel=1e-14)
        assert Tmin == pytest.approx(46.470889212591849, rel=1e-12)

    def test_nu_vanishes_as_contraction_slackens(self):
        _, nu1, Tmin1 = horizon_zk(0.1, 2.0, 1.25, 0.5, 0.4, 0.1)
        _, nu2, Tmin2 = horizon_zk(0.1, 2.0, 1.25, 0.5, 0.499999, 0.1)
        assert 0 < nu2 < nu1
        assert Tmin2 > Tmin1

    def test_binf_scaling_increases_tmin(self):
        _, _, t_small = horizon_zk(0.1, 2.0, 1.25, 0.5, 0.1, 0.1)
        _, _, t_big = horizon_zk(0.1, 2.0, 1.25, 0.5, 0.1, 0.2)
        assert t_big > t_small


class TestXiInterval:
    def test_basic(self):
        lo, hi, empty = xi_interval_mu(1.0, 0.5, 1.0)
        assert (lo, hi, empty) == (0.5, 1.5, False)

    def test_empty_at_equal_gains(self):
        _, _, empty = xi_interval_mu(1.0, 1.0, 1.0)
        assert empty

    def test_scaled_delay(self):
        lo, hi, empty = xi_interval_mu(2.0, 0.5, 0.5)
        assert lo == pytest.approx(0.25) and hi == pytest.approx(1.75)
        assert not empty


class TestCertifyZk:
    def test_full_chain_matches_oracle_to_1e12(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            alpha = float(rng.uniform(0.2, 5.0))
            L = float(rng.uniform(0.5, 4.0))
            h = float(rng.uniform(0.2, 3.0))
            xi = float(rng.uniform(1.1, 8.0))
            mu = float(rng.uniform(0.05, 0.9))
            eps = float(rng.uniform(0.01, 0.999 - mu))
            b_inf = float(rng.uniform(0.0, 2.0))
            cert = certify_zk(
                PhysicalParams(alpha, 1.0, L, h),
                ZkCertInputs(xi=xi, mu=mu, eps=eps, b_inf=b_inf),
            )
            assert cert.feasible
            ref = mp_zk_chain(alpha, L, h, xi, "0.5", mu, eps, b_inf)
            for key in ("eta", "sigma", "theta", "kappa", "T0", "nu", "Tmin"):
                assert rel_err(getattr(cert, key), ref[key]) < 1e-12, key

    def test_feasible_invariants(self):
        cert = certify_zk(UNIT, ZkCertInputs(xi=2.0, mu=0.5, eps=0.1, b_inf=0.1))
        assert cert.feasible
        assert cert.sigma > 0 and cert.eta > 0 and cert.theta > 0
        assert cert.kappa >= 1.0
        assert cert.Tmin > cert.T0 > 1.0

    def test_infeasible_xi_reported_not_raised(self):
        with pytest.raises(InfeasibleError):
            ZkCertInputs(xi=0.9, mu=0.5, eps=0.1)

    def test_balance_residual_reported(self):
        cert = certify_zk(UNIT, ZkCertInputs(xi=2.0, mu=0.5, eps=0.1))
        assert "balance_residual" in cert.diagnostics


class TestCertifyMu:
    def test_reference_point(self):
        cert = certify_mu(UNIT, MuCertInputs(mu1=1.0, mu2=0.5, xi=1.0, gn_C=1.0, r=0.5))
        assert cert.feasible
        assert cert.sigma == pytest.approx(0.25, rel=1e-14)
        assert cert.eta == pytest.approx(0.025, rel=1e-14)
        assert cert.theta == pytest.approx(0.06670416353580893, rel=1e-12)
        assert cert.kappa == pytest.approx(1.25, rel=1e-14)
        assert cert.r_max == pytest.approx(3.833658625477635, rel=1e-12)

    def test_radius_too_large(self):
        cert = certify_mu(UNIT, MuCertInputs(mu1=1.0, mu2=0.5, xi=1.0, gn_C=1.0, r=5.0))
        assert not cert.feasible
        assert "r_max" in cert.diagnostics["reason"]

    def test_xi_outside_interval(self):
        cert = certify_mu(UNIT, MuCertInputs(mu1=1.0, mu2=0.5, xi=2.0, gn_C=1.0, r=0.5))
        assert not cert.feasible
        assert "interval" in cert.diagnostics["reason"]

    def test_feasible_invariants_random(self):
        rng = np.random.default_rng(5)
        n_feasible = 0
        for _ in range(200):
            mu2 = float(rng.uniform(0.05, 2.0))
            mu1 = mu2 + float(rng.uniform(0.01, 2.0))
            h = float(rng.uniform(0.2, 3.0))
            lo, hi, _ = xi_interval_mu(mu1, mu2, h)
            xi = float(rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo)))
            alpha = float(rng.uniform(0.2, 4.0))
            L = float(rng.uniform(0.5, 3.0))
            r_max = (216 * alpha**3) ** 0.25 / (1.0 * L**2.5)
            cert = certify_mu(
                PhysicalParams(alpha, 1.0, L, h),
                MuCertInputs(mu1=mu1, mu2=mu2, xi=xi, gn_C=1.0, r=0.5 * r_max),
            )
            assert cert.feasible, cert.diagnostics
            assert cert.sigma > 0 and cert.eta > 0 and cert.theta > 0
            assert cert.kappa >= 1.0
            n_feasible += 1
        assert n_feasible == 200

    def test_mu_chain_matches_oracle_to_1e12(self):
        cert = certify_mu(UNIT, MuCertInputs(mu1=1.0, mu2=0.5, xi=1.0, gn_C=1.0, r=0.5))
        half = mpf("0.5")
        alpha = L = h = xim = C = mpf(1)
        mu1, mu2, r = mpf(1), half, half
        sig = half * (2 * h / xim) * (mu1 - mu2 / 2 - xim / (2 * h))
        e1 = (xim / h - mu2) / (2 * L * mu2)
        e2 = (mu1 - mu2 / 2 - (xim / (2 * h)) * (1 + sig)) / (2 * L * mu1 + L * mu2)
        eta = half * min(e1, e2)
        bracket = 3 * alpha - half * C ** mpf("4/3") * r ** mpf("4/3") * L ** mpf("10/3")
        theta = min(eta / ((1 + 2 * eta * L) * L**2) * bracket, xim * sig / (2 * h * (xim + sig * xim)))
        assert rel_err(cert.sigma, sig) < 1e-13
        assert rel_err(cert.eta, eta) < 1e-13
        assert rel_err(cert.theta, theta) < 1e-12


def test_json_schema_keys():
    cert = certify_zk(UNIT, ZkCertInputs(xi=2.0, mu=0.5, eps=0.1, b_inf=0.1))
    d = cert.to_json_dict()
    expected = {
        "xi", "eta", "sigma", "theta", "kappa", "T0", "nu", "Tmin",
        "r_max", "feasible", "assumed_constants", "diagnostics",
    }
    assert expected == set(d.keys())
