import math

import numpy as np
import pytest
from scipy import integrate

from resetting_lab import analytic as an


def quad(fn, a, b, **kw):
    kw.setdefault("epsabs", 1e-11)
    kw.setdefault("limit", 250)
    return integrate.quad(fn, a, b, **kw)[0]


# ---------------------------------------------------------------------------
# kernels


def test_heat_kernel_values():
    assert an.heat_kernel(1.0, 0.0) == pytest.approx(1.0 / math.sqrt(4 * math.pi))
    for t, z in [(0.5, 1.0), (2.0, -3.0)]:
        assert an.heat_kernel(t, z) == an.heat_kernel(t, -z)
    assert quad(lambda z: an.heat_kernel(1.0, z), -np.inf, np.inf) == \
        pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        an.heat_kernel(0.0, 1.0)


def test_heat_kernel_laplace():
    assert an.heat_kernel_laplace(1.0, 0.0) == pytest.approx(0.5)
    assert an.heat_kernel_laplace(4.0, 0.0) == pytest.approx(0.25)
    direct = quad(lambda t: math.exp(-t) * an.heat_kernel(t, 2.0), 0, np.inf)
    assert an.heat_kernel_laplace(1.0, 2.0) == pytest.approx(direct, rel=1e-8)
    with pytest.raises(ValueError):
        an.heat_kernel_laplace(-1.0, 0.0)


def test_first_passage_laplace_kernel():
    assert an.first_passage_laplace_kernel(3.7, 0.0) == 1.0
    assert an.first_passage_laplace_kernel(1.0, 1.0) == pytest.approx(math.exp(-1))
    x = 0.5
    direct = quad(lambda t: math.exp(-2 * t) * (x / t) * an.heat_kernel(t, x),
                  0, np.inf)
    assert an.first_passage_laplace_kernel(2.0, x) == pytest.approx(direct,
                                                                    rel=1e-8)


def test_reflected_bm_density():
    assert an.reflected_bm_density(1.0, 0.0, 0.0) == \
        pytest.approx(2 * an.heat_kernel(1.0, 0.0))
    assert quad(lambda y: an.reflected_bm_density(1.0, 0.7, y), 0, np.inf) == \
        pytest.approx(1.0, abs=1e-9)
    assert an.reflected_bm_density(0.8, 0.3, 1.1) == \
        pytest.approx(an.reflected_bm_density(0.8, 1.1, 0.3))


def test_resetting_density_free():
    # no resetting reduces to the heat kernel
    assert an.resetting_density_free(1.0, 0.2, 0.0, 0.9, 0.0) == \
        pytest.approx(an.heat_kernel(1.0, 0.7))
    total = quad(lambda y: an.resetting_density_free(1.0, 0.3, 0.0, y, 2.0),
                 -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-8)
    # long-time limit is the two-sided stationary profile
    r = 1.0
    for y in (0.0, 0.5, -1.0):
        lim = 0.5 * math.sqrt(r) * math.exp(-math.sqrt(r) * abs(y))
        assert an.resetting_density_free(40.0, 0.3, 0.0, y, r) == \
            pytest.approx(lim, abs=1e-7)


def test_resetting_density_reflected():
    assert an.resetting_density_reflected(1.0, 0.4, 0.9, 0.0) == \
        pytest.approx(an.reflected_bm_density(1.0, 0.4, 0.9))
    total = quad(lambda y: an.resetting_density_reflected(2.0, 0.5, y, 1.0),
                 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-8)
    ys = np.linspace(0.0, 5.0, 41)
    dens = np.array([an.resetting_density_reflected(10.0, 0.0, y, 2.0)
                     for y in ys])
    target = an.stationary_density_halfline(ys, 2.0)
    assert np.max(np.abs(dens - target)) < 1e-6


def test_stationary_density():
    assert an.stationary_density_halfline(0.0, 4.0) == pytest.approx(2.0)
    assert quad(lambda y: an.stationary_density_halfline(y, 2.5), 0, np.inf) \
        == pytest.approx(1.0)
    mean = quad(lambda y: y * an.stationary_density_halfline(y, 2.5), 0, np.inf)
    assert mean == pytest.approx(1 / math.sqrt(2.5))


# ---------------------------------------------------------------------------
# exponents and measures


def test_phi_psi_values():
    assert an.phi(1.0, 0.0) == pytest.approx(1.0)
    assert an.psi(5.0, 0.0) == pytest.approx(5.0)
    assert an.phi(3.0, 1.0) == pytest.approx(1.5)
    assert an.psi(2.0, 4.0) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        an.phi(0.0, 1.0)


def test_exponent_composition_identity():
    assert an.psi_phi_identity_check(3.0, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert an.psi_phi_identity_check(1.0, 0.0) == pytest.approx(0.0, abs=1e-14)
    for r in (0.0, 0.5, 1.0, 4.0):
        for lam in np.logspace(-3, 3, 50):
            resid = an.psi_phi_identity_check(lam, r)
            assert resid <= 1e-12 * max(an.phi(lam, r), 1.0)


@pytest.mark.parametrize("kind,r", [("Phi", 0.0), ("Phi", 1.0),
                                    ("Psi", 0.5), ("Psi", 4.0),
                                    ("HalfStable", 0.0), ("DriftedBM", 2.0)])
def test_bernstein_sign_pattern(kind, r):
    exp = an.LaplaceExponent(kind, r)
    for lam in np.logspace(-3, 3, 25):
        h = lam * 1e-5
        f0, fp, fm = exp(lam), exp(lam + h), exp(lam - h)
        assert f0 >= 0
        assert (fp - fm) / (2 * h) >= -1e-9
        # second difference: allow for rounding noise at tiny h
        noise = 8e-15 * max(abs(f0), 1.0) / (h * h)
        assert (fp - 2 * f0 + fm) / (h * h) <= 1e-6 + noise


def test_exponents_vanish_at_zero():
    for kind, r in [("Phi", 1.0), ("Psi", 4.0), ("HalfStable", 0.0),
                    ("DriftedBM", 2.0)]:
        assert an.LaplaceExponent(kind, r)(1e-12) < 1e-5


def test_levy_measures():
    psi4 = an.LevyMeasure("PiPsi", 4.0)
    assert quad(psi4.density, 0, np.inf) == pytest.approx(2.0)
    assert psi4.total_mass == pytest.approx(2.0)
    phi0 = an.LevyMeasure("PiPhi", 0.0)
    z = 0.7
    assert phi0.density(z) == pytest.approx(1 / (2 * math.sqrt(math.pi) * z**1.5))
    phi1 = an.LevyMeasure("PiPhi", 1.0)
    assert phi1.total_mass == math.inf
    # integrability of 1 ^ z
    assert quad(lambda s: min(1.0, s) * phi1.density(s), 0, np.inf) < np.inf
    # closed-form tails match quadrature of the density
    for meas, z0 in [(psi4, 0.3), (phi1, 0.8)]:
        tail = quad(meas.density, z0, np.inf)
        assert meas.tail(z0) == pytest.approx(tail, rel=1e-8)
    with pytest.raises(ValueError):
        psi4.density(0.0)


def test_levy_khintchine_and_tail_symbol():
    assert an.levy_khintchine_check(an.LaplaceExponent("Psi", 4.0), 2.0) < 1e-8
    assert an.levy_khintchine_check(an.LaplaceExponent("Phi", 1.0), 2.0) < 1e-6
    assert an.tail_symbol_check(an.LaplaceExponent("Phi", 1.0), 2.0) < 1e-6
    assert an.tail_symbol_check(an.LaplaceExponent("Psi", 4.0), 1.0) < 1e-6
    # half-stable closed form: phi(lam)/lam = 1/sqrt(lam)
    direct = quad(lambda z: math.exp(-2 * z) / math.sqrt(math.pi * z), 0,
                  np.inf)
    assert direct == pytest.approx(1 / math.sqrt(2.0), rel=1e-9)


def test_inverse_local_time_marginal_laplace():
    val = an.inverse_local_time_marginal_laplace(3.0, 0.5, 1.0)
    assert val == pytest.approx((1.5 / 3.0) * math.exp(-0.75))


# ---------------------------------------------------------------------------
# drifted reflected motion


def test_hitting_time_laplace():
    assert an.hitting_time_laplace(2.0, 0.0, 1.0) == 1.0
    assert an.hitting_time_laplace(3.0, 1.0, 1.0) == pytest.approx(math.exp(-1))
    assert 0 < an.hitting_time_laplace(0.5, 2.0, 0.3) <= 1


def test_drifted_reflected_density():
    assert an.drifted_reflected_density(1.0, 0.5, 0.9, 0.0) == \
        pytest.approx(an.reflected_bm_density(1.0, 0.5, 0.9))
    total = quad(lambda y: an.drifted_reflected_density(1.0, 0.5, y, 2.0),
                 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-7)


def test_joint_laplace_drift():
    assert an.joint_laplace_drift(2.0, 0.0, 0.0, 1.0) == 1.0
    # marginal in w has the (sqrt(lam+r) - sqrt(r))^{-1} prefactor
    lam, r, y = 3.0, 1.0, 0.4
    marg_w = quad(lambda w: an.joint_laplace_drift(lam, y, w, r), 0, np.inf)
    s, sr = math.sqrt(lam + r), math.sqrt(r)
    assert marg_w == pytest.approx(math.exp(-y * (s + sr)) / (s - sr), rel=1e-9)
    # marginal in y at r=1, lam=3 is e^{-w}/3
    w = 0.6
    marg_y = quad(lambda yy: an.joint_laplace_drift(3.0, yy, w, 1.0),
                  0, np.inf)
    assert marg_y == pytest.approx(math.exp(-w) / 3.0, rel=1e-9)


# ---------------------------------------------------------------------------
# resolvents and boundary operators


def test_resolvent_dirichlet():
    lam, r = 3.0, 1.0
    s, sr = math.sqrt(lam + r), math.sqrt(r)
    for x in (0.3, 1.0, 2.5):
        want = (1 - math.exp(-x * (s - sr))) / lam
        assert an.resolvent_dirichlet(lambda y: 1.0, x, lam, r) == \
            pytest.approx(want, rel=1e-8)
    assert an.resolvent_dirichlet(lambda y: y * y, 0.0, lam, r) == 0.0


def test_resolvent_dirichlet_solves_ode():
    lam, r = 1.0, 1.0
    f = lambda y: math.exp(-y)
    h = 1e-4
    for x in (0.5, 1.5):
        u = lambda z: an.resolvent_dirichlet(f, z, lam, r)
        upp = (u(x + h) - 2 * u(x) + u(x - h)) / (h * h)
        up = (u(x + h) - u(x - h)) / (2 * h)
        resid = upp - 2 * math.sqrt(r) * up - lam * u(x) + f(x)
        assert abs(resid) < 1e-5


def test_resolvent_at_zero_and_full():
    assert an.resolvent_at_zero(lambda y: 1.0, 2.0, 1.0) == \
        pytest.approx(0.5, rel=1e-9)
    for x in (0.0, 0.7, 2.0):
        assert an.resolvent_full(lambda y: 1.0, x, 2.0, 1.0) == \
            pytest.approx(0.5, rel=1e-8)
    f = lambda y: math.exp(-y)
    assert an.resolvent_full(f, 0.0, 2.0, 1.0) == \
        pytest.approx(an.resolvent_at_zero(f, 2.0, 1.0), rel=1e-10)
    assert an.resolvent_boundary_identity_residual(f, 2.0, 1.0) < 1e-6


def test_dn_symbol():
    assert an.dn_symbol(0.0, 1.0) == 0.0
    assert an.dn_symbol(2.0, 0.0) == pytest.approx(-2.0)
    assert an.dn_symbol(math.sqrt(3.0), 1.0) == pytest.approx(-1.5)
    assert an.dn_symbol(1.3, 0.7) == an.dn_symbol(-1.3, 0.7)
    assert an.dn_symbol(1.7, 0.9) == pytest.approx(-an.phi(1.7 ** 2, 0.9))


def test_marchaud_apply():
    assert an.marchaud_apply(lambda y: 4.2, 1.0, 2.0) == pytest.approx(0.0,
                                                                       abs=1e-9)
    assert an.marchaud_apply(lambda y: math.exp(-y), 0.0, 1.0) == \
        pytest.approx(-0.5, rel=1e-9)
    # linear profile with cutoff: integral of y against the jump kernel is 1
    cut = lambda y: min(y, 1e6)
    for r in (0.5, 1.0, 4.0):
        assert an.marchaud_apply(cut, 0.0, r) == pytest.approx(1.0, rel=1e-6)
    # bounded functions give results bounded by 2 ||f|| sqrt(r)
    val = an.marchaud_apply(lambda y: math.cos(3 * y), 0.3, 2.0)
    assert abs(val) <= 2 * math.sqrt(2.0) + 1e-9
