import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy.special import betainc

from extremal.certnum import Interval
from extremal.gauss_perimeter import (
    DEFAULT_A,
    DEFAULT_B,
    NazarovParams,
    asymptote_check_p,
    certify_lower_bound,
    facet_escape_p,
    integrand_F,
    log_facet_escape_p,
    log_gamma,
    log_main_term_identity,
    main_term_L,
    main_term_identity,
    mc_facet_escape,
    mc_facet_membership,
    radial_density_cf,
    rho_for,
    second_derivative_bound_M,
    survival_probability,
)

mpmath.mp.dps = 60


def p_oracle(n, rho, r, exponent=None):
    """Tail of the density (1-t^2)^k on [-1, 1] beyond rho/sqrt(r^2+rho^2), by mpmath.

    The tail is I_x(k+1, k+1) at x = (1 - x0)/2 <= 1/2, written through the
    hypergeometric series x^a (1-x)^a 2F1(2a, 1; a+1; x) / (a B(a, a)).
    """
    if exponent is None:
        exponent = Fraction(n - 2, 2)
    exponent = Fraction(exponent)
    a = mpmath.mpf(exponent.numerator) / exponent.denominator + 1
    x0 = mpmath.mpf(rho) / mpmath.sqrt(mpmath.mpf(r) ** 2 + mpmath.mpf(rho) ** 2)
    x = (1 - x0) / 2
    log_pref = a * mpmath.log(x) + a * mpmath.log(1 - x) - mpmath.log(a) - (
        2 * mpmath.loggamma(a) - mpmath.loggamma(2 * a))
    return mpmath.exp(log_pref) * mpmath.hyp2f1(2 * a, 1, a + 1, x)


def test_log_gamma_matches_mpmath():
    for z in [Fraction(1), Fraction(1, 2), Fraction(7, 2), Fraction(9), Fraction(10),
              Fraction(21, 2), Fraction(5000), Fraction(1000001, 2)]:
        iv = log_gamma(z)
        val = mpmath.loggamma(mpmath.mpf(z.numerator) / z.denominator)
        assert mpmath.mpf(iv.lo) <= val <= mpmath.mpf(iv.hi), z
        assert iv.width <= 1e-9 * max(1.0, abs(iv.mid))


def test_main_term_at_rho_one():
    for n in (4, 100, 10**4):
        L = main_term_L(n, Interval(1.0, 1.0))
        exact = mpmath.exp(mpmath.mpf(1) / (4 * n)) * mpmath.exp(-0.5) / mpmath.sqrt(2 * mpmath.pi)
        assert mpmath.mpf(L.lo) <= exact <= mpmath.mpf(L.hi)


def test_main_term_matches_closed_form_oracle():
    n = 10**4
    rho = rho_for(n, DEFAULT_A)
    L = main_term_L(n, rho)
    r = mpmath.mpf(6131) / 5000 * mpmath.mpf(n) ** 0.25
    oracle = (1 / mpmath.sqrt(2 * mpmath.pi) / r * mpmath.exp(r**4 / (4 * n)) * mpmath.exp(-r**2 / 2))
    assert abs(L.mid - oracle) / oracle < 1e-10


@pytest.mark.parametrize("n", [10, 100, 10**4, 10**6])
@pytest.mark.parametrize("a", [Fraction(1, 2), DEFAULT_A, Fraction(2)])
def test_main_term_identity_intervals_intersect(n, a):
    rho = rho_for(n, a)
    lhs, rhs = log_main_term_identity(n, rho)
    assert lhs.intersects(rhs)
    if rho.hi < 30:
        lhs, rhs = main_term_identity(n, rho)
        assert lhs.intersects(rhs)


def test_p_is_half_at_rho_zero():
    assert facet_escape_p(10, 0, 3).contains(Fraction(1, 2))


def test_p_circular_segment_closed_form():
    # n = 3, S = 1, rho = 1/2
    r = Interval.point(math.sqrt(0.75))
    p = facet_escape_p(3, Fraction(1, 2), r)
    exact = (mpmath.pi / 6 - mpmath.sqrt(3) / 8) / (mpmath.pi / 2)
    assert mpmath.mpf(p.lo) <= exact * (1 + 1e-15) and exact * (1 - 1e-15) <= mpmath.mpf(p.hi)
    assert p.width < 1e-4 * p.mid


def test_p_flat_density_at_n_two():
    p = facet_escape_p(2, Fraction(3, 5), Fraction(4, 5))
    assert p.contains(Fraction(1, 5))


def test_p_matches_betainc_on_random_instances():
    rng = np.random.default_rng(99)
    for _ in range(20):
        n = int(rng.integers(3, 400))
        rho = float(rng.uniform(0.05, 4.0))
        r = float(rng.uniform(0.0, 25.0))
        p = facet_escape_p(n, rho, r)
        k = (n - 2) / 2
        x0 = rho / math.hypot(r, rho)
        sp = betainc(k + 1, k + 1, (1 - x0) / 2)
        mp = p_oracle(n, rho, r)
        assert mpmath.mpf(p.lo) <= mp <= mpmath.mpf(p.hi), (n, rho, r)
        if sp > 1e-300:
            assert abs(sp - float(mp)) <= 1e-8 * float(mp) + 1e-300


def test_p_alternative_exponent_is_reported_separately():
    p = facet_escape_p(20, 2, 4, alt_exponent=True)
    assert mpmath.mpf(p.lo) <= p_oracle(20, 2, 4, exponent=Fraction(19, 2)) <= mpmath.mpf(p.hi)
    assert not p.intersects(facet_escape_p(20, 2, 4))


def test_p_in_range_and_monotone_in_rho():
    r = 3.0
    prev = 0.5
    for rho in np.linspace(0.1, 4.0, 25):
        p = facet_escape_p(30, float(rho), r)
        assert 0.0 <= p.lo <= p.hi <= 0.5
        assert p.lo <= prev
        prev = p.hi


def test_p_enclosure_in_high_dimension():
    n = 10**6
    rho = rho_for(n, DEFAULT_A)
    r = math.sqrt(n - 1)
    lp = log_facet_escape_p(n, rho, r)
    mp = p_oracle(n, mpmath.mpf(6131) / 5000 * mpmath.mpf(n) ** 0.25, mpmath.sqrt(n - 1))
    assert mpmath.mpf(lp.lo) <= mpmath.log(mp) <= mpmath.mpf(lp.hi)
    assert lp.width < 1e-3


def test_p_monte_carlo_at_a_million_samples():
    n = 50
    rho = float(DEFAULT_A) * 50**0.25
    est = mc_facet_escape(n, rho, 7.0, 10**6, seed=2024)
    p = facet_escape_p(n, rho, 7.0)
    assert est.within(p.lo) or est.within(p.hi) or p.lo <= est.frequency <= p.hi


def test_monte_carlo_is_reproducible():
    a = mc_facet_escape(10, 1.0, 2.0, 20_000, seed=5)
    b = mc_facet_escape(10, 1.0, 2.0, 20_000, seed=5)
    assert a == b


@pytest.mark.parametrize("n,rho,r,N", [(20, 2.0, 4.0, 30), (10, 1.5, 2.0, 5), (40, 3.0, 6.0, 60)])
def test_membership_monte_carlo(n, rho, r, N):
    est = mc_facet_membership(n, rho, r, N, 100_000, seed=17)
    surv = survival_probability(n, rho, r, N)
    assert est.within(surv.mid)


def test_membership_trivial_cases():
    assert mc_facet_membership(20, 2.0, 4.0, 1, 10_000, seed=0).frequency == 1.0
    assert survival_probability(20, 2.0, 4.0, 1) == Interval(1.0, 1.0)
    assert facet_escape_p(20, 10, 0).hi < 1e-20
    est = mc_facet_membership(20, 10.0, 0.0, 10, 10_000, seed=0)
    assert est.frequency == 1.0


def test_integrand_examples():
    assert integrand_F(0, DEFAULT_A, 0).contains(1)
    v = integrand_F(Fraction(0))
    assert mpmath.mpf(v.lo) <= mpmath.exp(-mpmath.mpf(2387) / 1000) <= mpmath.mpf(v.hi)
    a2 = (mpmath.mpf(6131) / 5000) ** 2
    w = integrand_F(Fraction(-6))
    assert mpmath.mpf(w.lo) <= mpmath.exp(-36 - mpmath.mpf(2.387) * mpmath.exp(-6 * a2)) <= mpmath.mpf(w.hi)


def test_integrand_below_gaussian_on_grid():
    for j in range(-60, 61):
        w = Fraction(j, 10)
        assert integrand_F(w).hi <= math.exp(-float(w) ** 2) * (1 + 1e-12)


def test_second_derivative_bound_examples():
    M = second_derivative_bound_M(DEFAULT_A)
    assert M.hi < 6.476
    e = mpmath.e
    M1 = second_derivative_bound_M(1)
    exact = 2 + 1 / e + 4 / e + 4 / (e * mpmath.sqrt(2 * e)) + 4 * e**-2
    assert mpmath.mpf(M1.lo) <= exact <= mpmath.mpf(M1.hi)
    small = second_derivative_bound_M(Fraction(1, 10**4))
    assert abs(small.mid - (2 + 4 / math.e)) < 1e-6


def test_certificate_with_published_parameters():
    cert = certify_lower_bound()
    assert cert.status == "certified"
    assert cert.quadrature.T.lo >= 0.33310717054594
    assert cert.quadrature.J_lo >= 0.33310555154594
    assert cert.M.hi < 6.476
    assert cert.M_grid_max <= cert.M.lo
    assert cert.prefactor.lo >= 1.6632596039
    assert cert.inv_sqrt_pi.lo >= 0.5641895835
    assert Fraction(cert.constant_lower) >= Fraction(312584, 10**6)


def test_certificate_fails_above_achievable_target():
    cert = certify_lower_bound(target=Fraction(35, 100))
    assert cert.status == "failed" and cert.failing_factor == "target"


def test_certificate_fails_with_zero_prefactor():
    params = NazarovParams(b=0, h=Fraction(1, 100))
    cert = certify_lower_bound(params)
    assert cert.status == "failed"
    assert cert.failing_factor == "prefactor"
    assert cert.constant_lower == 0.0
    assert abs(cert.J.mid - math.sqrt(math.pi)) < 1e-3


def test_params_require_integer_node_count():
    with pytest.raises(ValueError):
        NazarovParams(h=Fraction(5, 7)).nodes


def test_half_space_count_for_moderate_dimension():
    params = NazarovParams(n=100)
    N = params.N
    L = main_term_L(100, params.rho)
    assert N <= float(DEFAULT_B) / L.lo and N + 1 > float(DEFAULT_B) / L.hi


def test_radial_density_closed_form_at_n_two():
    v = radial_density_cf(2, 0)
    assert mpmath.mpf(v.lo) <= mpmath.exp(-0.5) <= mpmath.mpf(v.hi)


@pytest.mark.parametrize("w", [0, 1, -2])
def test_radial_density_limit(w):
    v = radial_density_cf(10**4, w)
    assert abs(v.mid - math.exp(-w * w) / math.sqrt(math.pi)) <= 0.01


def test_asymptote_ratios():
    rows = asymptote_check_p([10**4, 10**6])
    assert all(0.8 < row.ratio.lo and row.ratio.hi < 1.2 for row in rows)
    assert abs(rows[1].ratio.mid - 1) < abs(rows[0].ratio.mid - 1)
    w1 = asymptote_check_p([10**4], w=1)[0]
    assert 0.8 < w1.ratio.mid / rows[0].ratio.mid < 1.2
