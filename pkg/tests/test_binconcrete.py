import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from t2p import binconcrete as bc
from t2p import tensor as T
from t2p.errors import ContractError, DomainError
from t2p.gradcheck import finite_diff_check

GRID_ALPHA = [0.1, 0.8, 1.0, 5.0]
GRID_LAM = [0.1, 0.21, 0.5, 0.83, 1.0]


def mp_log_pdf(x, alpha, lam):
    """Extended-precision reference log-density."""
    with mpmath.workdps(50):
        x, a, l = mpmath.mpf(x), mpmath.mpf(alpha), mpmath.mpf(lam)
        val = l * a * x ** (-(l + 1)) * (1 - x) ** (-(l + 1)) / (a * x ** (-l) + (1 - x) ** (-l)) ** 2
        return float(mpmath.log(val))


# -- sample -------------------------------------------------------------------


def test_sample_symmetric_fixed_point():
    s = bc.sample(np.ones(2), np.ones(2), 0.83, np.array([0.5, 0.5]), eps=0.0)
    np.testing.assert_allclose(s.Y, [1.0, 1.0])
    np.testing.assert_allclose(s.relaxed.data, [0.5, 0.5])
    np.testing.assert_allclose(s.z.data, [0.5, 0.5])


@pytest.mark.parametrize("c", [0.01, 1.0, 7.5])
def test_sample_symmetry(c):
    s = bc.sample(np.full(2, c), np.full(2, c), 0.5, np.array([0.3, 0.3]))
    np.testing.assert_allclose(s.z.data, [0.5, 0.5], atol=1e-15)


def test_sample_dominant_location():
    rng = np.random.default_rng(0)
    u = bc.uniform_draws(rng, (10_000, 2))
    s = bc.sample(np.array([5.0, 1.0]), np.array([1.0, 1.0]), 0.83, u)
    assert s.z.data[:, 0].mean() > 0.9


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**31))
def test_sample_simplex(k, seed):
    rng = np.random.default_rng(seed)
    a1 = rng.uniform(1e-3, 20, size=k)
    a2 = rng.uniform(1e-3, 20, size=k)
    z = bc.sample(a1, a2, 0.83, bc.uniform_draws(rng, k)).z.data
    assert abs(z.sum() - 1.0) < 1e-9
    assert np.all((z >= 0) & (z <= 1))


def test_sample_rejects_u_outside_unit_interval():
    for bad in ([0.0, 0.5], [0.5, 1.0], [-0.1, 0.5]):
        with pytest.raises(DomainError):
            bc.sample(np.ones(2), np.ones(2), 0.5, np.array(bad))


def test_low_temperature_concentrates_at_boundaries():
    rng = np.random.default_rng(3)
    s = bc.sample(np.array([5.0]), np.array([1.0]), 0.05, bc.uniform_draws(rng, (10_000, 1)))
    r = s.relaxed.data
    assert np.mean((r < 0.05) | (r > 0.95)) >= 0.95


def test_sample_gradient_flows_to_both_locations(rng):
    a1 = T.Tensor(rng.uniform(0.5, 2, size=(3, 4)), requires_grad=True)
    a2 = T.Tensor(rng.uniform(0.5, 2, size=(3, 4)), requires_grad=True)
    u = bc.uniform_draws(rng, (3, 4))
    w = rng.normal(size=(3, 4))
    assert finite_diff_check(lambda: (bc.sample(a1, a2, 0.83, u).z * w).sum(), [a1, a2], h=1e-5) < 1e-4


# -- pdf / log_pdf ------------------------------------------------------------


@pytest.mark.parametrize("lam", GRID_LAM)
def test_pdf_at_half_with_unit_location_is_temperature(lam):
    assert bc.pdf(0.5, bc.BinConcreteParams(1.0, lam)) == lam


def _mass_below_half(alpha, lam):
    # integrate in s = log x so the x**(lam - 1) behaviour at 0 becomes a smooth exponential tail
    p = bc.BinConcreteParams(alpha, lam)

    def integrand(s):
        x = math.exp(s)
        return float(bc.pdf(x, p)) * x if x > 0.0 else 0.0  # below exp(-745) the mass is < 1e-30

    return integrate.quad(integrand, -np.inf, math.log(0.5), limit=500, epsabs=1e-12, epsrel=1e-10)[0]


@pytest.mark.parametrize("alpha", GRID_ALPHA)
@pytest.mark.parametrize("lam", GRID_LAM)
def test_pdf_integrates_to_one(alpha, lam):
    # the upper half of the density at alpha is the lower half at 1/alpha, reflected
    total = _mass_below_half(alpha, lam) + _mass_below_half(1.0 / alpha, lam)
    assert abs(total - 1.0) < 1e-3


@pytest.mark.parametrize("alpha", GRID_ALPHA)
@pytest.mark.parametrize("lam", GRID_LAM)
def test_truncated_quadrature_matches_cdf(alpha, lam):
    # at small temperatures a visible share of the mass sits within 1e-9 of the boundaries
    p = bc.BinConcreteParams(alpha, lam)
    d = 1e-9
    pieces = [(d, 1e-6), (1e-6, 1e-3), (1e-3, 0.5), (0.5, 1 - 1e-3), (1 - 1e-3, 1 - 1e-6), (1 - 1e-6, 1 - d)]
    got = sum(integrate.quad(lambda x: float(bc.pdf(x, p)), lo, hi, limit=500, epsabs=1e-13)[0]
              for lo, hi in pieces)
    assert got == pytest.approx(float(bc.cdf(1 - d, p) - bc.cdf(d, p)), abs=1e-6)


def test_cdf_matches_sampling():
    p = bc.BinConcreteParams(0.8, 0.5)
    rng = np.random.default_rng(2)
    x = bc.sample(np.array([0.8]), np.array([1.0]), 0.5, bc.uniform_draws(rng, (20_000, 1))).relaxed.data[:, 0]
    for q in (0.1, 0.5, 0.9):
        assert np.mean(x <= q) == pytest.approx(float(bc.cdf(q, p)), abs=0.015)


def test_pdf_reflection_identity(rng):
    x = rng.uniform(0.001, 0.999, size=100)
    for alpha, lam in [(0.8, 0.21), (3.0, 0.83), (0.1, 0.5)]:
        lhs = bc.pdf(x, bc.BinConcreteParams(alpha, lam))
        rhs = bc.pdf(1 - x, bc.BinConcreteParams(1 / alpha, lam))
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9)


def test_pdf_domain():
    p = bc.BinConcreteParams(0.8, 0.21)
    for bad in (0.0, 1.0, 1.5, -0.2):
        with pytest.raises(DomainError):
            bc.pdf(bad, p)
        with pytest.raises(DomainError):
            bc.log_pdf(bad, p)


def test_log_pdf_values():
    assert bc.log_pdf(0.5, bc.BinConcreteParams(1.0, 0.5)) == pytest.approx(math.log(0.5), abs=1e-15)


def test_log_pdf_matches_pdf(rng):
    x = rng.uniform(0.01, 0.99, size=100)
    p = bc.BinConcreteParams(0.8, 0.21)
    np.testing.assert_allclose(np.exp(bc.log_pdf(x, p)), bc.pdf(x, p), rtol=1e-9)


@pytest.mark.parametrize("x", [1e-8, 1e-300, 0.3, 1 - 1e-8])
def test_log_pdf_against_extended_precision(x):
    got = bc.log_pdf(x, bc.BinConcreteParams(0.8, 0.2))
    assert np.isfinite(got)
    assert got == pytest.approx(mp_log_pdf(x, 0.8, 0.2), abs=1e-6)


def test_log_density_from_logit_matches_log_pdf(rng):
    logit = rng.normal(scale=3, size=50)
    x = 1 / (1 + np.exp(-logit))
    got = bc.log_density_from_logit(T.Tensor(logit), T.Tensor(np.log(0.8)), 0.21).data
    np.testing.assert_allclose(got, bc.log_pdf(x, bc.BinConcreteParams(0.8, 0.21)), rtol=1e-9, atol=1e-9)


def test_params_validation():
    with pytest.raises(DomainError):
        bc.BinConcreteParams(0.0, 0.5)
    with pytest.raises(DomainError):
        bc.BinConcreteParams(1.0, 0.0)
    with pytest.raises(DomainError):
        bc.BinConcreteParams(1.0, 1.5)


# -- mc_kl --------------------------------------------------------------------


@pytest.mark.parametrize("mode", bc.KL_MODES)
def test_kl_identical_is_zero(mode):
    p = bc.BinConcreteParams(2.0, 0.5)
    terms = bc.kl_samples(p, p, 10_000, mode=mode, rng=np.random.default_rng(1)).data
    stderr = terms.std() / math.sqrt(terms.size) + 1e-15
    assert abs(terms.mean()) <= 3 * stderr


def test_kl_posterior_mode_nonnegative_and_consistent():
    q = bc.BinConcreteParams(2.0, 0.83)
    p = bc.BinConcreteParams(0.8, 0.21)
    ref = bc.kl_samples(q, p, 1_000_000, rng=np.random.default_rng(10)).data
    est = bc.kl_samples(q, p, 1_000, rng=np.random.default_rng(11)).data
    assert ref.mean() > 0
    se = math.sqrt(ref.var() / ref.size + est.var() / est.size)
    assert abs(ref.mean() - est.mean()) <= 3 * se


def test_kl_variance_scales_inversely_with_samples():
    q = bc.BinConcreteParams(2.0, 0.83)
    p = bc.BinConcreteParams(0.8, 0.21)
    rng = np.random.default_rng(5)
    small = [bc.mc_kl(q, p, 50, rng=rng).item() for _ in range(200)]
    large = [bc.mc_kl(q, p, 200, rng=rng).item() for _ in range(200)]
    ratio = np.var(small, ddof=1) / np.var(large, ddof=1)
    assert 4 * 0.7 <= ratio <= 4 * 1.3


def test_kl_rejects_zero_samples():
    p = bc.BinConcreteParams(1.0, 0.5)
    with pytest.raises(ContractError):
        bc.mc_kl(p, p, 0, rng=np.random.default_rng(0))


def test_kl_frozen_draws_shape_checked():
    p = bc.BinConcreteParams(np.ones(3), 0.5)
    with pytest.raises(ContractError):
        bc.mc_kl(p, p, 2, u=np.full((3, 2), 0.5))


@pytest.mark.parametrize("mode", bc.KL_MODES)
def test_kl_gradient_matches_finite_differences(mode, rng):
    loc = T.Tensor(rng.uniform(0.3, 3.0, size=(5, 4)), requires_grad=True)
    u = bc.uniform_draws(rng, (10, 5, 4))
    prior = bc.BinConcreteParams(0.8, 0.21)

    def f():
        return bc.mc_kl(bc.BinConcreteParams(loc, 0.83), prior, 10, mode=mode, u=u)

    assert finite_diff_check(f, [loc], h=1e-6) < 1e-3


def test_kl_vector_locations_sum_over_latent_axis(rng):
    u = bc.uniform_draws(rng, (7, 3))
    q = bc.BinConcreteParams(np.array([0.5, 1.0, 2.0]), 0.83)
    p = bc.BinConcreteParams(0.8, 0.21)
    joint = bc.kl_samples(q, p, 7, u=u).data
    parts = sum(
        bc.kl_samples(bc.BinConcreteParams(q.location[i], 0.83), p, 7, u=u[:, i]).data for i in range(3)
    )
    np.testing.assert_allclose(joint, parts, rtol=1e-12)
