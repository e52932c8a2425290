import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from risrate.errors import (ContourError, ConvergenceError, DomainError, PoleError,
                            UnderflowWarning)
from risrate.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, gauss_kronrod
from risrate.specfun import (MeijerGSpec, bessel_k_int, log_bessel_k_int, log_gamma,
                             meijer_g, saddle_abscissa)


# --- log_gamma ---------------------------------------------------------------

def test_log_gamma_one():
    v = log_gamma(1)
    assert v.log_modulus == pytest.approx(0.0, abs=1e-15)
    assert v.phase == 0.0


def test_log_gamma_five():
    v = log_gamma(5)
    assert v.log_modulus == pytest.approx(math.log(24), rel=1e-14)
    assert v.phase == 0.0


def test_log_gamma_complex_against_mpmath():
    mp.mp.dps = 40
    ref = mp.loggamma(mp.mpc(0.5, 3))
    v = log_gamma(0.5 + 3j)
    assert v.log_modulus == pytest.approx(float(ref.real), rel=1e-13)
    phase = float(mp.arg(mp.gamma(mp.mpc(0.5, 3))))
    assert v.phase == pytest.approx(phase, rel=1e-13)
    assert -math.pi < v.phase <= math.pi


def test_log_gamma_negative_real_phase():
    # Gamma(-0.5) = -2 sqrt(pi)
    v = log_gamma(-0.5)
    assert v.log_modulus == pytest.approx(math.log(2 * math.sqrt(math.pi)), rel=1e-14)
    assert abs(v.phase) == pytest.approx(math.pi)


def test_log_gamma_large_argument():
    mp.mp.dps = 40
    for z in (800.0, 300 + 700j):
        ref = mp.loggamma(mp.mpc(z))
        assert log_gamma(z).log_modulus == pytest.approx(float(ref.real), rel=1e-13)


def test_log_gamma_reflection_identity():
    rng = np.random.default_rng(7)
    for _ in range(50):
        x = rng.uniform(0.01, 0.99)
        y = rng.uniform(-19.9, 19.9) * math.sqrt(max(0.0, 1 - (x / 20) ** 2))
        z = complex(x, y)
        lhs = log_gamma(z).gamma() * log_gamma(1 - z).gamma()
        rhs = math.pi / complex(mp.sin(mp.pi * mp.mpc(z)))
        assert abs(lhs / rhs - 1) <= 1e-10


@pytest.mark.parametrize("z", [0, -1, -7, -3 + 1e-17])
def test_log_gamma_pole(z):
    with pytest.raises(PoleError):
        log_gamma(z)


def test_gamma_reconstruction():
    for z in (0.3 - 2j, 4.5, 10 + 10j):
        assert abs(log_gamma(z).gamma() / complex(mp.gamma(mp.mpc(z))) - 1) < 1e-12


# --- Bessel K ----------------------------------------------------------------

def test_bessel_k0_k1_at_two():
    assert bessel_k_int(0, 2.0) == pytest.approx(0.1138938727, abs=1e-10)
    assert bessel_k_int(1, 2.0) == pytest.approx(0.1398658818, abs=1e-10)


@pytest.mark.parametrize("x", [0.5, 1.0, 3.0, 5.0, 50.0])
@pytest.mark.parametrize("n", range(1, 21))
def test_bessel_recurrence(n, x):
    kp, km, k = bessel_k_int(n + 1, x), bessel_k_int(n - 1, x), bessel_k_int(n, x)
    assert abs(kp - km - 2 * n / x * k) <= 1e-10 * kp


@pytest.mark.parametrize("order", [0, 1, 5, 39, 40])
@pytest.mark.parametrize("x", [1e-6, 1e-3, 0.7, 2.0, 30.0, 300.0, 700.0])
def test_bessel_against_mpmath(order, x):
    mp.mp.dps = 30
    ref = mp.besselk(order, x)
    if ref > 1e300:
        # beyond double range: compare logs
        assert log_bessel_k_int(order, x) == pytest.approx(float(mp.log(ref)), rel=1e-12)
    else:
        assert bessel_k_int(order, x) == pytest.approx(float(ref), rel=1e-10)


def test_bessel_underflow_flagged():
    with pytest.warns(UnderflowWarning):
        assert bessel_k_int(0, 800.0) == 0.0
    # the log form stays finite
    assert np.isfinite(log_bessel_k_int(0, 800.0))


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_bessel_domain(x):
    with pytest.raises(DomainError):
        bessel_k_int(0, x)


def test_bessel_bad_order():
    with pytest.raises(DomainError):
        bessel_k_int(-1, 1.0)
    with pytest.raises(DomainError):
        bessel_k_int(1.5, 1.0)


# --- Meijer G ----------------------------------------------------------------

def test_meijer_g_examples():
    assert meijer_g(MeijerGSpec(1, 1, [0], [0]), 1.0) == pytest.approx(0.5, rel=1e-10)
    assert meijer_g(MeijerGSpec(1, 1, [-1], [0]), 1.0) == pytest.approx(0.25, rel=1e-10)
    assert meijer_g(MeijerGSpec(2, 0, [], [0, 0]), 1.0) == pytest.approx(0.2277877454, abs=1e-10)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 5.4])
def test_meijer_g_binomial_identity(c):
    spec = MeijerGSpec(1, 1, [1 - c], [0])
    x = np.logspace(-3, 3, 20)
    ref = math.gamma(c) * (1 + x) ** -c
    assert np.max(np.abs(meijer_g(spec, x) / ref - 1)) <= 1e-8


@pytest.mark.parametrize("nu", range(7))
def test_meijer_g_bessel_reduction(nu):
    spec = MeijerGSpec(2, 0, [], [nu, 0])
    z = np.logspace(-2, 2, 15)
    ref = np.array([2 * v ** (nu / 2) * bessel_k_int(nu, 2 * math.sqrt(v)) for v in z])
    assert np.max(np.abs(meijer_g(spec, z) / ref - 1)) <= 1e-8


@pytest.mark.parametrize("m,n,a,b,x", [
    (3, 2, [-2 / 3.4, 0], [39, 0, 4.4, -1 - 2 / 3.4], 0.02),
    (3, 2, [-2 / 3.4, 0], [9, 0, 4.4, -1 - 2 / 3.4], 50.0),
    (2, 1, [-2 / 3.4], [39, 0, -1 - 2 / 3.4], 3.0),
    (3, 1, [0], [19, 0, 4.4], 0.01),
    (3, 1, [0], [1, 0, 1e-3 - 1], 2.0),
    (3, 0, [1.2], [4, 0.5, -0.3], 7.0),
])
def test_meijer_g_against_mpmath(m, n, a, b, x):
    mp.mp.dps = 30
    an, ap = a[:n], a[n:]
    bm, bq = b[:m], b[m:]
    ref = float(mp.meijerg([an, ap], [bm, bq], x))
    assert meijer_g(MeijerGSpec(m, n, a, b), x) == pytest.approx(ref, rel=1e-9)


def test_meijer_g_tiny_value_keeps_relative_accuracy():
    # G^{2,0}_{0,2}(z | 0, 0) = 2 K0(2 sqrt z); about 1e-87 at z = 1e4
    z = 1e4
    ref = 2 * float(mp.besselk(0, 2 * mp.sqrt(z)))
    assert meijer_g(MeijerGSpec(2, 0, [], [0, 0]), z) == pytest.approx(ref, rel=1e-9)


def test_meijer_g_log_scale():
    spec = MeijerGSpec(2, 0, [], [3, 0])
    base = meijer_g(spec, 2.0)
    assert meijer_g(spec, 2.0, log_scale=5.0) == pytest.approx(base * math.exp(-5.0), rel=1e-12)


def test_meijer_g_contour_independence():
    spec = MeijerGSpec(3, 2, [-2 / 3.4, 0], [39, 0, 4.4, -1 - 2 / 3.4])
    lo, hi = spec.strip
    x = 0.3
    v1 = meijer_g(spec.with_contour(lo + (hi - lo) / 3), x)
    v2 = meijer_g(spec.with_contour(lo + 2 * (hi - lo) / 3), x)
    v0 = meijer_g(spec, x)
    assert abs(v1 - v2) <= 10 * spec.rel_tol * abs(v0)
    assert abs(v1 - v0) <= 10 * spec.rel_tol * abs(v0)


def test_saddle_abscissa_inside_strip():
    spec = MeijerGSpec(3, 2, [-2 / 3.4, 0], [39, 0, 4.4, -1 - 2 / 3.4])
    lo, hi = spec.strip
    for x in (1e-4, 1.0, 1e4):
        assert lo < saddle_abscissa(spec, x) < hi


@pytest.mark.parametrize("kwargs", [
    dict(m=3, n=0, a=[], b=[0, 0]),
    dict(m=1, n=2, a=[0], b=[0]),
    dict(m=-1, n=0, a=[], b=[0]),
])
def test_spec_order_validation(kwargs):
    with pytest.raises(ValueError):
        MeijerGSpec(**kwargs)


def test_spec_empty_strip():
    # a_1 - 1 = 1 is not below b_1 = 0
    with pytest.raises(ContourError):
        MeijerGSpec(1, 1, [2], [0])


def test_spec_contour_outside_strip():
    with pytest.raises(ContourError):
        MeijerGSpec(1, 1, [0], [0], contour_re=0.5)


def test_spec_nonconvergent_contour():
    # m + n - (p + q)/2 = 0: the vertical-line integral does not converge absolutely
    with pytest.raises(ConvergenceError):
        meijer_g(MeijerGSpec(1, 0, [], [0, 0.5]), 1.0)


def test_meijer_g_domain():
    with pytest.raises(DomainError):
        meijer_g(MeijerGSpec(1, 1, [0], [0]), -1.0)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(0.2, 8.0), x=st.floats(1e-3, 1e3))
def test_meijer_g_binomial_property(c, x):
    ref = math.gamma(c) * (1 + x) ** -c
    assert meijer_g(MeijerGSpec(1, 1, [1 - c], [0]), x) == pytest.approx(ref, rel=1e-8)


# --- Gauss-Kronrod -----------------------------------------------------------

def test_gk_constants():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    # Kronrod rule is exact through degree 22 (23 for odd terms by symmetry)
    for k in range(0, 23, 2):
        assert KRONROD_WEIGHTS @ NODES ** k == pytest.approx(2 / (k + 1), rel=1e-14)
    for k in range(0, 14, 2):
        assert GAUSS_WEIGHTS @ NODES ** k == pytest.approx(2 / (k + 1), rel=1e-14)


def test_gk_adaptive():
    res = gauss_kronrod(lambda t: 1 / np.sqrt(t + 1e-12), [0.0, 1.0], rtol=1e-10)
    assert res.value == pytest.approx(2.0, rel=1e-5)
    res = gauss_kronrod(np.exp, [0.0, 1.0])
    assert res.value == pytest.approx(math.e - 1, rel=1e-14)


def test_gk_reports_failure():
    with pytest.raises(ConvergenceError) as info:
        gauss_kronrod(lambda t: np.sin(1 / t), [1e-9, 1.0], rtol=1e-14, max_rounds=3)
    assert info.value.achieved > 0
