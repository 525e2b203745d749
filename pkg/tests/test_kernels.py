import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sharpfront import kernels as kr
from sharpfront.contour_rhs import GridFunction, QuadratureRule, check_g1_zero_integral
from sharpfront.kernels import PointJet, ZSeries

ALPHA8 = (0.2, 0.5, 0.8, 0.95, 1.05, 1.3, 1.6, 1.9)
ALPHA10 = (0.1, 0.3, 0.5, 0.7, 0.95, 1.05, 1.3, 1.5, 1.7, 1.9)


def _fields(n=256):
    return {
        "zero": GridFunction.zeros(n),
        "cos": GridFunction.from_function(lambda x: 0.1 * np.cos(x), n),
        "mixed": GridFunction.from_function(lambda x: 0.05 * np.cos(x) + 0.03 * np.sin(2 * x), n),
    }


# --- ZSeries arithmetic ----------------------------------------------------

def _taylor(fn_vals):
    return ZSeries(np.array(fn_vals, float))


def test_series_elementary_functions():
    z = 0.01
    for ser, fn in [(ZSeries.cos_z(5), math.cos), (ZSeries.sin_z(5), math.sin),
                    (ZSeries.sin_z_over_z(5), lambda t: math.sin(t) / t),
                    (ZSeries.chord_over_z(5), lambda t: 2 * math.sin(t / 2) / t),
                    (ZSeries.versine_over_z2(5), lambda t: 2 * math.sin(t / 2) ** 2 / t ** 2)]:
        assert abs(ser(z) - fn(z)) <= 1e-14


def test_series_algebra_matches_functions():
    z = 0.02
    a = ZSeries(np.array([1.3, -0.4, 0.2, 0.7, -0.1]))
    b = ZSeries(np.array([0.8, 0.5, -0.3, 0.0, 0.2]))
    av, bv = a(z), b(z)
    tol = 5 * z ** 5
    assert abs((a * b)(z) - av * bv) <= tol
    assert abs((a / b)(z) - av / bv) <= tol
    assert abs(a.sqrt()(z) - math.sqrt(av)) <= tol
    assert abs(a.power(-0.75)(z) - av ** -0.75) <= tol
    assert abs(a.cos()(z) - math.cos(av)) <= tol
    assert abs(a.sin()(z) - math.sin(av)) <= tol
    assert abs((a * a.reciprocal())(z) - 1) <= 1e-15


def test_series_domain_errors():
    with pytest.raises(kr.KernelDomainError):
        ZSeries(np.array([0.0, 1.0, 0.0])).reciprocal()
    with pytest.raises(kr.KernelDomainError):
        ZSeries(np.array([-1.0, 1.0, 0.0])).sqrt()


@given(st.floats(0.1, 3), st.floats(-2, 2), st.floats(-2, 2), st.floats(-1.5, 1.5))
def test_power_multiplicative(c0, c1, c2, p):
    a = ZSeries(np.array([c0, c1, c2, 0.3]))
    lhs = a.power(p) * a.power(1 - p)
    assert np.allclose(lhs.coeffs, a.coeffs, rtol=1e-10, atol=1e-10 * max(1, c0) ** 4)


# --- pointwise kernels -----------------------------------------------------

@pytest.mark.parametrize("a", [0.5, 1.5])
def test_g_at_zero(a):
    z = np.linspace(0.1, 3.0, 17)
    base = 2 * (1 - np.cos(z))
    assert np.allclose(kr.g1(0.0, z, a), 0.5 * base ** (1 - a / 2), rtol=1e-13)
    assert np.allclose(kr.g2(0.0, z, a), base ** (-a / 2), rtol=1e-13)


@given(st.floats(-0.3, 0.3), st.floats(0.05, 3.0), st.floats(0.1, 1.9))
def test_g_parity_in_z(X, z, a):
    assert kr.g1(X, z, a) == pytest.approx(kr.g1(X, -z, a), rel=1e-14)
    assert kr.g2(X, z, a) == pytest.approx(kr.g2(X, -z, a), rel=1e-14)


@pytest.mark.parametrize("a", [0.5, 1.5])
def test_g_derivatives_by_finite_differences(a):
    h = 1e-5
    for z in [0.3, 1.0, 2.5]:
        for X in [0.0, 0.12]:
            fd1 = (kr.g1(X + h, z, a) - kr.g1(X - h, z, a)) / (2 * h)
            fd2 = (kr.g2(X + h, z, a) - kr.g2(X - h, z, a)) / (2 * h)
            assert abs(fd1 - kr.g1_prime(X, z, a)) <= 1e-6 * max(1, abs(fd1))
            assert abs(fd2 - kr.g2_prime(X, z, a)) <= 1e-6 * max(1, abs(fd2))


def test_g_domain_error():
    with pytest.raises(kr.KernelDomainError):
        kr.g1(0.6, 1.0, 1.5)


def test_g1_zero_integral():
    for a in [0.5, 1.0, 1.5]:
        assert check_g1_zero_integral(a, QuadratureRule(2 ** 16)) <= 1e-8


# --- series vs pointwise ---------------------------------------------------

def test_constants_matrix():
    for a in ALPHA8:
        c = kr.kernel_constants(a)
        assert c.entry(1, 0) == -1 and c.entry(3, 1) == 1 + a / 2 and c.entry(2, 1) == 0
        ser = np.array([kr.k_series(k, PointJet.zero(), a).coeffs[:3] for k in (1, 2, 3)]).T
        assert np.max(np.abs(ser - c.matrix)) <= 1e-12


def _jet_and_delta(x0):
    """Jet of 0.1 cos x + 0.04 sin 3x at x0 and the exact difference f(x0) - f(x0 - z)."""
    def f(x):
        return 0.1 * np.cos(x) + 0.04 * np.sin(3 * x)
    d = [f(x0), -0.1 * math.sin(x0) + 0.12 * math.cos(3 * x0),
         -0.1 * math.cos(x0) - 0.36 * math.sin(3 * x0),
         0.1 * math.sin(x0) - 1.08 * math.cos(3 * x0),
         0.1 * math.cos(x0) + 3.24 * math.sin(3 * x0)]
    return PointJet(tuple(d)), (lambda z: f(x0) - f(x0 - z)), 1 + 2 * f(x0)


@pytest.mark.parametrize("kind", [1, 2, 3])
@pytest.mark.parametrize("a", [0.5, 1.5])
def test_series_error_decays_like_z_to_fourth(kind, a):
    jet, delta, r2 = _jet_and_delta(0.7)
    ser = kr.k_series(kind, jet, a, order=3)
    zs = [1e-2, 5e-3, 2.5e-3]
    errs = []
    for z in zs:
        X = delta(z) / (2 * math.sin(z / 2)) / r2
        errs.append(abs(ser(z) - kr.k_pointwise(kind, X, z, a)))
    # order 4 in z: each halving divides the error by at least ~16
    assert errs[0] / errs[1] >= 12 and errs[1] / errs[2] >= 12
    scaled = [e / z ** 4 for e, z in zip(errs, zs)]
    assert max(scaled) <= 1.01 * scaled[0]


def test_series_z_coefficient_by_finite_difference():
    a, slope = 1.5, 0.2
    jet = PointJet((0.0, slope, 0.0, 0.0))
    ser = kr.k_series(2, jet, a)
    h = 1e-3
    vals = []
    for z in (h, -h):
        X = slope * z / (2 * math.sin(z / 2))
        vals.append(kr.k_pointwise(2, X, z, a))
    assert abs((vals[0] - vals[1]) / (2 * h) - ser[1]) <= 1e-6


def test_truncation_consistency():
    jet, _, _ = _jet_and_delta(1.9)
    jet5 = PointJet(jet.derivs + (0.0, 0.0))
    for kind in (1, 2, 3):
        s3 = kr.k_series(kind, jet, 1.3, order=3)
        s5 = kr.k_series(kind, jet5, 1.3, order=5)
        assert np.allclose(s5.coeffs[:4], s3.coeffs, rtol=1e-13, atol=1e-15)


@given(st.floats(0.01, 6.2), st.floats(0.1, 1.9), st.integers(1, 3))
def test_pointwise_kernel_periodic(z, a, kind):
    x0 = 0.4
    f = lambda x: 0.1 * np.cos(x) + 0.03 * np.sin(2 * x)
    r2 = 1 + 2 * f(x0)

    def K(zz):
        X = (f(x0) - f(x0 - zz)) / (2 * np.sin(zz / 2)) / r2
        return kr.k_pointwise(kind, X, zz, a)
    assert K(z) == pytest.approx(K(z + 2 * np.pi), rel=1e-9, abs=1e-12)


# --- the identity ----------------------------------------------------------

def test_a0_a1_vanish_at_zero():
    A0, A1 = kr.a0_a1(GridFunction.zeros(64), 1.5)
    assert np.max(np.abs(A0.samples)) <= 1e-15
    assert np.max(np.abs(A1.samples)) <= 1e-15


@pytest.mark.parametrize("name", ["zero", "cos", "mixed"])
def test_identity_eight_alphas(name):
    reps = kr.verify_hamiltonian_identity(_fields()[name], ALPHA8)
    assert all(r.passed for r in reps)
    assert max(r.max_residual for r in reps) <= 1e-7


def test_identity_ten_alphas_tight():
    f = _fields()["cos"]
    for a in ALPHA10:
        res, scale = kr.identity_residual(f, a)
        assert np.max(np.abs(res)) <= 1e-8 * scale


def test_identity_resolution_independent():
    fn = lambda x: 0.05 * np.cos(x) + 0.03 * np.sin(2 * x)
    for n in (256, 512):
        reps = kr.verify_hamiltonian_identity(GridFunction.from_function(fn, n), (0.5, 1.2, 1.9))
        assert all(r.passed for r in reps)


def test_identity_is_nontrivial():
    # A1 alone is O(f); the check is not satisfied vacuously.
    _, A1 = kr.a0_a1(_fields()["cos"], 1.5)
    assert np.max(np.abs(A1.samples)) > 1e-3


def test_identity_report_json():
    reps = kr.verify_hamiltonian_identity(_fields(64)["cos"], (1.5,))
    doc = json.loads(kr.reports_to_json(reps))
    assert set(doc[0]) == {"alpha", "max_residual", "worst_x", "pass"}
