"""Real Gamma function and Gamma ratios in double precision.

Everything here is built on the Stirling series for log-Gamma with the fixed
coefficient table ``_STIRLING`` below, combined with the recurrence
``Gamma(x+1) = x Gamma(x)`` to move small arguments into the asymptotic
region and the reflection formula for ``x < 1/2``.

All functions accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["GammaPoleError", "gamma", "lgamma", "gamma_ratio", "hurwitz_zeta"]

# B_{2k} / (2k (2k-1)) for k = 1..8.  Truncation error at x >= 8 is < 1e-16.
_STIRLING = np.array([
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
])

_SHIFT_TO = 10.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


class GammaPoleError(ValueError):
    """Raised when Gamma is evaluated at a non-positive integer."""


def _check_poles(x):
    bad = (x <= 0) & (x == np.round(x))
    if np.any(bad):
        where = np.asarray(x)[bad].ravel()[0]
        raise GammaPoleError(f"Gamma has a pole at x = {where:g}")


def _stirling_tail(y):
    """sum_k c_k / y^(2k-1) for y >= ~8, evaluated by Horner in 1/y^2."""
    inv = 1.0 / y
    inv2 = inv * inv
    acc = np.zeros_like(y)
    for c in _STIRLING[::-1]:
        acc = acc * inv2 + c
    return acc * inv


def _shift_up(y):
    """Return (y + s, prod_{i<s}(y + i)) with y + s >= _SHIFT_TO."""
    steps = np.where(y < _SHIFT_TO, np.ceil(_SHIFT_TO - y), 0.0)
    prod = np.ones_like(y)
    shifted = y.copy()
    for _ in range(int(steps.max(initial=0.0))):
        active = steps > 0
        prod = np.where(active, prod * shifted, prod)
        shifted = np.where(active, shifted + 1.0, shifted)
        steps = steps - 1.0
    return shifted, prod


def _gamma_right(y):
    """Gamma(y) for y >= 1/2."""
    z, prod = _shift_up(y)
    # Split the power in two halves to postpone overflow for large z.
    half = np.power(z, 0.5 * (z - 0.5))
    g = _SQRT_2PI * half * np.exp(-z) * half * np.exp(_stirling_tail(z))
    return g / prod


def _sin_pi(x):
    """sin(pi x) with exact zeros at the integers and argument reduction."""
    n = np.round(x)
    r = x - n
    sign = np.where(np.mod(n, 2.0) == 0.0, 1.0, -1.0)
    return sign * np.sin(math.pi * r)


def gamma(x):
    """Euler Gamma function for real arguments.

    Raises GammaPoleError at non-positive integers.
    """
    xa = np.asarray(x, dtype=float)
    _check_poles(xa)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    out = np.empty_like(xa)
    right = xa >= 0.5
    if np.any(right):
        out[right] = _gamma_right(xa[right])
    left = ~right
    if np.any(left):
        xl = xa[left]
        out[left] = math.pi / (_sin_pi(xl) * _gamma_right(1.0 - xl))
    return float(out[0]) if scalar else out


def lgamma(x):
    """log|Gamma(x)| for real x (not a pole)."""
    xa = np.asarray(x, dtype=float)
    _check_poles(xa)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    out = np.empty_like(xa)
    right = xa >= 0.5
    if np.any(right):
        z, prod = _shift_up(xa[right])
        out[right] = ((z - 0.5) * np.log(z) - z + _HALF_LOG_2PI
                      + _stirling_tail(z) - np.log(prod))
    left = ~right
    if np.any(left):
        xl = xa[left]
        out[left] = (math.log(math.pi) - np.log(np.abs(_sin_pi(xl)))
                     - lgamma(1.0 - xl))
    return float(out[0]) if scalar else out


def _log_ratio_stirling(q, d):
    """log Gamma(q + d) - log Gamma(q) for q, q + d >= 8 without cancellation."""
    p = q + d
    lead = d * np.log(q) + (p - 0.5) * np.log1p(d / q) - d
    return lead + _stirling_tail(p) - _stirling_tail(q)


def gamma_ratio(x, a, b):
    """Gamma(x + a) / Gamma(x + b).

    Uses a Stirling-series difference (no large logarithms are subtracted)
    once both arguments are at least 8, and the direct quotient otherwise.
    """
    xa, aa, ba = np.broadcast_arrays(np.asarray(x, float), np.asarray(a, float),
                                     np.asarray(b, float))
    p = xa + aa
    q = xa + ba
    _check_poles(p)
    _check_poles(q)
    scalar = p.ndim == 0
    p = np.atleast_1d(p).astype(float)
    q = np.atleast_1d(q).astype(float)
    aa = np.atleast_1d(aa)
    ba = np.atleast_1d(ba)
    out = np.empty_like(p)
    big = np.minimum(p, q) >= 8.0
    if np.any(big):
        d = (aa - ba) * np.ones_like(p)
        out[big] = np.exp(_log_ratio_stirling(q[big], d[big]))
    small = ~big
    if np.any(small):
        out[small] = gamma(p[small]) / gamma(q[small])
    return float(out[0]) if scalar else out


# B_{2k} / (2k)! for k = 1..8, used by the Euler-Maclaurin tail of hurwitz_zeta.
_BERNOULLI_OVER_FACT = np.array([
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
])


def hurwitz_zeta(s: float, a: float, terms: int = 20) -> float:
    """Hurwitz zeta(s, a) = sum_k (k + a)^(-s), analytically continued, s != 1.

    Direct sum of ``terms`` terms plus the Euler-Maclaurin tail; accurate to
    double precision for moderate |s| (|s| <= 6) and a in (0, 2].
    """
    if s == 1.0:
        raise ValueError("hurwitz_zeta has a pole at s = 1")
    k = np.arange(terms, dtype=float) + a
    head = math.fsum(np.power(k, -s))
    N = terms + a
    tail = N ** (1.0 - s) / (s - 1.0) + 0.5 * N ** (-s)
    rising = s  # s (s+1) ... (s + 2k - 2)
    for i, b in enumerate(_BERNOULLI_OVER_FACT):
        tail += b * rising * N ** (-s - 2 * i - 1)
        rising *= (s + 2 * i + 1) * (s + 2 * i + 2)
    return head + tail
