"""Linear frequencies of the alpha-SQG patch at the circular vortex.

The linearised pseudo-energy gradient at the disk is the Fourier multiplier
``-L_alpha(|D|)`` with

    L_alpha(j) = c_alpha / (2 - alpha) * [T1(j) - T2(j) - G(2-alpha)/G(1-alpha/2)^2]

and the frequencies are ``omega(j) = j L_alpha(|j|)``.  This module evaluates
these multipliers, certifies their structural properties (two zero
frequencies, monotonicity, convexity) and searches for three-wave resonances.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .special_functions import gamma, gamma_ratio

EULER_GAMMA = 0.57721566490153286061


class AlphaError(ValueError):
    """Raised for alpha outside (0, 2) or alpha = 1 where it is excluded."""


class InvariantViolation(RuntimeError):
    """A certified property of a FrequencyTable failed."""


@dataclass(frozen=True)
class Alpha:
    """The model parameter alpha in (0, 2)."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not (0.0 < v < 2.0) or not math.isfinite(v):
            raise AlphaError(f"alpha must lie in (0, 2), got {self.value!r}")
        object.__setattr__(self, "value", v)

    @property
    def is_one(self) -> bool:
        return abs(self.value - 1.0) < 1e-12

    @property
    def excludes_one(self) -> bool:
        return not self.is_one

    @property
    def delta(self) -> float:
        return self.value - 1.0

    def require_not_one(self, what: str = "this formula"):
        if self.is_one:
            raise AlphaError(f"{what} is not defined at alpha = 1")

    @classmethod
    def of(cls, alpha) -> "Alpha":
        return alpha if isinstance(alpha, cls) else cls(alpha)

    def __float__(self):
        return self.value


def c_alpha(alpha) -> float:
    """c_alpha = Gamma(alpha/2) / (2^(1-alpha) Gamma(1 - alpha/2))."""
    a = Alpha.of(alpha).value
    return gamma(a / 2) / (2.0 ** (1 - a) * gamma(1 - a / 2))


def _gamma_const(a: float) -> float:
    # Gamma(2-a) / (Gamma(1-a/2) Gamma(a/2)), the common prefactor of T1, T2, M.
    return gamma(2 - a) / (gamma(1 - a / 2) * gamma(a / 2))


def _ratio(a: float, xi):
    return gamma_ratio(xi, a / 2, 1 - a / 2)


def prefactor(alpha) -> float:
    """c_alpha / (2 (1 - alpha/2))."""
    a = Alpha.of(alpha).value
    return c_alpha(a) / (2 - a)


def _t1_sum(a: float, j):
    j = np.asarray(j)
    jmax = int(j.max(initial=0))
    k = np.arange(max(jmax, 1), dtype=float)
    terms = _ratio(a, k) / (1 - a / 2 + k)
    csum = np.concatenate([[0.0], np.cumsum(terms)])
    return _gamma_const(a) * csum[j]


def t1(alpha, j, method: str = "auto"):
    """The multiplier T1_alpha(|j|) for integer j.

    ``method`` is "sum" (the defining finite sum), "closed" (the alpha != 1
    closed form) or "auto" (closed form except at alpha = 1).
    """
    al = Alpha.of(alpha)
    a = al.value
    jj = np.abs(np.asarray(j, dtype=np.int64))
    if method == "auto":
        method = "sum" if al.is_one else "closed"
    if method == "sum":
        out = _t1_sum(a, jj)
    elif method == "closed":
        al.require_not_one("the closed form of T1")
        r0 = gamma(a / 2) / gamma(1 - a / 2)
        out = _gamma_const(a) / (a - 1) * (_ratio(a, jj.astype(float)) - r0)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out) if np.ndim(out) == 0 else out


def t2(alpha, xi, form: str = "gamma"):
    """The multiplier T2_alpha(|xi|) for real xi >= 0.

    ``form="m"`` evaluates ``(xi^2 - (1-alpha/2)^2) * M_alpha(xi)`` instead of
    the Gamma ratio; it fails at the pole of M_alpha.
    """
    a = Alpha.of(alpha).value
    x = np.abs(np.asarray(xi, dtype=float))
    if form == "gamma":
        out = _gamma_const(a) * _ratio(a, x)
    elif form == "m":
        out = (x * x - (1 - a / 2) ** 2) * m_alpha(a, x)
    else:
        raise ValueError(f"unknown form {form!r}")
    return float(out) if np.ndim(out) == 0 else out


def m_alpha(alpha, xi):
    """M_alpha(|xi|) = T2_alpha(|xi|) / (xi^2 - (1 - alpha/2)^2)."""
    a = Alpha.of(alpha).value
    x = np.abs(np.asarray(xi, dtype=float))
    pole = 1 - a / 2
    if np.any(np.abs(x - pole) < 1e-9):
        raise ValueError(f"M_alpha is singular at xi = 1 - alpha/2 = {pole:g}")
    out = _gamma_const(a) / (x * x - pole * pole) * _ratio(a, x)
    return float(out) if np.ndim(out) == 0 else out


def l_alpha(alpha, j, method: str = "auto"):
    """L_alpha(|j|), the symbol of -d grad E_alpha(0)."""
    al = Alpha.of(alpha)
    a = al.value
    jj = np.abs(np.asarray(j, dtype=np.int64))
    const = gamma(2 - a) / gamma(1 - a / 2) ** 2
    out = prefactor(al) * (t1(al, jj, method) - t2(al, jj.astype(float)) - const)
    return float(out) if np.ndim(out) == 0 else out


def delta_l(alpha, j):
    """First difference L_alpha(j+1) - L_alpha(j) = c_alpha T2(j) / (1 - alpha/2 + j).

    Every term is positive, so this is free of the cancellation that a direct
    subtraction of two L values suffers at large j.
    """
    a = Alpha.of(alpha).value
    jj = np.asarray(j, dtype=float)
    out = c_alpha(a) * t2(a, jj) / (1 - a / 2 + jj)
    return float(out) if np.ndim(out) == 0 else out


def omega(alpha, j):
    """omega_alpha(j) = j L_alpha(|j|); odd in j."""
    jj = np.asarray(j, dtype=np.int64)
    out = jj * l_alpha(alpha, np.abs(jj))
    return float(out) if np.ndim(out) == 0 else out


def second_difference_closed(alpha, j):
    """Closed form of omega(j+1) + omega(j-1) - 2 omega(j) for j >= 1."""
    a = Alpha.of(alpha).value
    jj = np.asarray(j, dtype=float)
    pre = gamma(2 - a) / (2.0 ** (1 - a) * gamma(1 - a / 2) ** 2)
    out = pre * gamma_ratio(jj, a / 2 - 1, 2 - a / 2) * a * jj
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class FrequencyTable:
    """L_alpha(j), omega_alpha(j) for 0 <= j <= j_max.

    ``increments[j] = omega(j) - omega(j-1)`` (``increments[0] = 0``) is
    stored alongside ``omega``.  It is accumulated from first differences of
    L_alpha, which carry no cancellation, so telescoped second differences
    keep their relative precision where omega(j) ~ j but the second
    difference is only ~ j^(alpha-2).
    """

    alpha: Alpha
    j_max: int
    L: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    increments: np.ndarray = field(repr=False)

    def omega_at(self, j):
        """omega(j) for any integer |j| <= j_max, using oddness for j < 0."""
        jj = np.asarray(j, dtype=np.int64)
        if np.any(np.abs(jj) > self.j_max):
            raise IndexError("|j| exceeds j_max of the table")
        return np.sign(jj) * self.omega[np.abs(jj)]

    def telescoped_second_difference(self, j):
        jj = np.asarray(j, dtype=np.int64)
        return self.increments[jj + 1] - self.increments[jj]


def build_table(alpha, j_max: int) -> FrequencyTable:
    """Tabulate L and omega up to j_max and certify the structural invariants."""
    al = Alpha.of(alpha)
    a = al.value
    if not (2 <= j_max <= 2 ** 20):
        raise ValueError(f"j_max must be in [2, 2^20], got {j_max}")
    j = np.arange(j_max + 1)
    L = l_alpha(al, j)
    om = j * L
    om[0] = 0.0
    dl = delta_l(al, j[:-1])
    # omega(j+1) - omega(j) = (j+1) dL(j) + L(j); differencing that identity
    # gives the step added below, so increments need no subtraction of L.
    steps = (j[1:-1] + 1) * dl[1:] - (j[1:-1] - 1) * dl[:-1]
    inc = np.zeros(j_max + 1)
    inc[1] = L[1]
    inc[2:] = L[1] + np.cumsum(steps)
    table = FrequencyTable(al, int(j_max), L, om, inc)
    _certify(table)
    for arr in (L, om, inc):
        arr.setflags(write=False)
    return table


def _certify(t: FrequencyTable):
    if t.omega[0] != 0.0:
        raise InvariantViolation(f"alpha={t.alpha.value}: omega[0] = {t.omega[0]!r} != 0")
    if abs(t.omega[1]) > 1e-10:
        raise InvariantViolation(
            f"alpha={t.alpha.value}: |omega[1]| = {abs(t.omega[1]):.3e} > 1e-10")
    d = np.diff(t.omega[2:])
    bad = np.flatnonzero(d <= 0)
    if bad.size:
        raise InvariantViolation(
            f"alpha={t.alpha.value}: omega not increasing at j={bad[0] + 2}")
    j = np.arange(1, t.j_max)
    d2 = t.telescoped_second_difference(j)
    bad = np.flatnonzero(d2 <= 0)
    if bad.size:
        raise InvariantViolation(
            f"alpha={t.alpha.value}: second difference not positive at j={j[bad[0]]}")


def second_difference(table: FrequencyTable, j):
    """(telescoped, closed_form) values of the second difference of omega at j."""
    jj = np.asarray(j, dtype=np.int64)
    if np.any(jj < 1) or np.any(jj > table.j_max - 1):
        raise IndexError("j must satisfy 1 <= j <= j_max - 1")
    tel = table.telescoped_second_difference(jj)
    closed = second_difference_closed(table.alpha, jj)
    if np.ndim(jj) == 0:
        return float(tel), float(closed)
    return tel, closed


class ThreeWaveResult(NamedTuple):
    gap: float
    triple: tuple  # (n, j, k) with k = j + n


def three_wave_search(table: FrequencyTable, range_: int) -> ThreeWaveResult:
    """Exhaustive minimum of |omega(k) - omega(j) - omega(n)| over k = j + n.

    n, j, k are nonzero with |n|, |j| <= range_ and |k| <= j_max.  Among
    minimisers the lexicographically smallest (n, j, k) is reported.
    """
    if range_ < 1 or 2 * range_ > table.j_max:
        raise ValueError("need 1 <= range <= j_max / 2")
    r = np.arange(-range_, range_ + 1)
    r = r[r != 0]
    n = r[:, None]
    jj = r[None, :]
    k = n + jj
    gap = np.abs(table.omega_at(k) - table.omega_at(jj) - table.omega_at(n))
    gap = np.where(k == 0, np.inf, gap)
    g = gap.min()
    rows, cols = np.nonzero(gap == g)
    # rows/cols come out in lexicographic (n, j) order already
    nn, jv = int(r[rows[0]]), int(r[cols[0]])
    return ThreeWaveResult(float(g), (nn, jv, nn + jv))


def min_three_wave_gap(table: FrequencyTable, range_: int) -> float:
    return three_wave_search(table, range_).gap


def c1_alpha(alpha) -> float:
    """Coefficient of |j|^(alpha-1) in the large-j expansion of L_alpha."""
    al = Alpha.of(alpha)
    al.require_not_one("c1_alpha")
    a = al.value
    return prefactor(a) * gamma(3 - a) / (gamma(1 - a / 2) * gamma(a / 2)) / (a - 1)


def _v_one_series(tol: float = 1e-12) -> float:
    # Terms equal 1/(4 k^2 (k + 1/2)); the tail beyond K is below 1/(8 K^2).
    K = int(math.ceil(math.sqrt(1.0 / (8.0 * tol))))
    k = np.arange(1, K + 1, dtype=float)
    s = math.fsum(1.0 / (0.5 + k) - (1.0 / k) * (1.0 - 1.0 / (2.0 * k)))
    return (EULER_GAMMA - math.pi ** 2 / 12 + s) / math.pi


def v_alpha(alpha) -> float:
    """Constant term of the large-j expansion of L_alpha.

    At alpha = 1 the expansion reads L_1(j) = V_1 + log(j)/pi + O(j^-2).
    """
    al = Alpha.of(alpha)
    a = al.value
    if al.is_one:
        return _v_one_series()
    return a * c_alpha(a) / (2 - a) * gamma(1 - a) / gamma(1 - a / 2) ** 2


def write_table_csv(table: FrequencyTable, path) -> None:
    """CSV with columns j, L, omega, d2omega (d2omega blank at j = j_max)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "L", "omega", "d2omega"])
        for j in range(table.j_max + 1):
            if j == 0:
                d2 = repr(0.0)
            elif j < table.j_max:
                d2 = repr(float(table.telescoped_second_difference(j)))
            else:
                d2 = ""
            w.writerow([j, repr(float(table.L[j])), repr(float(table.omega[j])), d2])
