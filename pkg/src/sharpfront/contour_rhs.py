"""Nonlinear right-hand sides of the patch equation near the unit disk.

Two formulations are evaluated:

* the Hamiltonian form ``f_t = d/dx grad_E(f)`` for ``f = h + h^2/2``, with
  the pseudo-energy gradient written as a normalised z-integral, and
* the radial-deviation form for ``h`` obtained by projecting the contour
  dynamics on the normal.

Both integrands have a weak singularity at z = 0.  They are sampled on the
midpoint grid ``z_i = -pi + (i + 1/2) 2pi/m``, which never hits z = 0, and
the leading singular error of that rule is removed by a local correction
(see QuadratureRule).

Because m is a multiple of n, every ``y = x_k - z_i`` lands on the fine
half-offset grid ``(q + 1/2) 2pi/m``; the profile and its derivative are
interpolated there once per evaluation by a zero-padded FFT (exact spectral
translation) and then gathered.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dispersion import Alpha, c_alpha, m_alpha, prefactor
from .special_functions import gamma, hurwitz_zeta


class DomainError(ValueError):
    """The profile left the region where the integrands are defined."""


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridFunction:
    """Real 2pi-periodic samples at x_k = 2 pi k / n."""

    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if s.size < 16 or not _is_pow2(s.size):
            raise ValueError(f"n must be a power of two >= 16, got {s.size}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def x(self) -> np.ndarray:
        return grid(self.n)

    @classmethod
    def from_function(cls, fn, n: int) -> "GridFunction":
        return cls(fn(grid(n)))

    @classmethod
    def zeros(cls, n: int) -> "GridFunction":
        return cls(np.zeros(n))

    def spectrum(self, zero_mean: bool = False) -> "SpectralField":
        return SpectralField.from_grid(self, zero_mean=zero_mean)

    def derivative(self, order: int = 1) -> "GridFunction":
        return self.spectrum().derivative(order).to_grid()

    def shift(self, varsigma: float) -> "GridFunction":
        """The translate x -> f(x + varsigma), by spectral phase multiplication."""
        return self.spectrum().shift(varsigma).to_grid()

    def mean(self) -> float:
        return float(np.mean(self.samples))

    def __add__(self, other):
        return GridFunction(self.samples + _samples(other))

    def __sub__(self, other):
        return GridFunction(self.samples - _samples(other))

    def __mul__(self, c):
        return GridFunction(self.samples * _samples(c))

    __rmul__ = __mul__


def _samples(v):
    return v.samples if isinstance(v, GridFunction) else v


def grid(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients c_j = (1/2pi) int f e^{-ijx} dx for 0 <= j <= n/2.

    Negative modes are implied by Hermitian symmetry c_{-j} = conj(c_j).
    The Nyquist coefficient is kept real.  With ``zero_mean`` set the 0-mode
    is forced to zero.
    """

    coeffs: np.ndarray = field(repr=False)
    n: int
    zero_mean: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.n // 2 + 1,):
            raise ValueError("coeffs must have length n/2 + 1")
        c[0] = 0.0 if self.zero_mean else c[0].real
        c[-1] = c[-1].real
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_grid(cls, g: GridFunction, zero_mean: bool = False) -> "SpectralField":
        return cls(np.fft.rfft(g.samples) / g.n, g.n, zero_mean)

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(self.n // 2 + 1)

    def to_grid(self) -> GridFunction:
        return GridFunction(np.fft.irfft(self.coeffs * self.n, n=self.n))

    def full(self) -> np.ndarray:
        """Coefficients for j = -n/2+1 .. n/2 (numpy fft ordering, length n)."""
        out = np.zeros(self.n, dtype=complex)
        h = self.n // 2
        out[: h + 1] = self.coeffs
        out[h + 1:] = np.conj(self.coeffs[1:h][::-1])
        return out

    def derivative(self, order: int = 1) -> "SpectralField":
        j = self.wavenumbers
        c = self.coeffs * (1j * j) ** order
        if order % 2:
            c[-1] = 0.0
        return SpectralField(c, self.n, self.zero_mean or order > 0)

    def shift(self, varsigma: float) -> "SpectralField":
        j = self.wavenumbers
        c = self.coeffs * np.exp(1j * j * varsigma)
        # The Nyquist mode only translates as a cosine.
        c[-1] = self.coeffs[-1] * math.cos(self.n // 2 * varsigma)
        return SpectralField(c, self.n, self.zero_mean)


@dataclass(frozen=True)
class QuadratureRule:
    """Midpoint rule on z_i = -pi + (i + 1/2) 2pi/m for the normalised integral.

    For an integrand that behaves like ``|z|^p (a0 + a1 z + a2 z^2 + ...)``
    near z = 0 (plus parts that are odd in z), the plain rule carries the
    error ``2 zeta(-p, 1/2) a0 h^(p+1) / (2 pi)`` with h = 2 pi / m.  With
    ``corrected`` set, a0 is estimated from the two nodes at z = -+h/2 and
    that term is subtracted, raising the order from p + 1 to p + 3.
    """

    m: int
    corrected: bool = True

    def __post_init__(self):
        if not _is_pow2(self.m) or self.m < 16:
            raise ValueError(f"m must be a power of two >= 16, got {self.m}")

    @classmethod
    def for_grid(cls, n: int, factor: int = 4, corrected: bool = True) -> "QuadratureRule":
        return cls(factor * n, corrected)

    @property
    def h(self) -> float:
        return 2 * np.pi / self.m

    @property
    def nodes(self) -> np.ndarray:
        return -np.pi + (np.arange(self.m) + 0.5) * self.h

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.m, self.h)

    def mean(self, values: np.ndarray, power: float) -> np.ndarray:
        """(1/2pi) times the integral over z of values (last axis = nodes).

        ``power`` is the exponent p of the |z|^p behaviour at z = 0.
        """
        total = values.sum(axis=-1) / self.m
        if not self.corrected:
            return total
        c = self.m // 2
        half = 0.5 * self.h
        a0 = 0.5 * (values[..., c - 1] + values[..., c]) / half ** power
        err = 2 * hurwitz_zeta(-power, 0.5) * a0 * self.h ** (power + 1) / (2 * np.pi)
        return total - err


def _fine_samples(f: GridFunction, m: int, derivative: bool = True):
    """f (and f') at y_q = (q + 1/2) 2pi/m, q = 0..m-1, by exact interpolation."""
    n = f.n
    c = np.fft.rfft(f.samples) / n
    c[-1] *= 0.5  # split the Nyquist cosine between +-n/2
    j = np.arange(n // 2 + 1)
    phase = np.exp(1j * j * np.pi / m)
    pad = np.zeros(m // 2 + 1, dtype=complex)
    pad[: n // 2 + 1] = c * phase
    val = np.fft.irfft(pad * m, n=m)
    if not derivative:
        return val, None
    d = c * phase * (1j * j)
    d[-1] = 0.0
    pad[:] = 0.0
    pad[: n // 2 + 1] = d
    return val, np.fft.irfft(pad * m, n=m)


_CHUNK_ELEMENTS = 1 << 19


def _row_means(f: GridFunction, rule: QuadratureRule, integrand, power: float):
    """Normalised z-integral of integrand(row data) for each grid point x_k."""
    n, m = f.n, rule.m
    if m % n:
        raise ValueError("rule.m must be a multiple of n")
    ratio = m // n
    fy_fine, fpy_fine = _fine_samples(f, m)
    fx = f.samples
    fpx = f.derivative().samples
    z = rule.nodes
    cosz, sinz = np.cos(z), np.sin(z)
    s2 = np.sin(0.5 * z) ** 2
    out = np.empty(n)
    rows = max(1, _CHUNK_ELEMENTS // m)
    base = m // 2 - 1 - np.arange(m)
    for k0 in range(0, n, rows):
        k = np.arange(k0, min(n, k0 + rows))
        idx = (k[:, None] * ratio + base[None, :]) % m
        vals = integrand(fx[k, None], fpx[k, None], fy_fine[idx], fpy_fine[idx],
                         cosz, sinz, s2)
        out[k] = rule.mean(vals, power)
    return out


def _check_graph(samples, what="1 + 2f"):
    if np.any(samples <= 0):
        raise DomainError(f"{what} must be positive at every grid point")


def _grad_integrand(alpha: float):
    def integrand(fx, fpx, fy, fpy, cosz, sinz, s2):
        r = np.sqrt(1 + 2 * fx)
        ry = np.sqrt(1 + 2 * fy)
        dr = 2 * (fy - fx) / (r + ry)  # ry - r without cancellation
        den = dr * dr + 4 * r * ry * s2
        if np.any(den <= 0):
            raise DomainError("denominator of the energy gradient is not positive")
        num = ry * (dr + 2 * r * s2) + r * fpy * sinz / ry
        return num * den ** (-0.5 * alpha)
    return integrand


def grad_E(f: GridFunction, alpha, rule: QuadratureRule | None = None) -> GridFunction:
    """L^2 gradient of the pseudo-energy at the profile f."""
    al = Alpha.of(alpha)
    rule = rule or QuadratureRule.for_grid(f.n)
    if rule.m < 4 * f.n:
        raise ValueError("rule.m must be at least 4 n")
    _check_graph(1 + 2 * f.samples)
    a = al.value
    vals = _row_means(f, rule, _grad_integrand(a), 2 - a)
    return GridFunction(prefactor(al) * vals)


def rhs_f(f: GridFunction, alpha, rule: QuadratureRule | None = None) -> GridFunction:
    """f_t = d/dx grad_E(f)."""
    return grad_E(f, alpha, rule).derivative()


def _h_integrand(alpha: float):
    def integrand(hx, hpx, hy, hpy, cosz, sinz, s2):
        Hx = 1 + hx
        Hy = 1 + hy
        den = (hx - hy) ** 2 + 4 * Hx * Hy * s2
        if np.any(den <= 0):
            raise DomainError("denominator of the h-equation is not positive")
        num = cosz * (Hx * hpy - Hy * hpx) + sinz * (Hx * Hy + hpx * hpy)
        return num * den ** (-0.5 * alpha)
    return integrand


def rhs_h(h: GridFunction, alpha, rule: QuadratureRule | None = None) -> GridFunction:
    """h_t from the normal projection of the contour dynamics."""
    al = Alpha.of(alpha)
    rule = rule or QuadratureRule.for_grid(h.n)
    if rule.m < 4 * h.n:
        raise ValueError("rule.m must be at least 4 n")
    _check_graph(1 + h.samples, "1 + h")
    a = al.value
    # The integrand is odd ~ sign(z)|z|^(1-a) plus even ~ |z|^(2-a); the odd
    # part integrates to zero on the symmetric nodes.
    vals = _row_means(h, rule, _h_integrand(a), 2 - a)
    # Orientation: the overall sign is the one for which the linearisation
    # agrees with f_t = d/dx grad_E(f), i.e. modes rotate as e^{i(jx - omega t)}.
    return GridFunction(c_alpha(al) * vals / (1 + h.samples))


def f_from_h(h: GridFunction) -> GridFunction:
    _check_graph(1 + h.samples, "1 + h")
    return GridFunction(h.samples + 0.5 * h.samples ** 2)


def h_from_f(f: GridFunction) -> GridFunction:
    _check_graph(1 + 2 * f.samples)
    s = f.samples
    return GridFunction(2 * s / (np.sqrt(1 + 2 * s) + 1))


def g1_zero_mean_exact(alpha) -> float:
    """Closed form of the normalised integral of the first kernel at X = 0."""
    a = Alpha.of(alpha).value
    return gamma(2 - a) / ((1 - a / 2) * gamma(1 - a / 2) ** 2)


def grad_E_at_zero(alpha) -> float:
    """The constant value of grad_E at f = 0."""
    return prefactor(alpha) * g1_zero_mean_exact(alpha)


def check_g1_zero_integral(alpha, rule: QuadratureRule) -> float:
    """|quadrature of the first kernel at X = 0 - closed form|."""
    from .kernels import g1

    a = Alpha.of(alpha).value
    vals = g1(0.0, rule.nodes, a)
    return abs(float(rule.mean(vals, 2 - a)) - g1_zero_mean_exact(a))


def check_m_alpha_integral(alpha, j: int, rule: QuadratureRule) -> float:
    """|mean of e^{-ijz}[2(1-cos z)]^(1-alpha/2) + 2(1-alpha/2) M_alpha(j)|."""
    a = Alpha.of(alpha).value
    z = rule.nodes
    # The sine part is odd and vanishes on the symmetric nodes.
    vals = np.cos(j * z) * (4 * np.sin(0.5 * z) ** 2) ** (1 - a / 2)
    q = float(rule.mean(vals, 2 - a))
    return abs(q + 2 * (1 - a / 2) * m_alpha(a, j))


def linearization_residuals(alpha, modes, n: int = 256, m: int = 2 ** 14,
                            eps: float = 1e-5, corrected: bool = True) -> list:
    """Directional derivative of grad_E at 0 along cos(jx) against -L_alpha(j).

    Rows are dicts with the measured cos(jx) coefficient, the expected value,
    the relative error and the largest coefficient on any other mode
    (divided by eps).  The error is relative to |L_alpha(j)|, except at
    j = 1 where L_alpha vanishes and the scale max_j |L_alpha(j)| over the
    requested modes is used.
    """
    from .dispersion import l_alpha

    a = Alpha.of(alpha).value
    rule = QuadratureRule(m, corrected)
    base = grad_E(GridFunction.zeros(n), a, rule).samples
    modes = list(modes)
    expect = -np.asarray(l_alpha(a, np.array(modes)))
    scale = float(np.max(np.abs(expect)))
    rows = []
    for j, exp in zip(modes, expect):
        f = GridFunction.from_function(lambda x: eps * np.cos(j * x), n)
        d = (grad_E(f, a, rule).samples - base) / eps
        c = np.fft.rfft(d) / n
        meas = 2 * c[j].real
        others = np.abs(2 * c)
        others[0] = abs(c[0])
        others[j] = abs(2 * c[j].imag)
        denom = abs(exp) if abs(exp) > 1e-8 * scale else scale
        rows.append({"alpha": a, "j": int(j), "measured": float(meas),
                     "expected": float(exp), "rel_error": float(abs(meas - exp) / denom),
                     "off_mode_over_eps": float(others.max() / eps)})
    return rows
