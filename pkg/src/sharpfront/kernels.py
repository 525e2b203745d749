"""Convolution kernels of the pseudo-energy gradient and their z-expansions.

With ``s = sqrt(1 - 2Y)`` and ``D(Y) = 2 (1 - Y - s cos z)`` the two basic
kernels are

    G1(Y) = (1 - 2Y - s cos z) D^(-alpha/2),    G2(Y) = s^-1 D^(-alpha/2),

and, with ``w = 2 sin(z/2)``,

    K1(X) = G1'(X w) |w|^alpha,  K2(X) = G2(X w) |w|^alpha,
    K3(X) = G2'(X w) sin z |w|^alpha.

Evaluated at ``X = Delta_z f / r^2`` (so ``X w = delta_z f / r^2``) these are
analytic in z.  The series code never forms |z|^alpha: writing
``u = X w = z U(z)``, ``1 - cos z = z^2 C(z)`` and ``w = z W(z)``,

    D = z^2 P,   P = 2 (U^2 / (1 - u + s) + s C),
    s - cos z = z Q,   Q = -2U / (1 + s) + z C,

so ``|w|^alpha D^(-alpha/2) = W^alpha P^(-alpha/2)`` and every kernel becomes
a product of analytic series.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dispersion import Alpha


class KernelDomainError(ValueError):
    """Kernel argument outside 1 - 2Y > 0, D > 0, or a series root of c0 <= 0."""


# ---------------------------------------------------------------------------
# truncated power series in z


@dataclass(frozen=True)
class ZSeries:
    """Truncated Taylor series c_0 + c_1 z + ... + c_D z^D.

    ``coeffs`` has shape ``(..., D + 1)``; the leading axes vectorise over
    independent series (e.g. grid points).  All arithmetic truncates at D.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim == 0:
            raise ValueError("coeffs needs an order axis")
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return self.coeffs.shape[-1] - 1

    @property
    def shape(self):
        return self.coeffs.shape[:-1]

    def __getitem__(self, k):
        return self.coeffs[..., k]

    @classmethod
    def constant(cls, value, order: int) -> "ZSeries":
        v = np.asarray(value, dtype=float)
        c = np.zeros(v.shape + (order + 1,))
        c[..., 0] = v
        return cls(c)

    @classmethod
    def from_function_coeffs(cls, fn, order: int) -> "ZSeries":
        return cls(np.array([fn(k) for k in range(order + 1)], dtype=float))

    @classmethod
    def z(cls, order: int) -> "ZSeries":
        return cls.from_function_coeffs(lambda k: 1.0 if k == 1 else 0.0, order)

    @classmethod
    def cos_z(cls, order: int) -> "ZSeries":
        return cls.from_function_coeffs(
            lambda k: 0.0 if k % 2 else (-1) ** (k // 2) / math.factorial(k), order)

    @classmethod
    def sin_z(cls, order: int) -> "ZSeries":
        return cls.from_function_coeffs(
            lambda k: (-1) ** (k // 2) / math.factorial(k) if k % 2 else 0.0, order)

    @classmethod
    def sin_z_over_z(cls, order: int) -> "ZSeries":
        return cls.from_function_coeffs(
            lambda k: 0.0 if k % 2 else (-1) ** (k // 2) / math.factorial(k + 1), order)

    @classmethod
    def chord_over_z(cls, order: int) -> "ZSeries":
        """2 sin(z/2) / z."""
        return cls.from_function_coeffs(
            lambda k: 0.0 if k % 2 else (-1) ** (k // 2) / (math.factorial(k + 1) * 2.0 ** k),
            order)

    @classmethod
    def versine_over_z2(cls, order: int) -> "ZSeries":
        """(1 - cos z) / z^2."""
        return cls.from_function_coeffs(
            lambda k: 0.0 if k % 2 else (-1) ** (k // 2) / math.factorial(k + 2), order)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "ZSeries":
        if isinstance(other, ZSeries):
            if other.order != self.order:
                raise ValueError("series orders differ")
            return other
        return ZSeries.constant(other, self.order)

    def __add__(self, other):
        o = self._coerce(other)
        return ZSeries(self.coeffs + o.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return ZSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, ZSeries):
            v = np.asarray(other, dtype=float)
            return ZSeries(self.coeffs * v[..., None])
        o = self._coerce(other)
        a, b = self.coeffs, o.coeffs
        D = self.order
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for n in range(D + 1):
            for k in range(n + 1):
                out[..., n] += a[..., k] * b[..., n - k]
        return ZSeries(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "ZSeries":
        return ZSeries.constant(np.ones(self.shape), self.order) / self

    def __truediv__(self, other):
        if not isinstance(other, ZSeries):
            v = np.asarray(other, dtype=float)
            return ZSeries(self.coeffs / v[..., None])
        c = self._coerce(other).coeffs
        if np.any(c[..., 0] == 0):
            raise KernelDomainError("division by a series with zero constant term")
        a = self.coeffs
        D = self.order
        out = np.zeros(np.broadcast_shapes(a.shape, c.shape))
        for n in range(D + 1):
            acc = a[..., n].copy() if a.ndim == out.ndim else np.broadcast_to(a[..., n], out.shape[:-1]).copy()
            for k in range(1, n + 1):
                acc = acc - c[..., k] * out[..., n - k]
            out[..., n] = acc / c[..., 0]
        return ZSeries(out)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def power(self, p: float) -> "ZSeries":
        """self^p for real p; needs a positive constant term."""
        a = self.coeffs
        a0 = a[..., 0]
        if np.any(a0 <= 0):
            raise KernelDomainError("power of a series needs a positive constant term")
        D = self.order
        out = np.zeros(a.shape)
        out[..., 0] = a0 ** p
        for n in range(1, D + 1):
            acc = np.zeros(a.shape[:-1])
            for k in range(1, n + 1):
                acc = acc + (p * k - (n - k)) * a[..., k] * out[..., n - k]
            out[..., n] = acc / (n * a0)
        return ZSeries(out)

    def sqrt(self) -> "ZSeries":
        return self.power(0.5)

    def cos_sin(self):
        """(cos(self), sin(self)) by the coupled derivative recurrences."""
        a = self.coeffs
        D = self.order
        c = np.zeros(a.shape)
        s = np.zeros(a.shape)
        c[..., 0] = np.cos(a[..., 0])
        s[..., 0] = np.sin(a[..., 0])
        for n in range(1, D + 1):
            cc = np.zeros(a.shape[:-1])
            ss = np.zeros(a.shape[:-1])
            for k in range(1, n + 1):
                cc = cc - k * a[..., k] * s[..., n - k]
                ss = ss + k * a[..., k] * c[..., n - k]
            c[..., n] = cc / n
            s[..., n] = ss / n
        return ZSeries(c), ZSeries(s)

    def cos(self) -> "ZSeries":
        return self.cos_sin()[0]

    def sin(self) -> "ZSeries":
        return self.cos_sin()[1]

    def times_z(self) -> "ZSeries":
        """z * self, truncated (the top coefficient drops out)."""
        c = np.zeros(self.coeffs.shape)
        c[..., 1:] = self.coeffs[..., :-1]
        return ZSeries(c)

    def truncate(self, order: int) -> "ZSeries":
        if order > self.order:
            raise ValueError("cannot raise the order by truncation")
        return ZSeries(self.coeffs[..., : order + 1])

    def __call__(self, z):
        """Evaluate the truncated polynomial (Horner)."""
        z = np.asarray(z, dtype=float)
        acc = np.zeros(np.broadcast_shapes(self.shape, z.shape))
        for k in range(self.order, -1, -1):
            acc = acc * z + self.coeffs[..., k]
        return acc


# ---------------------------------------------------------------------------
# pointwise kernels


def _s_and_D(Y, z):
    """s = sqrt(1 - 2Y), D / 2 and s - cos z in cancellation-free form."""
    Y = np.asarray(Y, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(1 - 2 * Y <= 0):
        raise KernelDomainError("kernel needs 1 - 2Y > 0")
    s = np.sqrt(1 - 2 * Y)
    vers = 2 * np.sin(0.5 * z) ** 2  # 1 - cos z
    half_D = Y * Y / (1 - Y + s) + s * vers  # 1 - Y - s cos z
    if np.any(half_D <= 0):
        raise KernelDomainError("kernel denominator is not positive")
    s_minus_cos = -2 * Y / (1 + s) + vers
    return s, 2 * half_D, s_minus_cos


def g1(X, z, alpha):
    """G1(X) = (1 - 2X - s cos z) / D^(alpha/2)."""
    a = Alpha.of(alpha).value
    s, D, smc = _s_and_D(X, z)
    return s * smc * D ** (-0.5 * a)


def g2(X, z, alpha):
    """G2(X) = s^-1 / D^(alpha/2)."""
    a = Alpha.of(alpha).value
    s, D, _ = _s_and_D(X, z)
    return D ** (-0.5 * a) / s


def g1_prime(Y, z, alpha):
    """d G1 / dY."""
    a = Alpha.of(alpha).value
    s, D, smc = _s_and_D(Y, z)
    cz = np.cos(z)
    # (1 - cos z / s)(1 - 2Y - s cos z) = (s - cos z)^2
    return -(2 - cz / s) * D ** (-0.5 * a) + a * smc * smc * D ** (-0.5 * a - 1)


def g2_prime(Y, z, alpha):
    """d G2 / dY."""
    a = Alpha.of(alpha).value
    s, D, smc = _s_and_D(Y, z)
    return s ** -3 * D ** (-0.5 * a) + a * (smc / s) / s * D ** (-0.5 * a - 1)


def k_pointwise(kind: int, X, z, alpha):
    """K^kind(X) at a single z (or array of z), straight from the definitions."""
    z = np.asarray(z, dtype=float)
    w = 2 * np.sin(0.5 * z)
    aw = np.abs(w) ** Alpha.of(alpha).value
    Y = np.asarray(X, dtype=float) * w
    if kind == 1:
        return g1_prime(Y, z, alpha) * aw
    if kind == 2:
        return g2(Y, z, alpha) * aw
    if kind == 3:
        return g2_prime(Y, z, alpha) * np.sin(z) * aw
    raise ValueError(f"kind must be 1, 2 or 3, got {kind}")


# ---------------------------------------------------------------------------
# jets and kernel series


@dataclass(frozen=True)
class PointJet:
    """Derivatives (f, f', f'', ...) of the profile at one or many points.

    Entries may be scalars or equally shaped arrays.  The z^k coefficient of
    a kernel series uses derivatives up to order k + 1; missing derivatives
    are treated as zero.
    """

    derivs: tuple

    def __post_init__(self):
        d = tuple(np.asarray(v, dtype=float) for v in self.derivs)
        if len(d) < 2:
            raise ValueError("a jet needs at least f and f'")
        if np.any(1 + 2 * d[0] <= 0):
            raise KernelDomainError("jet needs 1 + 2f > 0")
        object.__setattr__(self, "derivs", d)

    @property
    def f(self):
        return self.derivs[0]

    def d(self, k: int):
        return self.derivs[k] if k < len(self.derivs) else np.zeros_like(self.derivs[0])

    @property
    def r2(self):
        return 1 + 2 * self.derivs[0]

    @classmethod
    def zero(cls, order: int = 3) -> "PointJet":
        return cls((0.0,) * (order + 2))

    @classmethod
    def from_grid(cls, field, order: int = 3) -> "PointJet":
        """Spectral derivatives of a GridFunction up to order + 1."""
        spec = field.spectrum()
        return cls(tuple([field.samples] + [spec.derivative(k).to_grid().samples
                                             for k in range(1, order + 2)]))

    def delta_over_z(self, order: int) -> ZSeries:
        """U(z) with (f(x) - f(x - z)) / r^2 = z U(z)."""
        shape = np.shape(self.derivs[0])
        c = np.zeros(shape + (order + 1,))
        for k in range(order + 1):
            c[..., k] = (-1) ** k * self.d(k + 1) / math.factorial(k + 1)
        return ZSeries(c / self.r2[..., None])


def k_series(kind: int, jet: PointJet, alpha, order: int = 3) -> ZSeries:
    """z-series of K^kind at X = Delta_z f / r^2 through z^order."""
    a = Alpha.of(alpha).value
    if order < 1:
        raise ValueError("order must be at least 1")
    U = jet.delta_over_z(order)
    u = U.times_z()
    s = (1 - 2 * u).sqrt()
    C = ZSeries.versine_over_z2(order)
    P = 2 * (U * U / (1 - u + s) + s * C)
    Q = -2 * U / (1 + s) + ZSeries.z(order) * C
    base = ZSeries.chord_over_z(order).power(a) * P.power(-0.5 * a)
    if kind == 1:
        cz = ZSeries.cos_z(order)
        return base * (-(2 - cz / s) + a * Q * Q / P)
    if kind == 2:
        return base / s
    if kind == 3:
        sz = ZSeries.sin_z(order)
        S = ZSeries.sin_z_over_z(order)
        return base * (sz / (s * s * s) + a * S * Q / (s * s * P))
    raise ValueError(f"kind must be 1, 2 or 3, got {kind}")


@dataclass(frozen=True)
class KernelConstants:
    """K^{j,l} at f = 0: rows l = 0, 1, 2 and columns j = 1, 2, 3."""

    alpha: Alpha
    matrix: np.ndarray = field(repr=False)

    def entry(self, j: int, l: int) -> float:
        return float(self.matrix[l, j - 1])


def kernel_constants(alpha) -> KernelConstants:
    a = Alpha.of(alpha)
    m = np.array([
        [-1.0, 1.0, 0.0],
        [0.0, 0.0, 1.0 + a.value / 2],
        [-0.5 * (1 - a.value / 2), 0.0, 0.0],
    ])
    m.setflags(write=False)
    return KernelConstants(a, m)


def kernel_coefficients(jet: PointJet, alpha, order: int = 3) -> dict:
    """{(j, l): K^{j,l}} for j = 1, 2, 3 and l = 0..order."""
    out = {}
    for kind in (1, 2, 3):
        ser = k_series(kind, jet, alpha, order)
        for l in range(order + 1):
            out[(kind, l)] = ser[l]
    return out


def a0_a1(field, alpha, order: int = 3):
    """The coefficient functions A0 and A1 on the grid of ``field``."""
    from .contour_rhs import GridFunction

    a = Alpha.of(alpha).value
    jet = PointJet.from_grid(field, order)
    K = kernel_coefficients(jet, a, order)
    r2 = jet.r2
    fp, fpp = jet.d(1), jet.d(2)
    r_a = r2 ** (-0.5 * a)
    A0 = r_a * (K[1, 0] + (a - 1) * K[2, 0] + fp / r2 * K[3, 0]) + (2 - a)
    A1 = r_a * (K[1, 1] + (a - 2) * K[2, 1] + (fp * K[3, 1] - fpp * K[3, 0]) / r2)
    return GridFunction(A0), GridFunction(A1)


@dataclass
class IdentityReport:
    alpha: float
    max_residual: float
    worst_x: float
    passed: bool

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "max_residual": self.max_residual,
                "worst_x": self.worst_x, "pass": self.passed}


def identity_residual(field, alpha, order: int = 3):
    """(A1 + A0'/2 on the grid, scale max(1, max|A1|))."""
    A0, A1 = a0_a1(field, alpha, order)
    res = A1.samples + 0.5 * A0.derivative().samples
    return res, max(1.0, float(np.max(np.abs(A1.samples))))


def verify_hamiltonian_identity(field, alpha_grid, tol: float = 1e-7) -> list:
    """Check A1 + A0'/2 = 0 for every alpha of the grid."""
    reports = []
    for alpha in alpha_grid:
        a = Alpha.of(alpha)
        res, scale = identity_residual(field, a)
        k = int(np.argmax(np.abs(res)))
        rel = float(abs(res[k]) / scale)
        reports.append(IdentityReport(a.value, rel, float(field.x[k]), rel <= tol))
    return reports


def reports_to_json(reports) -> str:
    return json.dumps([r.as_dict() for r in reports], indent=2)
