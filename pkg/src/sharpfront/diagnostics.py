"""Conserved quantities, Sobolev norms and the lifespan scaling experiment."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .contour_rhs import (DomainError, GridFunction, QuadratureRule, SpectralField,
                          grad_E, h_from_f)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mean_f: float
    prime_integral: tuple
    sobolev: dict
    sup_h: float
    hamiltonian_rate: float
    hamiltonian_scale: float
    first_moment: tuple

    def __post_init__(self):
        vals = [self.t, self.mean_f, *self.prime_integral, self.sup_h,
                self.hamiltonian_rate, self.hamiltonian_scale, *self.first_moment,
                *self.sobolev.values()]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("diagnostics must be finite")
        if any(v < 0 for v in self.sobolev.values()):
            raise ValueError("Sobolev norms are nonnegative")

    @property
    def relative_hamiltonian_rate(self) -> float:
        return abs(self.hamiltonian_rate) / self.hamiltonian_scale if self.hamiltonian_scale else 0.0


def sobolev_norm(field, s: float) -> float:
    """(sum_j <j>^(2s) |c_j|^2)^(1/2) with <j> = max(1, |j|), over all j."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    spec = field if isinstance(field, SpectralField) else field.spectrum()
    c = spec.coeffs
    j = spec.wavenumbers
    weight = np.maximum(1, j).astype(float) ** (2 * s)
    mult = np.full(j.size, 2.0)
    mult[0] = 1.0
    if spec.n % 2 == 0:
        # The Nyquist coefficient stands for both +-n/2 halves of a cosine.
        mult[-1] = 1.0
    return float(math.sqrt(np.sum(mult * weight * np.abs(c) ** 2)))


def prime_integral(f: GridFunction) -> tuple:
    """Trapezoid value of int (sqrt(1 + 2f) - 1)(cos x, sin x) dx."""
    h = h_from_f(f).samples
    x = f.x
    w = 2 * np.pi / f.n
    return (float(w * np.sum(h * np.cos(x))), float(w * np.sum(h * np.sin(x))))


def first_moment(f: GridFunction) -> tuple:
    """First moment of the patch, int (1 + h)^3 / 3 (cos x, sin x) dx.

    This is the quantity conserved exactly by translation invariance; the
    prime integral above agrees with it to first order in f.
    """
    h = h_from_f(f).samples
    x = f.x
    w = 2 * np.pi / f.n
    r3 = (1 + h) ** 3 / 3
    return (float(w * np.sum(r3 * np.cos(x))), float(w * np.sum(r3 * np.sin(x))))


def hamiltonian_rate(f: GridFunction, alpha, rule: QuadratureRule) -> tuple:
    """(<grad_E, d/dx grad_E>, ||grad_E|| ||d/dx grad_E||), trapezoid products."""
    g = grad_E(f, alpha, rule)
    dg = g.derivative()
    w = 2 * np.pi / f.n
    rate = float(w * np.dot(g.samples, dg.samples))
    scale = float(w * np.linalg.norm(g.samples) * np.linalg.norm(dg.samples))
    return rate, scale


def make_record(t: float, f: GridFunction, alpha, rule: QuadratureRule,
                sobolev_orders=(4.0,)) -> DiagnosticsRecord:
    h = h_from_f(f)
    hs = h.spectrum()
    rate, scale = hamiltonian_rate(f, alpha, rule)
    return DiagnosticsRecord(
        t=float(t),
        mean_f=f.mean(),
        prime_integral=prime_integral(f),
        sobolev={float(s): sobolev_norm(hs, s) for s in sobolev_orders},
        sup_h=float(np.max(np.abs(h.samples))),
        hamiltonian_rate=rate,
        hamiltonian_scale=scale,
        first_moment=first_moment(f),
    )


def write_records_csv(records, path, header_comment: str | None = None) -> None:
    """Time series with columns t, mean_f, prime_cos, prime_sin, h_s..., sup_h, hamiltonian_rate."""
    orders = list(records[0].sobolev) if records else []
    with open(path, "w", newline="") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["t", "mean_f", "prime_cos", "prime_sin"]
                   + [f"h_H{s:g}" for s in orders]
                   + ["sup_h", "hamiltonian_rate", "hamiltonian_scale",
                      "moment_cos", "moment_sin"])
        for r in records:
            w.writerow([repr(r.t), repr(r.mean_f), repr(r.prime_integral[0]),
                        repr(r.prime_integral[1])]
                       + [repr(r.sobolev[s]) for s in orders]
                       + [repr(r.sup_h), repr(r.hamiltonian_rate), repr(r.hamiltonian_scale),
                          repr(r.first_moment[0]), repr(r.first_moment[1])])


def drift_rate(records, key) -> float:
    """|q(T) - q(0)| / T for a scalar or vector diagnostic ``key(record)``."""
    a = np.atleast_1d(key(records[0]))
    b = np.atleast_1d(key(records[-1]))
    T = records[-1].t - records[0].t
    return float(np.linalg.norm(b - a) / T)


def quartic_energy_constant(times, states, s: float = 4.0) -> float:
    """Smallest C with ||f(t)||^2 - ||f(0)||^2 <= C int_0^t ||f||^4 at the sampled times.

    Norms are H^s norms of the stored spectral states; the time integral is
    the trapezoid rule over the samples.
    """
    t = np.asarray(times, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two samples")
    N = np.array([sobolev_norm(st, s) for st in states])
    growth = N[1:] ** 2 - N[0] ** 2
    integral = np.cumsum(0.5 * (N[1:] ** 4 + N[:-1] ** 4) * np.abs(np.diff(t)))
    ok = integral > 0
    if not np.any(ok):
        return 0.0
    return float(max(0.0, np.max(growth[ok] / integral[ok])))


# ---------------------------------------------------------------------------
# lifespan experiment


class LifespanError(RuntimeError):
    """Too few uncensored runs to fit an exponent."""


@dataclass
class LifespanRun:
    epsilon: float
    doubling_time: float
    censored: bool
    h0_norm: float
    max_norm_ratio: float  # sup_t ||h(t)||_{H^s} / ||h0||_{H^s} before doubling
    t_cap: float
    records: list = field(default_factory=list, repr=False)


@dataclass
class LifespanResult:
    alpha: float
    s: float
    runs: list
    slope: float | None
    passed_fit: bool
    message: str


def doubling_time(initial: GridFunction, cfg, s: float, t_cap: float):
    """Run until ||h||_{H^s} >= 2 ||h0||_{H^s} or t_cap; returns (T, censored, runinfo)."""
    from .integrator import BlowUpError, run

    h0 = sobolev_norm(h_from_f(initial).spectrum(), s)
    target = 2.0 * h0
    state = {"max": h0}

    def stop(t, spec):
        try:
            norm = sobolev_norm(h_from_f(spec.to_grid()).spectrum(), s)
        except DomainError:
            return True
        if norm < target:
            state["max"] = max(state["max"], norm)
        return norm >= target

    run_cfg = replace(cfg, t_final=t_cap)
    try:
        traj = run(initial, run_cfg, stop=stop)
    except BlowUpError as exc:
        return exc.t, False, h0, state["max"] / h0, []
    t_end = traj.times[-1]
    censored = not traj.stopped
    return t_end, censored, h0, state["max"] / h0, traj.records


def lifespan_experiment(alpha, epsilons, s: float, cfg, t_cap_base: float,
                        cap_factor: float = 10.0) -> LifespanResult:
    """Doubling times of ||h||_{H^s} for h0 = eps cos 2x and their log-log slope.

    The cap for eps is ``cap_factor (eps_max / eps)^2 T(eps_max)`` where
    T(eps_max) is the measured doubling time of the largest amplitude, or
    ``t_cap_base`` when that run is itself censored.
    """
    eps = [float(e) for e in epsilons]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be decreasing")
    if any(e > 0.05 for e in eps):
        raise ValueError("each epsilon must be <= 0.05")
    if s < 4:
        raise ValueError("s must be >= 4")
    from .contour_rhs import f_from_h

    runs = []
    t_ref = None
    for e in eps:
        h0 = GridFunction.from_function(lambda x: e * np.cos(2 * x), cfg.n)
        f0 = f_from_h(h0)
        if t_ref is None:
            cap = t_cap_base
        else:
            cap = cap_factor * (eps[0] / e) ** 2 * t_ref
        T, cens, norm0, ratio, recs = doubling_time(f0, cfg, s, cap)
        if t_ref is None:
            t_ref = T
        runs.append(LifespanRun(e, T, cens, norm0, ratio, cap, recs))
    good = [r for r in runs if not r.censored]
    if len(good) < 3:
        msg = (f"only {len(good)} of {len(runs)} runs reached norm doubling "
               f"before their caps; no exponent fitted")
        return LifespanResult(float(alpha), s, runs, None, False, msg)
    x = np.log([r.epsilon for r in good])
    y = np.log([r.doubling_time for r in good])
    slope = float(np.polyfit(x, y, 1)[0])
    return LifespanResult(float(alpha), s, runs, slope, True, f"slope {slope:.3f}")


def write_lifespan_csv(result: LifespanResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epsilon", "doubling_time", "censored"])
        for r in result.runs:
            w.writerow([repr(r.epsilon), repr(r.doubling_time), int(r.censored)])
