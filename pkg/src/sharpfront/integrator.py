"""Time stepping of f_t = d/dx grad_E(f) with the linear dispersion exact.

In Fourier variables ``c_j' = -i omega(j) c_j + N_j(c)``, where ``N`` is the
full right-hand side minus its linear part.  The integrating-factor scheme
applies classical RK4 to ``e^{i omega t} c`` (Lawson's method), so the linear
rotation is exact for any step.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .contour_rhs import GridFunction, QuadratureRule, SpectralField, rhs_f
from .diagnostics import make_record
from .dispersion import Alpha, omega

SCHEMES = ("integrating_factor_rk4", "plain_rk4")
BLOWUP_SUP = 0.5


class BlowUpError(RuntimeError):
    def __init__(self, t: float, msg: str):
        super().__init__(f"t = {t:.6g}: {msg}")
        self.t = t


def cfl_bound(n: int, alpha, scheme: str = "integrating_factor_rk4",
              dealias_fraction: float = 2 / 3) -> float:
    """0.5 / max |omega| over retained modes, times 10 for the integrating factor."""
    jmax = max(2, int(dealias_fraction * n / 2))
    wmax = float(np.max(np.abs(omega(alpha, np.arange(jmax + 1)))))
    base = 0.5 / wmax
    return 10 * base if scheme == "integrating_factor_rk4" else base


@dataclass(frozen=True)
class SimConfig:
    alpha: float
    n: int = 256
    m: int | None = None
    dt: float | None = None
    t_final: float = 1.0
    dealias_fraction: float = 2 / 3
    scheme: str = "integrating_factor_rk4"
    diagnostics_every: int = 1
    checkpoint_every: int = 0
    sobolev_orders: tuple = (4.0,)
    nonlinear: bool = True
    corrected_quadrature: bool = True

    def __post_init__(self):
        a = Alpha.of(self.alpha).value
        object.__setattr__(self, "alpha", a)
        if self.n < 16 or self.n & (self.n - 1):
            raise ValueError("n must be a power of two >= 16")
        m = 4 * self.n if self.m is None else int(self.m)
        if m & (m - 1) or m < 4 * self.n:
            raise ValueError("m must be a power of two >= 4 n")
        object.__setattr__(self, "m", m)
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if not (0 < self.dealias_fraction <= 1):
            raise ValueError("dealias_fraction must lie in (0, 1]")
        bound = cfl_bound(self.n, a, self.scheme, self.dealias_fraction)
        dt = bound if self.dt is None else float(self.dt)
        if dt == 0 or abs(dt) > bound * (1 + 1e-12):
            raise ValueError(f"|dt| = {abs(dt):.4g} exceeds the stability bound {bound:.4g}")
        object.__setattr__(self, "dt", dt)
        if self.diagnostics_every < 0 or self.checkpoint_every < 0:
            raise ValueError("cadences must be nonnegative")
        object.__setattr__(self, "sobolev_orders", tuple(float(s) for s in self.sobolev_orders))

    @property
    def rule(self) -> QuadratureRule:
        return QuadratureRule(self.m, self.corrected_quadrature)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sobolev_orders"] = list(self.sobolev_orders)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        if "sobolev_orders" in d:
            d["sobolev_orders"] = tuple(d["sobolev_orders"])
        return cls(**d)


class Stepper:
    """Precomputed propagators and masks for one configuration."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        n = cfg.n
        j = np.arange(n // 2 + 1)
        self.omega = omega(cfg.alpha, j)
        self.keep = j <= cfg.dealias_fraction * n / 2
        self.keep[-1] = False  # Nyquist mode carries no derivative information
        self.rule = cfg.rule
        self._prop_cache = {}

    def _propagators(self, dt: float):
        if dt not in self._prop_cache:
            half = np.exp(-0.5j * self.omega * dt)
            self._prop_cache[dt] = (half, half * half)
        return self._prop_cache[dt]

    def full_rhs(self, c: np.ndarray) -> np.ndarray:
        n = self.cfg.n
        f = GridFunction(np.fft.irfft(c * n, n=n))
        if np.max(np.abs(f.samples)) > BLOWUP_SUP:
            raise BlowUpError(float("nan"), f"sup|f| exceeded {BLOWUP_SUP}")
        r = np.fft.rfft(rhs_f(f, self.cfg.alpha, self.rule).samples) / n
        r[0] = 0.0
        return r

    def nonlinear(self, c: np.ndarray) -> np.ndarray:
        if not self.cfg.nonlinear:
            return np.zeros_like(c)
        out = self.full_rhs(c) + 1j * self.omega * c
        out[~self.keep] = 0.0
        return out

    def step(self, c: np.ndarray, dt: float) -> np.ndarray:
        if self.cfg.scheme == "plain_rk4":
            F = (lambda v: self.full_rhs(v)) if self.cfg.nonlinear else (lambda v: -1j * self.omega * v)
            k1 = F(c)
            k2 = F(c + 0.5 * dt * k1)
            k3 = F(c + 0.5 * dt * k2)
            k4 = F(c + dt * k3)
            return c + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        E, E2 = self._propagators(dt)
        N = self.nonlinear
        k1 = N(c)
        k2 = N(E * (c + 0.5 * dt * k1))
        k3 = N(E * c + 0.5 * dt * k2)
        k4 = N(E2 * c + dt * E * k3)
        return E2 * c + dt / 6 * (E2 * k1 + 2 * E * (k2 + k3) + k4)


def _check_state(state: SpectralField, cfg: SimConfig):
    if state.n != cfg.n:
        raise ValueError("state size does not match cfg.n")


def step(state: SpectralField, cfg: SimConfig, stepper: Stepper | None = None,
         dt: float | None = None) -> SpectralField:
    """One step of the configured scheme."""
    _check_state(state, cfg)
    st = stepper or Stepper(cfg)
    c = st.step(state.coeffs, cfg.dt if dt is None else dt)
    return SpectralField(c, cfg.n, state.zero_mean)


@dataclass
class Trajectory:
    """Stored states and diagnostics; times are strictly monotone in the
    direction of integration (increasing for dt > 0)."""

    times: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    states: list = field(default_factory=list, repr=False)
    records: list = field(default_factory=list, repr=False)
    stopped: bool = False
    direction: int = 1

    def append(self, t, k, state, record):
        if self.times and not (t - self.times[-1]) * self.direction > 0:
            raise ValueError("trajectory times must be strictly monotone")
        self.times.append(t)
        self.steps.append(k)
        self.states.append(state)
        self.records.append(record)


def run(initial, cfg: SimConfig, stop=None, t0: float = 0.0, step0: int = 0) -> Trajectory:
    """Integrate from ``initial`` (GridFunction or SpectralField) to cfg.t_final.

    Step k ends at ``t0 + k dt``; the last step is shortened to land on
    t_final.  A restart passes the origin t0 and the step index step0 of the
    checkpoint, so the continued run repeats the original arithmetic exactly.
    ``stop(t, state)`` is evaluated after every step and ends the run when it
    returns True.  Diagnostics are recorded at the start, every
    ``diagnostics_every`` steps and at the end; states are stored at the
    same times and every ``checkpoint_every`` steps.
    """
    state = initial if isinstance(initial, SpectralField) else initial.spectrum()
    _check_state(state, cfg)
    st = Stepper(cfg)
    rule = st.rule
    dt = cfg.dt
    traj = Trajectory(direction=1 if dt > 0 else -1)

    def record(t, k, s):
        rec = None
        if cfg.diagnostics_every:
            rec = make_record(t, s.to_grid(), cfg.alpha, rule, cfg.sobolev_orders)
        traj.append(t, k, s, rec)

    if np.max(np.abs(state.to_grid().samples)) > BLOWUP_SUP:
        raise BlowUpError(t0 + step0 * dt, f"initial sup|f| exceeds {BLOWUP_SUP}")
    record(t0 + step0 * dt, step0, state)
    span = (cfg.t_final - t0) / dt
    total = int(np.ceil(span - 1e-9)) if span > 0 else 0
    c = state.coeffs
    for k in range(step0 + 1, total + 1):
        t_prev = t0 + (k - 1) * dt
        h = dt if k < total else cfg.t_final - t_prev
        try:
            c = st.step(c, h)
        except BlowUpError as exc:
            raise BlowUpError(t_prev, str(exc).split(": ", 1)[-1]) from None
        t = t0 + k * dt if k < total else cfg.t_final
        cur = SpectralField(c, cfg.n, state.zero_mean)
        # continue from the normalised coefficients so a restart from a
        # stored state repeats the same arithmetic
        c = cur.coeffs
        if np.max(np.abs(cur.to_grid().samples)) > BLOWUP_SUP:
            raise BlowUpError(t, f"sup|f| exceeded {BLOWUP_SUP}")
        halt = bool(stop and stop(t, cur))
        last = k == total or halt
        diag_due = cfg.diagnostics_every and k % cfg.diagnostics_every == 0
        ckpt_due = cfg.checkpoint_every and k % cfg.checkpoint_every == 0
        if last or diag_due or ckpt_due:
            record(t, k, cur)
        if halt:
            traj.stopped = True
            break
    return traj


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(path, state: SpectralField, cfg: SimConfig, t: float,
                    step: int = 0, t0: float = 0.0) -> None:
    """JSON header plus the coefficients as exact base-16 floats."""
    doc = {
        "header": {"format": "sharpfront-checkpoint-1", "time": float(t).hex(),
                   "time_decimal": float(t), "step": int(step), "origin": float(t0).hex(),
                   "n": state.n, "zero_mean": state.zero_mean,
                   "config": cfg.to_dict()},
        "re": [float(v).hex() for v in state.coeffs.real],
        "im": [float(v).hex() for v in state.coeffs.imag],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_checkpoint(path):
    """(state, cfg, header) from save_checkpoint output, bit-exact.

    ``header["step"]`` and ``float.fromhex(header["origin"])`` are the
    arguments run() needs to continue the original time grid.
    """
    with open(path) as fh:
        doc = json.load(fh)
    hdr = doc["header"]
    re = np.array([float.fromhex(v) for v in doc["re"]])
    im = np.array([float.fromhex(v) for v in doc["im"]])
    state = SpectralField(re + 1j * im, hdr["n"], hdr["zero_mean"])
    return state, SimConfig.from_dict(hdr["config"]), hdr
