"""Batch command-line front end.

    sharpfront spectrum  --alpha 1.5 --j-max 1024 --out results/
    sharpfront simulate  --config run.json --out results/
    sharpfront verify    all --out results/
    sharpfront lifespan  --config sweep.json --out results/

Every command writes deterministic files (CSV with a header row, JSON with
sorted keys), echoes the effective configuration into its outputs and exits
with status 0 exactly when all of its checks pass.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import contour_rhs, diagnostics, dispersion, integrator, kernels
from .contour_rhs import GridFunction, QuadratureRule, f_from_h

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

IDENTITY_ALPHAS = (0.2, 0.5, 0.8, 0.95, 1.05, 1.3, 1.6, 1.9)
LINEARIZATION_ALPHAS = (0.5, 1.2, 1.5, 1.9)
INTEGRAL_ALPHAS = (0.5, 1.0, 1.5)


@dataclass
class RunConfig:
    """All knobs of every command, with defaults; loaded from JSON."""

    alpha: float = 1.5
    n: int = 256
    m: int | None = None
    dt: float | None = None
    t_final: float = 1.0
    eps: float = 0.01
    initial_modes: list = field(default_factory=lambda: [[2, 1.0, 0.0]])
    scheme: str = "integrating_factor_rk4"
    dealias_fraction: float = 2 / 3
    diagnostics_every: int = 1
    checkpoint_every: int = 0
    sobolev_orders: list = field(default_factory=lambda: [4.0])
    s: float = 4.0
    epsilons: list = field(default_factory=lambda: [0.02, 0.01, 0.005])
    t_cap_base: float = 250.0
    j_max: int = 1024
    resonance_range: int = 200

    @classmethod
    def load(cls, path: str | None, overrides: dict) -> "RunConfig":
        data = {}
        if path:
            with open(path) as fh:
                data = json.load(fh)
            if not isinstance(data, dict):
                raise ValueError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        dispersion.Alpha(self.alpha)
        if not (self.eps >= 0):
            raise ValueError("eps must be nonnegative")
        for mode in self.initial_modes:
            if len(mode) != 3 or int(mode[0]) < 1:
                raise ValueError("initial_modes entries are [k >= 1, cos_amp, sin_amp]")

    def sim_config(self) -> integrator.SimConfig:
        return integrator.SimConfig(
            alpha=self.alpha, n=self.n, m=self.m, dt=self.dt, t_final=self.t_final,
            dealias_fraction=self.dealias_fraction, scheme=self.scheme,
            diagnostics_every=self.diagnostics_every, checkpoint_every=self.checkpoint_every,
            sobolev_orders=tuple(self.sobolev_orders))

    def initial_h(self, n: int | None = None) -> GridFunction:
        n = n or self.n
        x = contour_rhs.grid(n)
        h = np.zeros(n)
        for k, ca, sa in self.initial_modes:
            h += ca * np.cos(int(k) * x) + sa * np.sin(int(k) * x)
        return GridFunction(self.eps * h)


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _dump_json(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_plain) + "\n")


@dataclass
class RunManifest:
    """What was run, from which config, into which directory."""

    command: str
    config_path: str | None
    out: str
    config: dict

    def write(self):
        out = Path(self.out)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
        _dump_json(asdict(self), out / "manifest.json")


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


# ---------------------------------------------------------------------------
# spectrum


def cmd_spectrum(cfg: RunConfig, out: Path) -> int:
    alpha = dispersion.Alpha(cfg.alpha)
    report = {"config": {"alpha": alpha.value, "j_max": cfg.j_max,
                         "resonance_range": cfg.resonance_range}}
    try:
        table = dispersion.build_table(alpha, cfg.j_max)
    except dispersion.InvariantViolation as exc:
        report.update(certified=False, error=str(exc), passed=False)
        _dump_json(report, out / "spectrum_report.json")
        print(f"spectrum alpha={alpha.value:g}: FAIL ({exc})")
        return EXIT_CHECK_FAILED
    dispersion.write_table_csv(table, out / "spectrum.csv")
    rng = min(cfg.resonance_range, cfg.j_max // 2)
    res = dispersion.three_wave_search(table, rng) if rng >= 1 else None
    gap_ok = res is None or res.gap >= table.omega[2] - 1e-9
    j = np.arange(1, cfg.j_max)
    if j.size:
        tel, closed = dispersion.second_difference(table, j)
        conv_err = float(np.max(np.abs(tel / closed - 1)))
    else:
        conv_err = 0.0
    conv_ok = conv_err <= 1e-9
    ok = gap_ok and conv_ok
    report.update(
        certified=True,
        omega_2=float(table.omega[2]),
        second_difference_max_rel_error=conv_err,
        three_wave={"range": rng, "gap": None if res is None else res.gap,
                    "triple": None if res is None else list(res.triple),
                    "passed": gap_ok},
        passed=ok,
    )
    _dump_json(report, out / "spectrum_report.json")
    print(f"spectrum alpha={alpha.value:g} j_max={cfg.j_max}: invariants certified")
    print(f"  second difference max rel error {conv_err:.2e}: {_status(conv_ok)}")
    if res is not None:
        print(f"  min three-wave gap {res.gap:.6g} at {res.triple} vs omega(2) "
              f"{table.omega[2]:.6g}: {_status(gap_ok)}")
    print(_status(ok))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# simulate

PLOT_SCRIPT = '''"""Plot the diagnostics time series written by `sharpfront simulate`."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "trajectory.csv"
with open(path) as fh:
    rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
head, data = rows[0], [[float(v) for v in r] for r in rows[1:]]
cols = {name: [r[i] for r in data] for i, name in enumerate(head)}
fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7, 8))
for name in head:
    if name.startswith("h_H"):
        axes[0].plot(cols["t"], cols[name], label=name)
axes[0].legend()
axes[1].plot(cols["t"], cols["prime_cos"], label="prime_cos")
axes[1].plot(cols["t"], cols["prime_sin"], label="prime_sin")
axes[1].legend()
axes[2].plot(cols["t"], [m - cols["mean_f"][0] for m in cols["mean_f"]], label="mean_f drift")
axes[2].legend()
axes[2].set_xlabel("t")
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=120)
'''


def cmd_simulate(cfg: RunConfig, out: Path, restart: str | None = None) -> int:
    if restart:
        state, saved, hdr = integrator.load_checkpoint(restart)
        sim = integrator.SimConfig.from_dict({**saved.to_dict(), "t_final": cfg.t_final})
        origin = float.fromhex(hdr["origin"])
        traj = integrator.run(state, sim, t0=origin, step0=hdr["step"])
    else:
        sim = cfg.sim_config()
        f0 = f_from_h(cfg.initial_h())
        origin = 0.0
        traj = integrator.run(f0, sim)
    recs = traj.records
    diagnostics.write_records_csv(recs, out / "trajectory.csv")
    ck = out / "checkpoints"
    ck.mkdir(exist_ok=True)
    every = sim.checkpoint_every
    for i, (t, k, st) in enumerate(zip(traj.times, traj.steps, traj.states)):
        if (every and k % every == 0) or i == len(traj.times) - 1:
            integrator.save_checkpoint(ck / f"step_{k:08d}.json", st, sim, t, k, origin)
    (out / "plot_trajectory.py").write_text(PLOT_SCRIPT)
    r0 = recs[0]
    mean_drift = max(abs(r.mean_f - r0.mean_f) for r in recs)
    ham = max(r.relative_hamiltonian_rate for r in recs)
    ok = mean_drift <= 1e-10 and ham <= 1e-8
    summary = {"config": sim.to_dict(), "eps": cfg.eps, "initial_modes": cfg.initial_modes,
               "restart": restart, "final_time": traj.times[-1],
               "mean_f_drift": mean_drift, "max_relative_hamiltonian_rate": ham,
               "passed": ok}
    _dump_json(summary, out / "simulate_report.json")
    print(f"simulate alpha={sim.alpha:g} n={sim.n} to t={traj.times[-1]:g}: "
          f"mean drift {mean_drift:.2e}, hamiltonian rate {ham:.2e}: {_status(ok)}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# verify


def verify_identity() -> dict:
    n = 256
    fields_ = {
        "zero": lambda x: 0 * x,
        "0.1cos(x)": lambda x: 0.1 * np.cos(x),
        "0.05cos(x)+0.03sin(2x)": lambda x: 0.05 * np.cos(x) + 0.03 * np.sin(2 * x),
    }
    out = {"fields": {}, "constants": []}
    ok = True
    for name, fn in fields_.items():
        reps = kernels.verify_hamiltonian_identity(GridFunction.from_function(fn, n),
                                                   IDENTITY_ALPHAS)
        out["fields"][name] = [r.as_dict() for r in reps]
        ok &= all(r.passed for r in reps)
    for a in IDENTITY_ALPHAS:
        ser = np.array([kernels.k_series(k, kernels.PointJet.zero(), a, 3).coeffs[:3]
                        for k in (1, 2, 3)]).T
        err = float(np.max(np.abs(ser - kernels.kernel_constants(a).matrix)))
        out["constants"].append({"alpha": a, "max_error": err, "pass": err <= 1e-12})
        ok &= err <= 1e-12
    out["passed"] = bool(ok)
    return out


def verify_linearization() -> dict:
    rows = []
    for a in LINEARIZATION_ALPHAS:
        rows += contour_rhs.linearization_residuals(a, range(1, 33))
    ok = all(r["rel_error"] <= 1e-4 for r in rows)
    return {"n": 256, "m": 2 ** 14, "eps": 1e-5, "rows": rows, "passed": ok}


def verify_integrals() -> dict:
    rule = QuadratureRule(2 ** 16)
    rows = []
    for a in INTEGRAL_ALPHAS:
        g = contour_rhs.check_g1_zero_integral(a, rule)
        mres = [contour_rhs.check_m_alpha_integral(a, j, rule) for j in range(65)]
        rows.append({"alpha": a, "g1_zero_residual": g, "m_alpha_max_residual": max(mres),
                     "pass": g <= 1e-8 and max(mres) <= 1e-8})
    return {"m": rule.m, "rows": rows, "passed": all(r["pass"] for r in rows)}


VERIFIERS = {"identity": verify_identity, "linearization": verify_linearization,
             "integrals": verify_integrals}


def cmd_verify(which: str, out: Path) -> int:
    names = list(VERIFIERS) if which == "all" else [which]
    report = {}
    for name in names:
        report[name] = VERIFIERS[name]()
        print(f"verify {name}: {_status(report[name]['passed'])}")
    ok = all(r["passed"] for r in report.values())
    report["passed"] = ok
    _dump_json(report, out / f"verify_{which}.json")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# lifespan


def cmd_lifespan(cfg: RunConfig, out: Path) -> int:
    sim = cfg.sim_config()
    res = diagnostics.lifespan_experiment(cfg.alpha, cfg.epsilons, cfg.s, sim, cfg.t_cap_base)
    diagnostics.write_lifespan_csv(res, out / "lifespan.csv")
    bound_ok = all(r.max_norm_ratio <= 3.0 for r in res.runs)
    slope_ok = res.slope is not None and -2.6 <= res.slope <= -1.6
    ok = bound_ok and slope_ok
    summary = {
        "config": asdict(cfg), "slope": res.slope, "message": res.message,
        "runs": [{"epsilon": r.epsilon, "doubling_time": r.doubling_time,
                  "censored": r.censored, "t_cap": r.t_cap,
                  "max_norm_ratio": r.max_norm_ratio} for r in res.runs],
        "norm_bound_passed": bound_ok, "slope_passed": slope_ok, "passed": ok,
    }
    _dump_json(summary, out / "lifespan_report.json")
    for r in res.runs:
        tag = "censored" if r.censored else "doubled"
        print(f"  eps={r.epsilon:g}: T={r.doubling_time:.6g} ({tag}, cap {r.t_cap:g}), "
              f"max ||h||/||h0|| = {r.max_norm_ratio:.4f}")
    print(f"lifespan: {res.message}: {_status(ok)}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sharpfront", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--alpha", type=float)

    sp = sub.add_parser("spectrum", help="frequency table and its certificates")
    common(sp)
    sp.add_argument("--j-max", type=int, dest="j_max")
    sp.add_argument("--range", type=int, dest="resonance_range")

    sp = sub.add_parser("simulate", help="integrate the patch equation")
    common(sp)
    for flag, typ in (("--n", int), ("--m", int), ("--dt", float), ("--t-final", float),
                      ("--eps", float)):
        sp.add_argument(flag, type=typ)
    sp.add_argument("--restart", help="checkpoint file to continue from")

    sp = sub.add_parser("verify", help="identity, linearization and integral checks")
    sp.add_argument("which", choices=["identity", "linearization", "integrals", "all"])
    sp.add_argument("--out", default=".")

    sp = sub.add_parser("lifespan", help="norm-doubling time sweep")
    common(sp)
    for flag, typ in (("--n", int), ("--m", int), ("--dt", float), ("--s", float)):
        sp.add_argument(flag, type=typ)
    sp.add_argument("--eps", type=float, nargs="+", dest="epsilons")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "verify":
            RunManifest("verify " + args.which, None, str(out), {}).write()
            return cmd_verify(args.which, out)
        overrides = {k: v for k, v in vars(args).items()
                     if k not in ("command", "config", "out", "restart")}
        cfg = RunConfig.load(args.config, overrides)
        RunManifest(args.command, args.config, str(out), asdict(cfg)).write()
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out, args.restart)
        return cmd_lifespan(cfg, out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
