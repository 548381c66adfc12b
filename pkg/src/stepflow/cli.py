"""Command-line entry point.

Subcommands: coeffs, energy, evolve, convexity-audit, scaling-sweep,
transition-scan, selfcheck.  Every file-writing run leaves a JSON manifest
next to its primary output recording the resolved configuration, the
coefficient table, the seed, and sha256 digests of everything written, so
a run can be reproduced bit-identically on the same platform.

Exit codes: 0 success, 1 numerical failure (for example dt collapse in the
time stepper), 2 configuration errors.
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .coefficients import (
    ModelCoefficients,
    NondimensionalCoefficients,
    PRESETS,
    beta_branch,
    preset,
)
from .energy import total_energy
from .evolution import EvolutionConfig, StepRejected, evolve
from .experiments import transition_scan, upper_bound_scaling_scan
from .field import Grid, load_binary, save_binary, save_csv
from .local_energy import SampleSpec, convexity_audit
from .profiles import bunch_field, flat_noise_field, meander_field

__all__ = ["main", "ConfigError"]


class ConfigError(Exception):
    """User-facing configuration problem; maps to exit code 2."""


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}: invalid JSON ({e.msg})") from None


def _require(cfg: dict, key: str, where: str):
    if key not in cfg:
        raise ConfigError(f"{where}: missing required field '{key}'")
    return cfg[key]


def _resolve_coefficients(spec):
    """Coefficient set from a preset name or an inline nondimensional table."""
    if isinstance(spec, str):
        if spec not in PRESETS:
            raise ConfigError(
                f"unknown preset '{spec}'; available: {', '.join(sorted(PRESETS))}"
            )
        return preset(spec)
    if isinstance(spec, dict):
        if "preset" in spec:
            return _resolve_coefficients(spec["preset"])
        try:
            return NondimensionalCoefficients(
                **{k: float(v) for k, v in spec.items()}
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"coefficients: {e}") from None
    raise ConfigError("coefficients must be a preset name or a table")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class _Manifest:
    def __init__(self, command: str, config: dict, coefficients, grid=None, seed=None):
        self.started = time.time()
        self.data = {
            "command": command,
            "config": config,
            "coefficients": _coeff_table(coefficients) if coefficients else None,
            "grid": {"n": grid.n, "L": grid.L} if grid else None,
            "seed": seed,
            "version": __version__,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "outputs": {},
        }

    def add_output(self, path) -> None:
        self.data["outputs"][str(path)] = _sha256(path)

    def write(self, primary_output) -> str:
        self.data["wall_clock_s"] = time.time() - self.started
        path = str(primary_output) + ".manifest.json"
        with open(path, "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _coeff_table(c) -> dict:
    if isinstance(c, ModelCoefficients):
        d = c.as_dict()
        d["beta_branch"] = beta_branch(c.c1, c.c3, c.gamma0)
        return d
    return {
        "c1": c.c1,
        "c2": c.c2,
        "c3": c.c3,
        "a": c.a,
        "L": c.L,
        "B": c.B,
        "gamma0": c.gamma0,
        "beta": c.beta,
        "beta_branch": beta_branch(c.c1, c.c3, c.gamma0),
    }


# --- subcommands ------------------------------------------------------------


def _cmd_coeffs(args) -> int:
    if args.preset:
        c = _resolve_coefficients(args.preset)
    elif args.config:
        c = _resolve_coefficients(_load_json(args.config))
    else:
        raise ConfigError("coeffs: give --preset or --config")
    table = _coeff_table(c)
    text = json.dumps(table, indent=2, sort_keys=True)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        m = _Manifest("coeffs", {"preset": args.preset, "config": args.config}, c)
        m.add_output(args.out)
        m.write(args.out)
    return 0


def _cmd_energy(args) -> int:
    c = _resolve_coefficients(
        args.preset if args.preset else _load_json(args.config) if args.config else None
    )
    try:
        f = load_binary(args.field)
    except FileNotFoundError:
        raise ConfigError(f"snapshot not found: {args.field}") from None
    except ValueError as e:
        raise ConfigError(str(e)) from None
    e = total_energy(f, c)
    print(
        json.dumps(
            {
                "total": e.total,
                "nonlocal": e.nonlocal_term,
                "local_log": e.local_log,
                "local_linear": e.local_linear,
                "local_cubic": e.local_cubic,
                "grid": {"n": f.grid.n, "L": f.grid.L},
                "B": list(f.B),
            },
            indent=2,
        )
    )
    return 0


def _initial_field(cfg: dict, grid: Grid, seed: int):
    kind = _require(cfg, "kind", "initial")
    if kind == "random":
        rng = np.random.Generator(np.random.Philox(seed))
        return flat_noise_field(
            grid,
            rng,
            rms=float(cfg.get("rms", 0.01)),
            B=tuple(cfg.get("B", (0.0, 0.0))),
            kmax=cfg.get("kmax"),
        )
    if kind == "meander":
        m = int(cfg.get("m", 1))
        return meander_field(
            grid, float(_require(cfg, "A", "initial")), 2.0 * np.pi * m / grid.L,
            float(_require(cfg, "B", "initial")),
        )
    if kind == "bunch":
        return bunch_field(
            grid, float(_require(cfg, "H", "initial")), float(_require(cfg, "rho", "initial"))
        )
    if kind == "file":
        return load_binary(_require(cfg, "path", "initial"))
    raise ConfigError(f"initial: unknown kind '{kind}'")


def _cmd_evolve(args) -> int:
    cfg = _load_json(args.config)
    c = _resolve_coefficients(_require(cfg, "coefficients", args.config))
    gspec = _require(cfg, "grid", args.config)
    try:
        grid = Grid(int(_require(gspec, "n", "grid")), float(_require(gspec, "L", "grid")))
    except ValueError as e:
        raise ConfigError(f"grid: {e}") from None
    seed = int(cfg.get("seed", 0))
    try:
        f0 = _initial_field(_require(cfg, "initial", args.config), grid, seed)
    except ValueError as e:
        raise ConfigError(f"initial: {e}") from None

    ev = _require(cfg, "evolution", args.config)
    try:
        econf = EvolutionConfig(
            dt=float(_require(ev, "dt", "evolution")),
            t_end=float(_require(ev, "t_end", "evolution")),
            kappa=ev.get("kappa"),
            dt_control=ev.get("dt_control", "adaptive"),
            record_every=int(ev.get("record_every", 1)),
            max_halvings=int(ev.get("max_halvings", 20)),
            max_steps=ev.get("max_steps"),
            stop_tol=ev.get("stop_tol"),
            dealias=bool(ev.get("dealias", True)),
        )
    except ValueError as e:
        raise ConfigError(f"evolution: {e}") from None

    manifest = _Manifest("evolve", cfg, c, grid=grid, seed=seed)
    final, trace = evolve(f0, econf, c)  # StepRejected propagates as exit 1
    trace.write_csv(args.out)
    manifest.add_output(args.out)
    if args.snapshots:
        import os

        os.makedirs(args.snapshots, exist_ok=True)
        for name, fld in (("initial.bin", f0), ("final.bin", final)):
            p = os.path.join(args.snapshots, name)
            save_binary(fld, p)
            manifest.add_output(p)
        p = os.path.join(args.snapshots, "final.csv")
        save_csv(final, p)
        manifest.add_output(p)
    manifest.write(args.out)
    last = trace.records[-1]
    print(
        json.dumps(
            {"t_final": last.t, "E_final": last.energy.total, "steps": len(trace.records) - 1}
        )
    )
    return 0


def _cmd_convexity_audit(args) -> int:
    c = _resolve_coefficients(
        args.preset if args.preset else _load_json(args.config) if args.config else "zhu2009"
    )
    spec = SampleSpec.default_for(c, n_samples=args.samples)
    report = convexity_audit(c, spec)
    print(json.dumps(report.as_dict(), indent=2))
    if args.out:
        manifest = _Manifest("convexity-audit", {"samples": args.samples}, c)
        report.write_csv(args.out)
        manifest.add_output(args.out)
        manifest.write(args.out)
    return 0


def _cmd_scaling_sweep(args) -> int:
    cfg = _load_json(args.config) if args.config else {}
    c = _resolve_coefficients(cfg.get("coefficients", {}))
    if not isinstance(c, NondimensionalCoefficients):
        raise ConfigError("scaling-sweep: coefficients must be a nondimensional table")
    omega = float(cfg.get("omega", 2.0 * np.pi / c.L))
    B = float(cfg.get("B", c.B))
    if "a_list" in cfg:
        a_list = [float(x) for x in cfg["a_list"]]
    else:
        a_list = np.geomspace(
            float(cfg.get("a_max", 1e-1)),
            float(cfg.get("a_min", 1e-4)),
            int(cfg.get("n_points", 7)),
        )
    manifest = _Manifest(
        "scaling-sweep", {**cfg, "omega": omega, "B": B, "a_list": list(map(float, a_list))}, c
    )
    report = upper_bound_scaling_scan(
        c, omega, B, a_list, quadrature_n=int(cfg.get("quadrature_n", 65536))
    )
    report.write_csv(args.out)
    manifest.add_output(args.out)
    summary_path = str(args.out) + ".summary.json"
    with open(summary_path, "w") as fh:
        json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest.add_output(summary_path)
    manifest.write(args.out)
    print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_transition_scan(args) -> int:
    if args.preset not in PRESETS:
        raise ConfigError(f"unknown preset '{args.preset}'")
    material = PRESETS[args.preset]
    if args.vary == "eps0" and args.fixed is None:
        raise ConfigError("transition-scan: --fixed (l_t in meters) required for --vary eps0")
    fixed = args.fixed if args.fixed is not None else 0.012
    if args.vary == "eps0":
        material = replace(material, eps0=0.0)  # overridden per sweep point
    report = transition_scan(
        args.vary, material, N=args.steps, fixed=fixed, n_points=args.points
    )
    manifest = _Manifest(
        "transition-scan",
        {"vary": args.vary, "preset": args.preset, "N": args.steps, "fixed": fixed,
         "points": args.points},
        None,
    )
    report.write_csv(args.out)
    manifest.add_output(args.out)
    summary_path = str(args.out) + ".summary.json"
    with open(summary_path, "w") as fh:
        json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest.add_output(summary_path)
    manifest.write(args.out)
    print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_selfcheck(args) -> int:
    """Fast invariant suite; prints one line per check, exit 1 on failure."""
    from .field import h_half_seminorm_sq, nonlocal_energy
    from .profiles import meander_field as _meander

    checks = []

    def check(name, ok, detail=""):
        checks.append(ok)
        print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))

    c = preset("zhu2009")
    check(
        "coefficient goldens",
        abs(c.c1 / 7.2575e6 - 1) < 1e-3
        and abs(c.c2 / 1.1719e8 - 1) < 1e-3
        and abs(c.gamma0 / 9.7109e-8 - 1) < 5e-3
        and 125 <= c.beta <= 135,
        f"c1={c.c1:.5g} c2={c.c2:.5g} gamma0={c.gamma0:.5g} beta={c.beta:.4g}",
    )

    grid = Grid(64, 1.0)
    A, B, m = 0.3, 1.0, 3
    omega = 2.0 * np.pi * m / grid.L
    f = _meander(grid, A, omega, B)
    exact = A**2 * B**2 * omega * grid.L / (4.0 * np.pi)
    got = h_half_seminorm_sq(f)
    check("seminorm exactness", abs(got / exact - 1) < 1e-10, f"rel err {abs(got / exact - 1):.2e}")
    exact_e = (c.c1 * np.pi * grid.L**2 / 2.0) * A**2 * B**2 * omega
    check(
        "long-range energy closed form",
        abs(nonlocal_energy(f, c.c1) / exact_e - 1) < 1e-10,
    )

    report = convexity_audit(c, SampleSpec.default_for(c, n_samples=2500))
    check(
        "regularized density convex",
        report.min_eig_psi_rel >= -1e-9,
        f"min rel eig {report.min_eig_psi_rel:.2e}",
    )
    check("original density nonconvex witness", report.psi0_witness is not None)

    nc = NondimensionalCoefficients()
    rng = np.random.Generator(np.random.Philox(0))
    f0 = flat_noise_field(Grid(32, 1.0), rng, rms=0.01, B=(0.5, 0.0), kmax=4)
    econf = EvolutionConfig(dt=1e-4, t_end=np.inf, max_steps=50, record_every=1)
    try:
        _, trace = evolve(f0, econf, nc)
        energies = [r.energy.total for r in trace.records]
        drops = np.diff(energies)
        check(
            "gradient flow dissipates",
            bool(np.all(drops <= 1e-12 * np.abs(energies[:-1]))),
            f"max rise {drops.max():.2e}",
        )
        check(
            "mass conserved",
            abs(trace.records[-1].mean) <= 1e-10 * np.abs(f0.values).max(),
        )
    except StepRejected as e:
        check("gradient flow dissipates", False, str(e))

    return 0 if all(checks) else 1


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stepflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("coeffs", help="derive and print model coefficients")
    q.add_argument("--preset", choices=sorted(PRESETS))
    q.add_argument("--config", help="JSON file with physical or nondimensional parameters")
    q.add_argument("--out", help="also write the JSON table to this path")
    q.set_defaults(func=_cmd_coeffs)

    q = sub.add_parser("energy", help="energy breakdown of a field snapshot")
    q.add_argument("--field", required=True, help="binary snapshot path")
    q.add_argument("--preset", choices=sorted(PRESETS))
    q.add_argument("--config", help="JSON coefficient table")
    q.set_defaults(func=_cmd_energy)

    q = sub.add_parser("evolve", help="run the height evolution from a JSON config")
    q.add_argument("--config", required=True)
    q.add_argument("--out", required=True, help="trace CSV path")
    q.add_argument("--snapshots", help="directory for initial/final snapshots")
    q.set_defaults(func=_cmd_evolve)

    q = sub.add_parser("convexity-audit", help="sample Hessian eigenvalues of the densities")
    q.add_argument("--preset", choices=sorted(PRESETS))
    q.add_argument("--config", help="JSON coefficient table")
    q.add_argument("--samples", type=int, default=10_000)
    q.add_argument("--out", help="CSV of sampled eigenvalues")
    q.set_defaults(func=_cmd_convexity_audit)

    q = sub.add_parser("scaling-sweep", help="meandering-family minimum energy vs a")
    q.add_argument("--config", help="JSON sweep config")
    q.add_argument("--out", required=True, help="CSV path (summary JSON written alongside)")
    q.set_defaults(func=_cmd_scaling_sweep)

    q = sub.add_parser("transition-scan", help="bunching vs meandering energy densities")
    q.add_argument("--vary", choices=["l_t", "eps0"], required=True)
    q.add_argument("--preset", default="zhu2009", help="material preset")
    q.add_argument("--steps", type=int, default=15, help="number of steps N in the cell")
    q.add_argument("--fixed", type=float, help="fixed eps0 (l_t sweep) or l_t in m (eps0 sweep)")
    q.add_argument("--points", type=int, default=25)
    q.add_argument("--out", required=True, help="CSV path (summary JSON written alongside)")
    q.set_defaults(func=_cmd_transition_scan)

    q = sub.add_parser("selfcheck", help="run the fast invariant suite")
    q.set_defaults(func=_cmd_selfcheck)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"stepflow: config error: {e}", file=sys.stderr)
        return 2
    except StepRejected as e:
        print(f"stepflow: numerical failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
