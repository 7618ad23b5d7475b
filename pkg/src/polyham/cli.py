"""Command-line entry point: ``polyham derive|verify|simulate``.

Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ConfigurationError, PolyhamError
from .exterior import graph_tangent, is_decomposable, plucker_residuals
from .lagrangian import QUADRATIC_SCALAR, QuadricVariety, graph_variety, homogenize
from .legendre import crit1_residual, crit2_order, double_dual_check, dual_quadric, legendre_map, pairing_defect
from .models import ModelSpec, by_name, derive_surface, ed_membership
from .motion import build_motion_system, redundancy_check, sample_consistent_jets
from . import solver

MODELS = ("kg1p1", "scalar-ndim", "ed1p1")

# base tolerances, scaled by --tol
TOLERANCES = {
    "surface_regression": 1e-12,
    "crit1": 1e-12,
    "crit2_order": 0.1,
    "double_zero": 1e-8,
    "double_dual": 1e-10,
    "plucker": 1e-10,
    "legendre_on_surface": 1e-10,
    "membership": 1e-9,
    "redundancy": 1e-9,
}


def parse_metric(text: str) -> np.ndarray:
    """``diag:1,-1,-1`` or rows separated by ``;`` such as ``1,0;0,-1``."""
    try:
        if text.startswith("diag:"):
            return np.diag([float(v) for v in text[5:].split(",")])
        return np.array([[float(v) for v in row.split(",")] for row in text.split(";")])
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse metric {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polyham", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("model_pos", nargs="?", metavar="model", choices=MODELS)
    common.add_argument("--model", choices=MODELS)
    common.add_argument("--mass", type=float, default=0.0)
    common.add_argument("--metric", default=None, help="contravariant metric, e.g. diag:1,-1,-1")
    common.add_argument("--c0", type=float, default=0.25)
    common.add_argument("--phi0", type=float, default=0.0, help="constant potential Phi for ed1p1")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1.0, help="multiplier on the default tolerances")
    common.add_argument("--out", default=None, help="output directory")
    sub.add_parser("derive", parents=[common], help="derive the phase-space surface")
    v = sub.add_parser("verify", parents=[common], help="run the duality and redundancy suites")
    v.add_argument("--samples", type=int, default=100)
    s = sub.add_parser("simulate", parents=[common], help="integrate the Hamiltonian system")
    s.add_argument("--k", type=float, default=2.0, help="plane-wave number (kg1p1)")
    s.add_argument("--f01", type=float, default=0.7, help="initial uniform field strength (ed1p1)")
    s.add_argument("--nodes", type=int, default=None)
    s.add_argument("--h", type=float, default=None)
    s.add_argument("--dt", type=float, default=None)
    s.add_argument("--T", type=float, default=None)
    s.add_argument("--stride", type=int, default=10)
    s.add_argument("--backend", choices=("cython", "python"), default=None)
    return p


def _model(args) -> ModelSpec:
    name = args.model or args.model_pos
    if name is None:
        raise ConfigurationError("no model given; use one of " + ", ".join(MODELS))
    metric = parse_metric(args.metric) if args.metric else None
    return by_name(name, mass=args.mass, metric=metric, c0=args.c0, phi0=args.phi0)


def _outdir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args, model: ModelSpec) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("model_pos",)}
    cfg["model"] = model.name
    return cfg


# --------------------------------------------------------------------------
# derive


def cmd_derive(args) -> int:
    model = _model(args)
    surface, log = derive_surface(model, seed=args.seed)
    dist = surface.distance(model.expected_surface)
    log.append(f"regression distance to the closed form: {dist:.3e}")
    data = surface.to_dict()
    data["model"] = model.name
    data["seed"] = args.seed
    text = json.dumps(data, sort_keys=True, indent=1)
    out = _outdir(args)
    for line in log:
        print(line)
    if out is None:
        print(text)
    else:
        (out / f"surface_{model.name}.json").write_text(text + "\n")
        (out / f"derivation_{model.name}.log").write_text("\n".join(log) + "\n")
    return 0


# --------------------------------------------------------------------------
# verify


def _random_jet(model: ModelSpec, rng: np.random.Generator):
    f = rng.normal(size=(model.n_fields, model.n_worldsheet))
    x = rng.uniform(-1, 1, model.n_worldsheet)
    phi = rng.uniform(-1, 1, model.n_fields)
    return f, x, phi


def verification_suite(model: ModelSpec, samples: int, seed: int) -> dict[str, float]:
    """Worst-case value of every check; compare against ``TOLERANCES``."""
    rng = np.random.default_rng(seed)
    Lam = homogenize(model.lagrangian)
    vals: dict[str, float] = {}

    surface, _ = derive_surface(model, seed=seed)
    vals["surface_regression"] = surface.distance(model.expected_surface)

    c1, c2, dz, pl, on = 0.0, [], 0.0, 0.0, 0.0
    for k in range(samples):
        f, x, phi = _random_jet(model, rng)
        xi = graph_tangent(f) * rng.uniform(0.5, 2.0)
        c1 = max(c1, crit1_residual(Lam, xi, x, phi))
        res = plucker_residuals(xi)
        if res:
            pl = max(pl, max(abs(r) for r in res) / xi.max_abs() ** 2)
        if model.kind == QUADRATIC_SCALAR:
            mp = legendre_map(Lam, xi, x, phi, model.phase)
            vals_k = dict(zip(model.phase.base_names, [*x, *phi])) | mp.values()
            on = max(on, model.expected_surface.relative_residual(vals_k))
        if k < 20:
            d = rng.normal(size=f.shape)
            d /= np.linalg.norm(d)
            c2.append(abs(crit2_order(Lam, f, d, x=x, phi=phi) - 2.0))
            P = legendre_map(Lam, graph_tangent(f), x, phi)
            scale = max(1.0, sum(abs(c * graph_tangent(f)[I]) for I, c in P.P.coeffs.items()))
            # first-order part of the defect: central-difference slope along the surface
            lo_hi = pairing_defect(Lam, f, d, [1e-4, -1e-4], x, phi)
            dz = max(dz, abs(lo_hi[0] - lo_hi[1]) / 2e-4 / scale)
    vals["crit1"] = c1
    vals["crit2_order"] = max(c2)
    vals["double_zero"] = dz
    vals["plucker"] = pl

    if model.kind == QUADRATIC_SCALAR:
        vals["legendre_on_surface"] = on
        dd = double_dual_check(graph_variety(model.lagrangian))
        for _ in range(samples):
            B = rng.normal(size=(5, 5))
            Q = QuadricVariety(0.5 * (B + B.T), tuple(f"X{i}" for i in range(5)))
            if Q.nondegenerate:
                dd = max(dd, double_dual_check(Q))
        vals["double_dual"] = dd
    else:
        vals["membership"] = float(ed_membership(model, samples, rng).max())

    system = build_motion_system(model.expected_surface, model)
    rep = redundancy_check(system, sample_consistent_jets(system, samples, rng))
    vals["redundancy"] = rep.worst()
    return vals


def cmd_verify(args) -> int:
    if args.samples < 1:
        raise ConfigurationError("--samples must be >= 1")
    model = _model(args)
    vals = verification_suite(model, args.samples, args.seed)
    checks = {}
    for name, v in vals.items():
        tol = TOLERANCES[name] * args.tol
        ok = bool(v <= tol)
        checks[name] = {"value": v, "tol": tol, "pass": ok}
        print(f"{'PASS' if ok else 'FAIL'} {name:22s} {v:.3e} <= {tol:.1e}")
    passed = all(c["pass"] for c in checks.values())
    report = {"model": model.name, "seed": args.seed, "samples": args.samples, "tol_scale": args.tol,
              "checks": checks, "pass": passed}
    out = _outdir(args)
    if out is not None:
        (out / f"verify_{model.name}.json").write_text(json.dumps(report, sort_keys=True, indent=1) + "\n")
    print("verification " + ("passed" if passed else "FAILED"))
    return 0 if passed else 1


# --------------------------------------------------------------------------
# simulate


def _grid(args, length: float) -> tuple[int, float]:
    if args.nodes is not None and args.nodes < 3:
        raise ConfigurationError("--nodes must be >= 3")
    if args.nodes is not None:
        nodes = args.nodes
    elif args.h is not None:
        if args.h <= 0:
            raise ConfigurationError("--h must be positive")
        nodes = max(3, round(length / args.h))
    else:
        nodes = max(3, round(length * 256))
    h = length / nodes
    if args.h is not None and args.nodes is not None and abs(h - args.h) > 1e-9 * args.h:
        raise ConfigurationError("--nodes and --h disagree with the periodic domain length")
    return nodes, h


def cmd_simulate(args) -> int:
    model = _model(args)
    if args.stride < 1:
        raise ConfigurationError("--stride must be >= 1")
    rng = np.random.default_rng(args.seed)
    checks = {}
    if model.kind == QUADRATIC_SCALAR:
        if model.n_worldsheet != 2 or not np.allclose(model.metric, np.diag([1.0, -1.0])):
            raise ConfigurationError("simulation is limited to 1+1 with metric diag:1,-1")
        if args.k <= 0:
            raise ConfigurationError("--k must be positive")
        length = 2 * math.pi / args.k
        nodes, h = _grid(args, length)
        dt = args.dt if args.dt is not None else h / 2
        T = args.T if args.T is not None else 10.0
        solver.check_cfl(h, dt)
        state = solver.plane_wave(model, nodes, length, args.k)
        traj = solver.run(model, state, T, dt, args.stride, backend=args.backend)
        w_exact = math.sqrt(args.k**2 + args.mass**2)
        summary = {"nodes": nodes, "h": h, "dt": traj.dt, "T": T, "omega_exact": w_exact,
                   "eta_max_final": float(traj.diagnostics["eta_max"][-1]),
                   "energy_drift": abs(traj.diagnostics["energy"][-1] / traj.diagnostics["energy"][0] - 1)}
        try:
            t, y = solver.probe_series(model, state, T, traj.dt, backend=args.backend)
            w = solver.measure_frequency(t, y)
            summary["omega_measured"] = w
            checks["frequency"] = bool(abs(w / w_exact - 1) <= 0.01 * args.tol)
        except ValueError:
            summary["omega_measured"] = None
    else:
        length = 1.0
        nodes, h = _grid(args, length)
        dt = args.dt if args.dt is not None else h / 2
        T = args.T if args.T is not None else 1.0
        solver.check_cfl(h, dt)
        state = solver.ed_initial(model, nodes, length, args.f01, rng)
        traj = solver.run(model, state, T, dt, args.stride)
        spread = max(traj.diagnostics["f01_spread"])
        per_time = spread / T if T > 0 else spread
        summary = {"nodes": nodes, "h": h, "dt": traj.dt, "T": T, "f01_spread_max": spread,
                   "f01_spread_per_time": per_time, "eta_max_final": traj.diagnostics["eta_max"][-1]}
        checks["f01_conservation"] = bool(per_time <= 1e-8 * args.tol)
    header = f"seed={args.seed} model={model.name} backend={args.backend or kernels.BACKEND} " + " ".join(
        f"{k}={v}" for k, v in summary.items() if k in ("nodes", "h", "dt", "T"))
    out = _outdir(args) or Path(".")
    solver.write_trajectory_csv(model, traj, out / f"trajectory_{model.name}.csv", header)
    solver.write_diagnostics_csv(traj, out / f"diagnostics_{model.name}.csv", header)
    summary["seed"] = args.seed
    summary["checks"] = checks
    print(json.dumps(summary, sort_keys=True, indent=1))
    return 0 if all(checks.values()) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if not (args.tol > 0 and math.isfinite(args.tol)):
            raise ConfigurationError("--tol must be a positive multiplier")
        return {"derive": cmd_derive, "verify": cmd_verify, "simulate": cmd_simulate}[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except PolyhamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
