"""Command-line front end: configuration ingestion and CSV/JSON output."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import GermSolverError, ParseError, ValidationError
from .flux import FluxPair, flux_from_literal
from .germ import (RH_TOL, GermSpec, completeness_check, definiteness_probe, germ_from_literal,
                   is_l1d, sample)
from .riemann import eval_fan, solve_classical, solve_interface
from .scheme import GridSolution, MeshConfig, PiecewiseConstant, Samples, linfty_envelope, run

CSV_VERSION = "germ-solver-v1"

_TOP_KEYS = {"fluxes", "germ", "mesh", "u0", "resolution", "tolerances", "viscous", "riemann", "output"}
_MESH_KEYS = {"dx", "x_extent", "t_end", "cfl_fraction", "num_flux", "n_steps", "max_snapshots"}
_VISC_KEYS = {"eps", "kappa", "pair", "x_span", "profile_tol", "delta", "adapted"}
_MESH_DEFAULTS = {"dx": 0.01, "x_extent": 1.0, "t_end": 0.5}


@dataclass
class RunConfig:
    fluxes: FluxPair
    germ: GermSpec | None
    mesh: MeshConfig
    u0: dict | None
    resolution: int = 101
    rh_tol: float = RH_TOL
    viscous: dict = field(default_factory=dict)
    riemann: dict = field(default_factory=dict)
    output: str | None = None
    raw: dict = field(default_factory=dict)
    base_dir: Path = field(default_factory=Path.cwd)


def _reject_unknown(obj: dict, allowed: set, where: str):
    bad = sorted(set(obj) - allowed)
    if bad:
        raise ValidationError([f"unknown key {where}.{k}" if where else f"unknown key {k}" for k in bad])


def config_from_dict(raw: dict, base_dir: Path | None = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ValidationError("configuration must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "")
    errs = []
    if "fluxes" not in raw:
        raise ValidationError("missing key fluxes")
    fl = raw["fluxes"]
    if isinstance(fl, dict) and set(fl) <= {"left", "right", "both"} and fl:
        if "both" in fl:
            left = right = flux_from_literal(fl["both"])
        else:
            if "left" not in fl or "right" not in fl:
                raise ValidationError("fluxes needs left and right (or both)")
            left, right = flux_from_literal(fl["left"]), flux_from_literal(fl["right"])
    else:
        raise ValidationError("fluxes must be {left, right} or {both}")
    fluxes = FluxPair(left, right)
    tols = raw.get("tolerances") or {}
    _reject_unknown(tols, {"rh_tol"}, "tolerances")
    rh_tol = float(tols.get("rh_tol", RH_TOL))
    if not rh_tol > 0:
        errs.append("tolerances.rh_tol must be positive")
    germ = germ_from_literal(raw["germ"], fluxes, rh_tol) if raw.get("germ") is not None else None
    mesh_raw = dict(_MESH_DEFAULTS)
    mesh_raw.update(raw.get("mesh") or {})
    _reject_unknown(mesh_raw, _MESH_KEYS, "mesh")
    mesh = MeshConfig(**mesh_raw)
    u0 = raw.get("u0")
    if u0 is not None:
        _parse_u0(u0, base_dir or Path.cwd())
    res = raw.get("resolution", 101)
    if not isinstance(res, int) or res < 2:
        errs.append("resolution must be an integer >= 2")
    visc = raw.get("viscous") or {}
    _reject_unknown(visc, _VISC_KEYS, "viscous")
    rie = raw.get("riemann") or {}
    _reject_unknown(rie, {"u_minus", "u_plus"}, "riemann")
    if errs:
        raise ValidationError(errs)
    return RunConfig(fluxes, germ, mesh, u0, res, rh_tol, visc, rie, raw.get("output"), raw,
                     base_dir or Path.cwd())


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(raw, path.parent)


def serialize(cfg: RunConfig) -> dict:
    out = {
        "fluxes": {"left": cfg.fluxes.left.to_literal(), "right": cfg.fluxes.right.to_literal()},
        "mesh": cfg.mesh.to_dict(),
        "resolution": cfg.resolution,
        "tolerances": {"rh_tol": cfg.rh_tol},
    }
    if cfg.germ is not None:
        out["germ"] = cfg.germ.to_literal()
    if cfg.u0 is not None:
        out["u0"] = cfg.u0
    if cfg.viscous:
        out["viscous"] = cfg.viscous
    if cfg.riemann:
        out["riemann"] = cfg.riemann
    if cfg.output is not None:
        out["output"] = cfg.output
    return out


def _parse_u0(spec, base_dir: Path):
    if isinstance(spec, (int, float)):
        return PiecewiseConstant((), (float(spec),))
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValidationError("u0 must be one of {constant}, {riemann}, {piecewise}, {samples}")
    (kind, val), = spec.items()
    if kind == "constant":
        return PiecewiseConstant((), (float(val),))
    if kind == "riemann":
        um, up = val
        return PiecewiseConstant((0.0,), (float(um), float(up)))
    if kind == "piecewise":
        if not isinstance(val, dict):
            raise ValidationError("u0.piecewise needs {breaks, values}")
        _reject_unknown(val, {"breaks", "values"}, "u0.piecewise")
        return PiecewiseConstant(tuple(map(float, val["breaks"])), tuple(map(float, val["values"])))
    if kind == "samples":
        if isinstance(val, str):
            rows = _read_csv(base_dir / val)
            xs = [float(r[0]) for r in rows]
            us = [float(r[1]) for r in rows]
        else:
            xs, us = zip(*val)
        return Samples(tuple(xs), tuple(us))
    raise ValidationError(f"unknown u0 kind {kind!r}")


# -- CSV helpers --------------------------------------------------------------------

def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _read_csv(path: Path) -> list[list[str]]:
    try:
        lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
                 if ln and not ln.startswith("#")]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(lines))
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    return rows


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _pick(n: int, k: int) -> np.ndarray:
    if k <= 1 or n <= k:
        return np.arange(n)
    return np.unique(np.linspace(0, n - 1, k).round().astype(int))


def write_solution(sol: GridSolution, out: Path, snapshots: int, extra: dict | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rows = ((sol.times[n], x, u) for n in _pick(len(sol.times), snapshots)
            for x, u in zip(sol.x, sol.field[n]))
    write_csv(out / "field.csv", ["t", "x", "u"], rows)
    flux = np.concatenate([sol.interface_flux_series, [np.nan]])
    trows = zip(sol.step_times, sol.trace_left, sol.trace_right, flux)
    write_csv(out / "traces.csv", ["t", "ul", "ur", "flux"], trows)
    rep = sol.report()
    if extra:
        rep.update(extra)
    write_json(out / "report.json", rep)


def read_solution(path) -> GridSolution:
    rows = np.asarray(_read_csv(Path(path)), dtype=float)
    if rows.ndim != 2 or rows.shape[1] != 3:
        raise ParseError(f"{path}: expected columns t,x,u")
    times = np.unique(rows[:, 0])
    xs = np.unique(rows[:, 1])
    if len(rows) != len(times) * len(xs):
        raise ParseError(f"{path}: field is not a full time x space table")
    order = np.lexsort((rows[:, 1], rows[:, 0]))
    fld = rows[order, 2].reshape(len(times), len(xs))
    dx = float(xs[1] - xs[0]) if len(xs) > 1 else 1.0
    n_left = int(np.count_nonzero(xs < 0))
    dt = float(times[1] - times[0]) if len(times) > 1 else 0.0
    return GridSolution(dx=dx, dt=dt, x=xs, times=times, field=fld, step_times=times,
                        trace_left=fld[:, n_left - 1].copy(), trace_right=fld[:, n_left].copy(),
                        interface_flux_series=np.full(max(len(times) - 1, 0), np.nan),
                        meta={"source": str(path)})


# -- subcommands --------------------------------------------------------------------

def _need_germ(cfg: RunConfig) -> GermSpec:
    if cfg.germ is None:
        raise ValidationError("this command needs a germ in the configuration")
    return cfg.germ


def _out_dir(args, cfg: RunConfig) -> Path:
    base = args.out or cfg.output or "."
    p = Path(base)
    if not p.is_absolute() and args.out is None and cfg.output is not None:
        p = cfg.base_dir / p
    p.mkdir(parents=True, exist_ok=True)
    return p


def _mesh_override(cfg: RunConfig, args) -> MeshConfig:
    d = cfg.mesh.to_dict()
    if getattr(args, "dx", None) is not None:
        d["dx"] = args.dx
    if getattr(args, "t_end", None) is not None:
        d["t_end"] = args.t_end
    return MeshConfig(**d)


def cmd_simulate(args, cfg: RunConfig) -> int:
    g = _need_germ(cfg)
    if cfg.u0 is None:
        raise ValidationError("simulate needs u0")
    mesh = _mesh_override(cfg, args)
    sol = run(mesh, g, cfg.fluxes, _parse_u0(cfg.u0, cfg.base_dir))
    write_solution(sol, _out_dir(args, cfg), args.snapshots)
    return 0


def cmd_riemann(args, cfg: RunConfig) -> int:
    um = args.u_minus if args.u_minus is not None else cfg.riemann.get("u_minus")
    up = args.u_plus if args.u_plus is not None else cfg.riemann.get("u_plus")
    if um is None or up is None:
        raise ValidationError("riemann needs u_minus and u_plus")
    if cfg.germ is None:
        if not cfg.fluxes.same:
            raise ValidationError("riemann without a germ needs identical fluxes")
        fan = solve_classical(cfg.fluxes.left, float(um), float(up))
        payload = {"u_minus": um, "u_plus": up, "fan": fan.to_dict()}
        sol = lambda t, x: eval_fan(fan, t, x)  # noqa: E731
    else:
        s = solve_interface(cfg.germ.maximal(), cfg.fluxes, float(um), float(up))
        payload = s.to_dict()
        sol = s
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.out is not None or cfg.output is not None:
        out = _out_dir(args, cfg)
        write_json(out / "riemann.json", payload)
        xi = np.linspace(-args.xi_max, args.xi_max, args.points)
        write_csv(out / "profile.csv", ["xi", "u"], zip(xi, np.asarray(sol(1.0, xi), dtype=float)))
    return 0


def cmd_germ(args, cfg: RunConfig) -> int:
    g = _need_germ(cfg)
    res = args.resolution or cfg.resolution
    smp = sample(g, res)
    payload = {"germ": g.to_literal(), "resolution": res, "pairs": len(smp)}
    if args.analyze:
        l1d = is_l1d(smp) if len(smp) else None
        payload["l1d"] = {"ok": bool(l1d.ok), "margin": l1d.margin,
                          "witness": [list(p) for p in l1d.witness] if l1d and l1d.witness else None}
        payload["definiteness"] = definiteness_probe(g, res).to_dict()
        payload["completeness"] = completeness_check(smp, min(res, 61)).to_dict() if len(smp) else None
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.out is not None or cfg.output is not None:
        out = _out_dir(args, cfg)
        write_json(out / "germ.json", payload)
        write_csv(out / "germ.csv", ["ul", "ur", "s"], smp.rows())
    return 0


def cmd_viscous(args, cfg: RunConfig) -> int:
    from . import viscous as V

    vc = dict(cfg.viscous)
    if args.eps is not None:
        vc["eps"] = args.eps
    if args.mode == "profile":
        pair = vc.get("pair")
        if pair is None:
            raise ValidationError("viscous profile mode needs viscous.pair")
        x_span = float(vc.get("x_span", 100.0))
        tol = float(vc.get("profile_tol", V.PROFILE_TOL))
        if "delta" in vc:
            prof = V.smoothed_profile(cfg.fluxes, pair, float(vc.get("eps", 1.0)), float(vc["delta"]),
                                      x_span, tol, cfg.rh_tol)
        else:
            prof = V.standing_wave(cfg.fluxes, pair, x_span, tol, cfg.rh_tol)
        print(json.dumps(prof.to_dict(), indent=2, sort_keys=True))
        out = _out_dir(args, cfg)
        write_csv(out / "profile.csv", ["xi", "w"], zip(prof.xi, prof.w))
        write_json(out / "profile.json", prof.to_dict())
        return 0
    sol = _parabolic(cfg, vc, _mesh_override(cfg, args))
    write_solution(sol, _out_dir(args, cfg), args.snapshots, {"eps": float(vc["eps"])})
    return 0


def _parabolic(cfg: RunConfig, vc: dict, mesh: MeshConfig) -> GridSolution:
    from . import viscous as V

    if "eps" not in vc:
        raise ValidationError("viscous pde mode needs eps")
    if cfg.u0 is None:
        raise ValidationError("viscous pde mode needs u0")
    visc = None
    if vc.get("adapted"):
        g = _need_germ(cfg)
        visc = V.adapted_viscosity(cfg.fluxes, g.A, g.B, float(vc.get("kappa", 0.5)), cfg.rh_tol)
    return V.run_parabolic(cfg.fluxes, visc, float(vc["eps"]), mesh, _parse_u0(cfg.u0, cfg.base_dir),
                           germ=cfg.germ)


def cmd_verify(args, cfg: RunConfig) -> int:
    from . import verify as VF

    g = _need_germ(cfg)
    u = read_solution(args.field)
    smp = sample(g, args.resolution or cfg.resolution)
    reports = []
    lo, hi = float(u.field[0].min()), float(u.field[0].max())
    env = linfty_envelope(g, cfg.fluxes, (lo, hi))
    reports.append(VF.max_principle_report(u, env))
    reports.append(VF.trace_membership(u, smp, window=args.window))
    half = 0.5 * (u.x[-1] - u.x[0])
    bump = VF.TestBump.hat(-0.5 * half, 0.5 * half, float(u.times[-1]))
    for cl, cr in smp.pairs_array[:: max(1, len(smp) // 8)].tolist():
        reports.append(VF.entropy_residual(u, smp, cl, cr, bump, cfg.fluxes))
    if args.field_b:
        v = read_solution(args.field_b)
        reports.append(VF.kato_residual(u, v, bump, cfg.fluxes))
        reports.append(VF.l1_contraction_report(u, v))
        reports.append(VF.comparison_report(u, v))
    payload = [r.to_dict() for r in reports]
    text = json.dumps(payload, indent=2, sort_keys=True, default=float)
    print(text)
    if args.out is not None:
        write_json(_out_dir(args, cfg) / "verify.json", payload)
    failed = any(r.passed is False for r in reports)
    return 5 if failed and not args.informational else 0


def _sweep_one(job):
    raw, base_dir, eps, out, snapshots = job
    cfg = config_from_dict(raw, Path(base_dir))
    vc = dict(cfg.viscous)
    vc["eps"] = eps
    sol = _parabolic(cfg, vc, cfg.mesh)
    write_solution(sol, Path(out), snapshots, {"eps": eps})
    return eps, sol


def cmd_sweep(args, cfg: RunConfig) -> int:
    eps_list = [float(e) for e in args.eps.split(",") if e.strip()]
    if not eps_list:
        raise ValidationError("--eps needs at least one value")
    out = _out_dir(args, cfg)
    g = _need_germ(cfg)
    ref = run(cfg.mesh, g, cfg.fluxes, _parse_u0(cfg.u0, cfg.base_dir))
    write_solution(ref, out / "reference", args.snapshots)
    jobs = [(cfg.raw, str(cfg.base_dir), e, str(out / f"eps_{e:g}"), args.snapshots) for e in eps_list]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as ex:
            results = list(ex.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    rows = []
    for eps, sol in results:
        d = float(np.abs(sol.final - ref.final).sum() * sol.dx)
        rows.append((eps, sol.dt, len(sol.interface_flux_series), d))
    write_csv(out / "summary.csv", ["eps", "dt", "n_steps", "l1_to_reference"], rows)
    print(json.dumps([dict(zip(["eps", "dt", "n_steps", "l1_to_reference"], r)) for r in rows],
                     indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="germsolver",
                                description="Scalar conservation laws with an interface coupling germ.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mesh=True):
        sp.add_argument("config", help="JSON configuration file")
        sp.add_argument("--out", help="output directory")
        if mesh:
            sp.add_argument("--dx", type=float)
            sp.add_argument("--t-end", type=float, dest="t_end")
            sp.add_argument("--snapshots", type=int, default=11,
                            help="number of time levels written to field.csv")

    common(sub.add_parser("simulate", help="run the finite-volume scheme"))
    sp = sub.add_parser("riemann", help="solve one interface Riemann problem")
    common(sp, mesh=False)
    sp.add_argument("--u-minus", type=float, dest="u_minus")
    sp.add_argument("--u-plus", type=float, dest="u_plus")
    sp.add_argument("--xi-max", type=float, default=2.0, dest="xi_max")
    sp.add_argument("--points", type=int, default=401)
    sp = sub.add_parser("germ", help="sample and analyse a germ")
    common(sp, mesh=False)
    sp.add_argument("--analyze", action="store_true")
    sp.add_argument("--resolution", type=int)
    sp = sub.add_parser("viscous", help="standing-wave profiles or the parabolic solver")
    common(sp)
    sp.add_argument("--mode", choices=["profile", "pde"], default="profile")
    sp.add_argument("--eps", type=float)
    sp = sub.add_parser("verify", help="residual checks on recorded fields")
    common(sp, mesh=False)
    sp.add_argument("--field", required=True, help="field CSV (t,x,u)")
    sp.add_argument("--field-b", dest="field_b", help="second field CSV on the same mesh")
    sp.add_argument("--resolution", type=int)
    sp.add_argument("--window", type=int, default=1)
    sp.add_argument("--informational", action="store_true")
    sp = sub.add_parser("sweep", help="viscosity sweep against the inviscid reference")
    common(sp)
    sp.add_argument("--eps", required=True, help="comma separated viscosities")
    sp.add_argument("--workers", type=int, default=1)
    return p


_COMMANDS = {
    "simulate": cmd_simulate,
    "riemann": cmd_riemann,
    "germ": cmd_germ,
    "viscous": cmd_viscous,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except GermSolverError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
