"""Command-line front end.

Exit codes: 0 success, 1 check or convergence failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import RunConfig, load_config
from .connection import connection_coefficients, horizontal_velocity
from .curvature import curvature, torsion
from .errors import ConfigError, ConvergenceError, FinslerError
from .frames import adapted_frame
from .geodesics import geodesic_bvp, integrate_geodesic, integrate_jacobi
from .metric import sample_point
from .tensors import jet, tensors_from_jet
from .verify import run_verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
COMMANDS = ("verify", "tensors", "frame", "connection", "curvature", "geodesic", "geodesic-bvp",
            "jacobi")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cfinsler", description="Complex Finsler geometry toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, metavar="PATH", help="TOML run configuration")
        s.add_argument("--seed", type=int, default=0, metavar="N")
        s.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--tol", type=float, metavar="X",
                       help="verify: homogeneity threshold; geodesic/jacobi: integrator rtol; "
                            "geodesic-bvp: endpoint tolerance")
        if name == "verify":
            s.add_argument("--timings", action="store_true",
                           help="include per-check wall time (output is then not reproducible)")
    return p


# helpers --------------------------------------------------------------------------


def _point(cfg: RunConfig, seed: int, key_z="z", key_v="v", section="point"):
    n = cfg.metric.dimension
    sec = cfg.section(section)
    if key_z in sec and key_v in sec:
        return (io.decode_vector(sec[key_z], n, f"[{section}] {key_z}"),
                io.decode_vector(sec[key_v], n, f"[{section}] {key_v}"))
    if key_z in sec or key_v in sec:
        raise ConfigError(f"[{section}] needs both {key_z!r} and {key_v!r}")
    return sample_point(cfg.metric, np.random.default_rng(seed))


def _tangent(sec: dict, name: str, n: int, default):
    if name not in sec:
        return default
    t = sec[name]
    if not isinstance(t, dict) or "dz" not in t:
        raise ConfigError(f"[vectors] {name} must be a table with 'dz' (and optional 'dv')")
    dz = io.decode_vector(t["dz"], n, f"[vectors] {name}.dz")
    dv = io.decode_vector(t["dv"], n, f"[vectors] {name}.dv") if "dv" in t else np.zeros(n, complex)
    return dz, dv


def _float(sec: dict, key: str, default: float, what: str) -> float:
    x = sec.get(key, default)
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{what} {key} must be a number")
    return float(x)


def _emit(args, payload: dict | None = None, header=None, rows=None):
    if args.format == "csv":
        if header is None:
            raise ConfigError(f"{args.command} has no CSV form here")
        text = io.dumps_csv(header, rows)
    else:
        text = io.dumps_json(payload)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# commands ---------------------------------------------------------------------------


def cmd_verify(cfg: RunConfig, args) -> int:
    sec = cfg.section("verify")
    samples = {k: int(v) for k, v in sec.items() if isinstance(v, int) and not isinstance(v, bool)}
    rep = run_verify(cfg.metric, args.seed, samples, args.tol)
    d = rep.to_dict(timings=args.timings)
    header = ["name", "status", "max_residual", "samples", "tol"] + (["elapsed"] if args.timings else [])
    rows = [[c[h] if h != "max_residual" else float(c[h]) for h in header] for c in d["checks"]]
    _emit(args, d, header, rows)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_tensors(cfg: RunConfig, args) -> int:
    z, v = _point(cfg, args.seed)
    mj = jet(cfg.metric, z, v, 4, fiber_only=True)
    vt = tensors_from_jet(mj)
    base = jet(cfg.metric, z, v, 1)
    blocks = {"g": vt.h_mixed.entries, "h_pure": vt.h_pure,
              **{f"H3_{b}": t for b, t in vt.H3.items()},
              **{f"H4_{b}": t for b, t in vt.H4.items()}}
    payload = {"metric": cfg.metric.name, "z": z, "v": v, "G": mj.value,
               "dG_dz": base.tensor("z"), "dG_dv": base.tensor("v"), "blocks": blocks,
               "bar_convention": "Hk_b has k-b unbarred then b barred fiber indices"}
    rows = [["G", "", mj.value, 0.0]]
    for name, t in blocks.items():
        rows += io.tensor_rows(name, t)
    _emit(args, payload, ["block", "index", "re", "im"], rows)
    return EXIT_OK


def cmd_frame(cfg: RunConfig, args) -> int:
    z, v = _point(cfg, args.seed)
    fr = adapted_frame(cfg.metric, z, v)
    E = fr.matrix
    rows = [[a] + io.complex_cells(E[:, a]) for a in range(E.shape[1])]
    header = ["alpha"] + io.complex_columns("e", E.shape[0])
    _emit(args, {"metric": cfg.metric.name, **fr.to_json()}, header, rows)
    return EXIT_OK


def cmd_connection(cfg: RunConfig, args) -> int:
    z, v = _point(cfg, args.seed)
    cc = connection_coefficients(cfg.metric, z, v)
    payload = {"metric": cfg.metric.name, "z": z, "v": v, "gamma": cc.gamma, "c": cc.c,
               "index_convention": "gamma[i][j][k] = Gamma^i_{j;k}"}
    rows = io.tensor_rows("gamma", cc.gamma) + io.tensor_rows("c", cc.c)
    _emit(args, payload, ["block", "index", "re", "im"], rows)
    return EXIT_OK


def cmd_curvature(cfg: RunConfig, args) -> int:
    n = cfg.metric.dimension
    z, v = _point(cfg, args.seed)
    e1 = np.zeros(n, dtype=complex)
    e1[0] = 1.0
    sec = cfg.section("vectors")
    X = _tangent(sec, "X", n, (e1, np.zeros(n, complex)))
    Y = _tangent(sec, "Y", n, (1j * e1, np.zeros(n, complex)))
    K = curvature(cfg.metric, (z, v), X, Y)
    T = torsion(cfg.metric, (z, v), X, Y)
    payload = {"metric": cfg.metric.name, "z": z, "v": v,
               "X": {"dz": X[0], "dv": X[1]}, "Y": {"dz": Y[0], "dv": Y[1]},
               "curvature": {"omega": K.omega_part, "pi": K.pi_part, "phi": K.phi_part,
                             "total": K.total},
               "torsion": {"total": T.total, "pure": T.pure_part, "finsler": T.finsler_part}}
    rows = []
    for name, t in (("omega", K.omega_part), ("pi", K.pi_part), ("phi", K.phi_part),
                    ("total", K.total), ("torsion", T.total), ("torsion_pure", T.pure_part),
                    ("torsion_finsler", T.finsler_part)):
        rows += io.tensor_rows(name, t)
    _emit(args, payload, ["block", "index", "re", "im"], rows)
    return EXIT_OK


def _trajectory(cfg, sol, extra_cols=(), extra=None):
    n = cfg.metric.dimension
    F0 = cfg.metric.F(sol.points[0], sol.velocities[0])
    header = (["t"] + io.complex_columns("z", n) + io.complex_columns("v", n)
              + ["speed", "speed_error"] + list(extra_cols))
    rows = []
    for i, t in enumerate(sol.times):
        F = cfg.metric.F(sol.points[i], sol.velocities[i])
        row = [float(t)] + io.complex_cells(sol.points[i]) + io.complex_cells(sol.velocities[i])
        row += [F, abs(F - F0)]
        if extra is not None:
            row += extra(i)
        rows.append(row)
    return header, rows


def _geodesic_payload(cfg, sol) -> dict:
    return {"metric": cfg.metric.name, "status": sol.status, "times": sol.times,
            "points": sol.points, "velocities": sol.velocities,
            "speed_drift": sol.speed_drift, "wk_residual": sol.wk_residual}


def _geodesic_settings(cfg, args, section):
    sec = cfg.section(section)
    z0, v0 = _point(cfg, args.seed, "z0", "v0", section)
    t_end = _float(sec, "t_end", 1.0, f"[{section}]")
    allow = bool(sec.get("allow_non_wk", False))
    tol = args.tol if args.tol is not None else _float(sec, "tol", 1e-9, f"[{section}]")
    return z0, v0, t_end, allow, tol


def cmd_geodesic(cfg: RunConfig, args) -> int:
    z0, v0, t_end, allow, tol = _geodesic_settings(cfg, args, "geodesic")
    sol = integrate_geodesic(cfg.metric, z0, v0, t_end, tol, allow_non_wk=allow)
    header, rows = _trajectory(cfg, sol)
    _emit(args, _geodesic_payload(cfg, sol), header, rows)
    return EXIT_OK if sol.complete else EXIT_FAIL


def cmd_geodesic_bvp(cfg: RunConfig, args) -> int:
    n = cfg.metric.dimension
    sec = cfg.section("bvp")
    if "z0" not in sec or "z1" not in sec:
        raise ConfigError("[bvp] needs 'z0' and 'z1'")
    z0 = io.decode_vector(sec["z0"], n, "[bvp] z0")
    z1 = io.decode_vector(sec["z1"], n, "[bvp] z1")
    tol = args.tol if args.tol is not None else _float(sec, "tol", 1e-8, "[bvp]")
    try:
        sol = geodesic_bvp(cfg.metric, z0, z1, tol, t_end=_float(sec, "t_end", 1.0, "[bvp]"),
                           seed=args.seed, allow_non_wk=bool(sec.get("allow_non_wk", False)))
    except ConvergenceError as exc:
        _emit(args, {"metric": cfg.metric.name, "status": "no convergence",
                     "best_residual": exc.best_residual}, ["status", "best_residual"],
              [["no convergence", exc.best_residual]])
        print(f"cfinsler: {exc}", file=sys.stderr)
        return EXIT_FAIL
    payload = _geodesic_payload(cfg, sol)
    payload.update(iterations=sol.iterations, endpoint_error=sol.endpoint_error)
    header, rows = _trajectory(cfg, sol)
    _emit(args, payload, header, rows)
    return EXIT_OK


def cmd_jacobi(cfg: RunConfig, args) -> int:
    n = cfg.metric.dimension
    z0, v0, t_end, allow, tol = _geodesic_settings(cfg, args, "jacobi")
    sec = cfg.section("jacobi")
    I0 = io.decode_vector(sec.get("I0", [0.0] * n), n, "[jacobi] I0")
    I0_dot = io.decode_vector(sec.get("I0_dot", [1.0] + [0.0] * (n - 1)), n, "[jacobi] I0_dot")
    sol = integrate_geodesic(cfg.metric, z0, v0, t_end, tol, allow_non_wk=allow)
    if not sol.complete:
        _emit(args, _geodesic_payload(cfg, sol), *_trajectory(cfg, sol))
        return EXIT_FAIL
    jac = integrate_jacobi(cfg.metric, sol, I0, I0_dot, rtol=tol)
    payload = _geodesic_payload(cfg, sol)
    payload.update(I=jac.I, I_dot=jac.I_dot, jacobi_residual=jac.residual)
    header, rows = _trajectory(
        cfg, sol, io.complex_columns("I", n) + io.complex_columns("DI", n),
        lambda i: io.complex_cells(jac.I[i]) + io.complex_cells(jac.I_dot[i]))
    _emit(args, payload, header, rows)
    return EXIT_OK


HANDLERS = {"verify": cmd_verify, "tensors": cmd_tensors, "frame": cmd_frame,
            "connection": cmd_connection, "curvature": cmd_curvature, "geodesic": cmd_geodesic,
            "geodesic-bvp": cmd_geodesic_bvp, "jacobi": cmd_jacobi}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return HANDLERS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"cfinsler: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FinslerError as exc:
        print(f"cfinsler: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
