"""Command line interface.

Exit codes: 0 success, 2 invalid input, 3 solver failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import fixtures, io
from .curvature import METHODS, WEIGHTED, curvature_field
from .errors import SolverError, ValidationError
from .goldberg import face_trace, gc_k0, gc_k0_surface
from .lattice import ChiralSpec, GCIndex, cnt_build, cnt_converge_sweep, gc_cnt
from .realization import harmonic_realize, solve_prescribed_h
from .variation import first_variation, normal_variation_series, richardson_check

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers 'a,b', got {text!r}") from None
    return a, b


def _reals(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated reals, got {text!r}") from None
    if len(vals) % 3:
        raise argparse.ArgumentTypeError("lattice needs a multiple of three components")
    return vals


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        io.write_text(path, text)


def _emit_bytes(data: bytes, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(data)


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _summary(field, label="") -> str:
    return (f"{label}vertices={len(field.mean)} H_min={field.mean.min():.12g} H_max={field.mean.max():.12g} "
            f"K_min={field.gauss.min():.12g} K_max={field.gauss.max():.12g}\n")


def cmd_gen(args) -> int:
    kind = args.kind
    extra = None
    if kind in ("cube", "dodeca", "c60"):
        name = {"cube": "hexahedron", "dodeca": "dodecahedron", "c60": "truncated_icosahedron"}[kind]
        surface = fixtures.polyhedron(name, args.radius)
    elif kind == "k4":
        surface = fixtures.k4_lattice()
    elif kind == "mackay":
        surface = fixtures.mackay_standard()
        extra = fixtures.mackay_constraints()
    elif kind == "mackay-min":
        surface = fixtures.mackay_minimal()
    else:
        if args.chiral is None:
            raise UsageError("gen cnt needs --chiral c1,c2")
        surface = cnt_build(ChiralSpec(args.lam, *args.chiral), args.rings)
    if args.k > 1:
        surface = gc_k0_surface(surface, args.k)
    _emit(io.serialize_tgf(surface), args.output)
    if args.constraints_out:
        if extra is None:
            raise UsageError("--constraints-out is only available for 'gen mackay'")
        io.write_text(args.constraints_out, io.serialize_constraints(extra))
    return EXIT_OK


def cmd_curv(args) -> int:
    surface = io.read_tgf(args.input)
    field = curvature_field(surface, args.method)
    sys.stdout.write(_summary(field))
    if args.csv:
        io.write_text(args.csv, io.curvature_csv(surface, field, args.tol))
    return EXIT_OK


def cmd_gc(args) -> int:
    surface = io.read_tgf(args.input)
    if args.l:
        raise ValidationError("GC with l > 0 is only available for hexagonal lattices and nanotubes "
                              "(use 'converge' or 'gen cnt')")
    if args.harmonic:
        graph = gc_k0(surface.graph, args.k)
        out = harmonic_realize(graph, None, surface.lattice)
    else:
        out = gc_k0_surface(surface, args.k)
    _emit(io.serialize_tgf(out), args.output)
    sys.stderr.write(f"vertices {surface.vertex_count} -> {out.vertex_count}\n")
    return EXIT_OK


def _lattice_for(surface, args):
    if args.lattice is None:
        return surface.lattice
    lat = np.array(args.lattice).reshape(-1, 3)
    if len(lat) != surface.graph.period_rank:
        raise ValidationError(f"{len(lat)} lattice vectors for period rank {surface.graph.period_rank}")
    return lat


def cmd_harmonic(args) -> int:
    surface = io.read_tgf(args.input)
    weights = io.parse_weights(_read_text(args.weights), surface.graph.edge_count) if args.weights else None
    out = harmonic_realize(surface.graph, weights, _lattice_for(surface, args))
    _emit(io.serialize_tgf(out), args.output)
    return EXIT_OK


def cmd_minimize(args) -> int:
    surface = io.read_tgf(args.input)
    cons = io.parse_constraints(_read_text(args.constraints)) if args.constraints else None
    out, info = solve_prescribed_h(surface, args.h, cons, return_info=True)
    sys.stderr.write(f"nullity={info.nullity} residual={info.residual:.3e} max_sine={info.max_sine:.3e}\n")
    _emit(io.serialize_tgf(out), args.output)
    return EXIT_OK


def cmd_variation(args) -> int:
    surface = io.read_tgf(args.input)
    field = curvature_field(surface)
    series = normal_variation_series(surface)
    rng = np.random.default_rng(args.seed)
    u = rng.standard_normal((surface.vertex_count, 3))
    rich = richardson_check(surface, u)
    lines = [f"area {series.total_area:.17g}",
             f"first_variation_normal {first_variation(surface, field.normal):.17g}",
             f"minus_2_sum_HA {-2 * np.sum(field.mean * field.area):.17g}",
             f"second_variation_normal {series.total_second:.17g}",
             "richardson_ratios " + " ".join(f"{r:.6g}" for r in rich.ratios)]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_converge(args) -> int:
    if args.chiral is None:
        raise UsageError("converge needs --chiral c1,c2")
    spec = ChiralSpec(args.lam, *args.chiral)
    scheme = [GCIndex(*args.scheme)] * args.steps
    rows = cnt_converge_sweep(spec, scheme, general=not args.closed_only, rings=args.rings)
    for row in rows:
        r = row["radius"]
        row["H_error"] = abs(row["H_closed"] + 1 / (2 * r)) * 2 * r
        row["K_ratio"] = row["K_closed"] / rows[0]["K_closed"] if rows[0]["K_closed"] else float("nan")
    text = io.rows_csv(rows)
    _emit(text, args.csv)
    return EXIT_OK


def cmd_export(args) -> int:
    surface = io.read_tgf(args.input)
    if not (args.ply or args.obj):
        raise UsageError("export needs --ply and/or --obj")
    if args.ply:
        _emit_bytes(io.export_ply(surface, curvature_field(surface), args.color), args.ply)
    if args.obj:
        _emit_bytes(io.export_obj(surface), args.obj)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="trivalent", description="Discrete surfaces of 3-valent graphs.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("gen", help="write a fixture as TGF")
    g.add_argument("kind", choices=["cube", "dodeca", "c60", "k4", "mackay", "mackay-min", "cnt"])
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--lambda", dest="lam", type=float, default=1.0)
    g.add_argument("--chiral", type=_pair)
    g.add_argument("--rings", type=int, default=1)
    g.add_argument("--k", type=int, default=1, help="apply GC_{k,0} with barycentric placement")
    g.add_argument("--constraints-out", help="write the Mackay symmetry constraints here")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("curv", help="vertex curvatures")
    c.add_argument("input")
    c.add_argument("--method", choices=METHODS, default=WEIGHTED)
    c.add_argument("--csv")
    c.add_argument("--tol", type=float, default=1e-10)
    c.set_defaults(func=cmd_curv)

    s = sub.add_parser("gc", help="Goldberg-Coxeter subdivision")
    s.add_argument("input")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--l", type=int, default=0)
    s.add_argument("--harmonic", action="store_true", help="re-realize harmonically with the input lattice")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gc)

    h = sub.add_parser("harmonic", help="harmonic realization")
    h.add_argument("input")
    h.add_argument("--lattice", type=_reals)
    h.add_argument("--weights")
    h.add_argument("-o", "--output")
    h.set_defaults(func=cmd_harmonic)

    m = sub.add_parser("minimize", help="solve the prescribed mean curvature equation")
    m.add_argument("input")
    m.add_argument("--constraints")
    m.add_argument("--h", type=float, default=0.0)
    m.add_argument("--tol", type=float, default=1e-10)
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_minimize)

    v = sub.add_parser("variation", help="area variation report")
    v.add_argument("input")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_variation)

    cv = sub.add_parser("converge", help="nanotube curvature under repeated subdivision")
    cv.add_argument("--chiral", type=_pair)
    cv.add_argument("--lambda", dest="lam", type=float, default=1.0)
    cv.add_argument("--scheme", type=_pair, default=(2, 0))
    cv.add_argument("--steps", type=int, default=6)
    cv.add_argument("--rings", type=int, default=1)
    cv.add_argument("--closed-only", action="store_true", help="skip the per-vertex computation")
    cv.add_argument("--csv")
    cv.set_defaults(func=cmd_converge)

    e = sub.add_parser("export", help="PLY/OBJ export")
    e.add_argument("input")
    e.add_argument("--ply")
    e.add_argument("--obj")
    e.add_argument("--color", choices=["H", "K"], default="H")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ValidationError as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID
    except SolverError as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return EXIT_SOLVER
    except OSError as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
