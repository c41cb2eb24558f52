"""Text formats: TGF surfaces, curvature CSV, PLY and OBJ exports, constraint files.

TGF is line oriented; ``#`` starts a comment::

    tgf 1
    period_rank 2
    lattice 1.0 0.0 0.0
    lattice 0.0 1.0 0.0
    v 0 0.0 0.0 0.0
    e 0 0 1 0 0
    r 0 0+ 1+ 2-

``e id a b s...`` is an edge record with its shift, ``r x d d d`` the
rotation at ``x`` where ``j+`` is edge ``j`` leaving ``a`` and ``j-`` the
reverse direction.  Reals use 17 significant digits so files round-trip.
"""

from __future__ import annotations

import csv
import io as _io

import numpy as np

from .curvature import CurvatureField, curvature_field
from .errors import ParseError, TrivalentError, ValidationError
from .goldberg import face_trace
from .graph import DiscreteSurface, TrivalentGraph, build_surface
from .realization import SymmetryConstraint

VERSION = 1


def _real(x: float) -> str:
    return format(float(x), ".17g")


def _dart_token(d: int) -> str:
    return f"{d >> 1}{'+' if d % 2 == 0 else '-'}"


def serialize_tgf(surface: DiscreteSurface) -> str:
    g = surface.graph
    out = [f"tgf {VERSION}", f"period_rank {g.period_rank}"]
    out += ["lattice " + " ".join(_real(v) for v in row) for row in surface.lattice]
    out += [f"v {i} " + " ".join(_real(v) for v in p) for i, p in enumerate(surface.positions)]
    for j, (a, b, s) in enumerate(g.edge_records()):
        out.append(" ".join(["e", str(j), str(a), str(b)] + [str(v) for v in s]))
    out += [f"r {x} " + " ".join(_dart_token(int(d)) for d in g.rotation[x]) for x in range(g.vertex_count)]
    return "\n".join(out) + "\n"


def _number(tok, line, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise ParseError(line, f"bad number {tok!r}") from None


def parse_tgf(text: str, *, check_injective: bool = True) -> DiscreteSurface:
    """Parse a TGF document into a validated surface."""
    version = rank = None
    lattice, verts, edges, rots = [], {}, {}, {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        key, args = line[0], line[1:]
        if key == "tgf":
            if len(args) != 1 or _number(args[0], no, int) != VERSION:
                raise ParseError(no, "unsupported version")
            version = VERSION
        elif version is None:
            raise ParseError(no, "missing 'tgf' header")
        elif key == "period_rank":
            if len(args) != 1:
                raise ParseError(no, "period_rank takes one integer")
            rank = _number(args[0], no, int)
        elif key == "lattice":
            if len(args) != 3:
                raise ParseError(no, "lattice row needs three reals")
            lattice.append([_number(a, no) for a in args])
        elif key == "v":
            if len(args) != 4:
                raise ParseError(no, "vertex record is 'v id x y z'")
            vid = _number(args[0], no, int)
            if vid in verts:
                raise ParseError(no, f"duplicate vertex {vid}")
            verts[vid] = [_number(a, no) for a in args[1:]]
        elif key == "e":
            if rank is None:
                raise ParseError(no, "edge before period_rank")
            if len(args) != 3 + rank:
                raise ParseError(no, f"edge record needs {3 + rank} fields")
            eid = _number(args[0], no, int)
            if eid in edges:
                raise ParseError(no, f"duplicate edge {eid}")
            edges[eid] = (_number(args[1], no, int), _number(args[2], no, int),
                          tuple(_number(a, no, int) for a in args[3:]))
        elif key == "r":
            if len(args) != 4:
                raise ParseError(no, "rotation record is 'r vertex d d d'")
            darts = []
            for tok in args[1:]:
                if len(tok) < 2 or tok[-1] not in "+-":
                    raise ParseError(no, f"bad dart {tok!r}")
                j = _number(tok[:-1], no, int)
                darts.append(2 * j + (tok[-1] == "-"))
            rots[_number(args[0], no, int)] = (darts, no)
        else:
            raise ParseError(no, f"unknown record {key!r}")
    last = len(text.splitlines())
    if version is None:
        raise ParseError(max(last, 1), "empty document")
    if rank is None:
        raise ParseError(last, "missing period_rank")
    if not verts:
        raise ParseError(last, "no vertices")
    if sorted(verts) != list(range(len(verts))):
        raise ParseError(last, "vertex ids must be 0..V-1")
    if sorted(edges) != list(range(len(edges))):
        raise ParseError(last, "edge ids must be 0..E-1")
    if len(lattice) != rank:
        raise ParseError(last, f"{len(lattice)} lattice rows for period rank {rank}")
    n = len(verts)
    rotation = None
    if rots:
        if sorted(rots) != list(range(n)):
            raise ParseError(last, "rotation records must cover every vertex once")
        for darts, no in rots.values():
            if any(d >> 1 not in edges for d in darts):
                raise ParseError(no, "rotation references a missing edge")
        rotation = [rots[x][0] for x in range(n)]
    graph = TrivalentGraph.from_edges(n, [edges[j] for j in range(len(edges))], rotation=rotation,
                                      period_rank=rank)
    positions = np.array([verts[i] for i in range(n)])
    return build_surface(graph, positions, np.array(lattice).reshape(-1, 3), check_injective=check_injective)


def read_tgf(path) -> DiscreteSurface:
    with open(path, encoding="utf-8") as fh:
        return parse_tgf(fh.read())


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


CSV_COLUMNS = ("vertex_id", "x", "y", "z", "A", "H", "K", "minimal_flag")


def curvature_csv(surface: DiscreteSurface, field: CurvatureField | None = None, tol: float = 1e-10) -> str:
    field = field or curvature_field(surface)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for i, p in enumerate(surface.positions):
        w.writerow([i, *(_real(v) for v in p), _real(field.area[i]), _real(field.mean[i]),
                    _real(field.gauss[i]), int(abs(field.mean[i]) <= tol)])
    return buf.getvalue()


def rows_csv(rows: list[dict], columns=None) -> str:
    columns = list(columns or rows[0].keys()) if rows else list(columns or [])
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_real(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
    return buf.getvalue()


def diverging_colors(values) -> np.ndarray:
    """RGB bytes: blue for the most negative value, white for zero, red for the most positive."""
    values = np.asarray(values, dtype=float)
    top = np.abs(values).max() if len(values) else 0.0
    s = values / top if top > 0 else np.zeros_like(values)
    rgb = np.ones((len(values), 3))
    neg, pos = s < 0, s > 0
    rgb[neg, 0] = rgb[neg, 1] = 1 + s[neg]
    rgb[pos, 1] = rgb[pos, 2] = 1 - s[pos]
    return np.rint(255 * rgb).astype(int)


def _unwrapped_faces(surface: DiscreteSurface):
    """Face polygons over cell vertices plus extra copies for faces crossing the cell boundary.

    Returns ``(points, source, faces)`` where ``source[i]`` is the cell vertex
    a point copies.
    """
    g = surface.graph
    points = [p for p in surface.positions]
    source = list(range(g.vertex_count))
    copies: dict = {}
    faces = []
    zero = (0,) * g.period_rank
    for cycle in face_trace(g).faces:
        shift = np.zeros(g.period_rank, dtype=np.int64)
        poly = []
        for d in cycle:
            x = int(g.origin[d])
            key = (x, tuple(int(v) for v in shift))
            if key[1] == zero:
                poly.append(x)
            else:
                if key not in copies:
                    copies[key] = len(points)
                    points.append(surface.positions[x] + shift @ surface.lattice)
                    source.append(x)
                poly.append(copies[key])
            shift = shift + g.shift[d]
        faces.append(poly)
    return np.array(points), np.array(source), faces


def export_ply(surface: DiscreteSurface, field: CurvatureField | None = None, color_by: str = "H") -> bytes:
    """ASCII PLY with per-vertex ``H``, ``K`` and a diverging color of ``H`` or ``K``."""
    field = field or curvature_field(surface)
    if len(field.mean) != surface.vertex_count:
        raise ValidationError("curvature report does not match the surface")
    if color_by not in ("H", "K"):
        raise ValidationError("color_by must be 'H' or 'K'")
    points, source, faces = _unwrapped_faces(surface)
    H, K = field.mean[source], field.gauss[source]
    rgb = diverging_colors(H if color_by == "H" else K)
    head = ["ply", "format ascii 1.0", f"element vertex {len(points)}",
            "property float x", "property float y", "property float z",
            "property float H", "property float K",
            "property uchar red", "property uchar green", "property uchar blue",
            f"element face {len(faces)}", "property list uchar int vertex_indices", "end_header"]
    body = [" ".join([*(_real(v) for v in p), _real(h), _real(k), *(str(c) for c in col)])
            for p, h, k, col in zip(points, H, K, rgb)]
    body += [" ".join([str(len(f)), *(str(v) for v in f)]) for f in faces]
    return ("\n".join(head + body) + "\n").encode("ascii")


def export_obj(surface: DiscreteSurface) -> bytes:
    points, _, faces = _unwrapped_faces(surface)
    lines = ["v " + " ".join(_real(v) for v in p) for p in points]
    lines += ["f " + " ".join(str(v + 1) for v in f) for f in faces]
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_weights(text: str, edge_count: int) -> np.ndarray:
    """One ``edge_id weight`` pair per line."""
    w = np.full(edge_count, np.nan)
    for no, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        if len(parts) != 2:
            raise ParseError(no, "weight line is 'edge_id weight'")
        j = _number(parts[0], no, int)
        if not 0 <= j < edge_count:
            raise ParseError(no, f"edge {j} does not exist")
        w[j] = _number(parts[1], no)
    if np.isnan(w).any():
        raise ParseError(max(len(text.splitlines()), 1), "missing weights for some edges")
    return w


def serialize_constraints(constraints: SymmetryConstraint) -> str:
    """``tie target source M(9) offset(3)`` and ``fix vertex M(9) offset(3)`` lines."""
    out = []
    for row in constraints.rows:
        nums = " ".join(_real(v) for v in [*np.ravel(row.matrix), *row.offset])
        out.append(f"fix {row.target} {nums}" if row.is_fixed_point else f"tie {row.target} {row.source} {nums}")
    return "\n".join(out) + "\n"


def parse_constraints(text: str) -> SymmetryConstraint:
    cons = SymmetryConstraint()
    for no, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        kind = parts[0]
        need = {"tie": 15, "fix": 14}.get(kind)
        if need is None:
            raise ParseError(no, f"unknown constraint {kind!r}")
        if len(parts) != need:
            raise ParseError(no, f"{kind} line needs {need - 1} fields")
        ints = [_number(p, no, int) for p in parts[1:need - 12]]
        nums = np.array([_number(p, no) for p in parts[need - 12:]])
        M, off = nums[:9].reshape(3, 3), nums[9:]
        if kind == "tie":
            cons.tie(ints[0], ints[1], M, off)
        else:
            cons.fix(ints[0], M, off)
    return cons


__all__ = ["serialize_tgf", "parse_tgf", "read_tgf", "curvature_csv", "rows_csv", "export_ply", "export_obj",
           "diverging_colors", "parse_weights", "parse_constraints", "serialize_constraints", "TrivalentError"]
