"""Canonical fixtures: sphere-inscribed polyhedra, the K4 lattice and the Mackay crystal."""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations, product

import numpy as np
from scipy.spatial import cKDTree

from .errors import SingularSystem, ValidationError
from .graph import (DiscreteSurface, TrivalentGraph, build_surface, orient_along, orient_consistently,
                    star_moment)

PHI = (1 + 5 ** 0.5) / 2
POLYHEDRA = ("hexahedron", "dodecahedron", "truncated_icosahedron")


def _even_permutations(p):
    return {(p[0], p[1], p[2]), (p[1], p[2], p[0]), (p[2], p[0], p[1])}


def _signed(points):
    out = set()
    for p in points:
        for signs in product((1, -1), repeat=3):
            out.add(tuple(s * c for s, c in zip(signs, p)))
    return out


def _polyhedron_points(name: str) -> np.ndarray:
    if name == "hexahedron":
        pts = _signed([(1, 1, 1)])
    elif name == "dodecahedron":
        pts = _signed([(1, 1, 1)])
        for q in _even_permutations((0, 1 / PHI, PHI)):
            pts |= _signed([q])
    elif name == "truncated_icosahedron":
        pts = set()
        for base in ((0, 1, 3 * PHI), (1, 2 + PHI, 2 * PHI), (PHI, 2, 2 * PHI + 1)):
            for q in _even_permutations(base):
                pts |= _signed([q])
    else:
        raise ValidationError(f"unknown polyhedron {name!r}")
    return np.array(sorted(pts), dtype=float)


def graph_from_points(points: np.ndarray) -> TrivalentGraph:
    """Nearest-neighbour graph of a vertex-transitive point set, oriented outward."""
    tree = cKDTree(points)
    dist, _ = tree.query(points, k=2)
    length = dist[:, 1].min()
    pairs = sorted(tree.query_pairs(length * (1 + 1e-9)))
    graph = TrivalentGraph.from_edges(len(points), pairs)
    return orient_along(graph, points, (), points)


def polyhedron(name: str, r: float = 1.0) -> DiscreteSurface:
    """Regular hexahedron, dodecahedron or truncated icosahedron of circumradius ``r``.

    Rotations are counterclockwise seen from outside, so normals point outward
    and every vertex satisfies ``Phi(x) = r n(x)``.
    """
    if r <= 0:
        raise ValidationError("radius must be positive")
    pts = _polyhedron_points(name)
    pts = pts * (r / np.linalg.norm(pts, axis=1))[:, None]
    return build_surface(graph_from_points(pts), pts)


def k4_lattice(weights=None) -> DiscreteSurface:
    """Standard realization of the maximal abelian cover of K4 (rank 3).

    The tree is the star at vertex 0; the other three edges carry unit
    shifts.  Lattice vectors are the fundamental cycles written in an
    orthonormal basis of the cycle space, which makes the harmonic
    realization the standard one.
    """
    from .realization import harmonic_realize

    edges = [(0, 1, (0, 0, 0)), (0, 2, (0, 0, 0)), (0, 3, (0, 0, 0)),
             (1, 2, (1, 0, 0)), (2, 3, (0, 1, 0)), (3, 1, (0, 0, 1))]
    cycles = np.zeros((3, 6))
    for j, (a, b, _) in enumerate(edges[3:]):
        cycles[j, 3 + j] = 1.0
        cycles[j, b - 1] -= 1.0
        cycles[j, a - 1] += 1.0
    basis = np.linalg.qr(cycles.T)[0]
    lattice = cycles @ basis
    graph = TrivalentGraph.from_edges(4, edges)
    surface = harmonic_realize(graph, weights, lattice)
    return build_surface(_uniform_orientation(graph, surface.positions, lattice), surface.positions, lattice)


def _uniform_orientation(graph, positions, lattice):
    """Flips making the inner product of adjacent normals the same on every edge.

    Adjacent normals of this net cannot all agree in sign, so the
    orientation is chosen to respect the symmetry instead.
    """
    best, best_spread = graph, np.inf
    for flips in product((0, 1), repeat=graph.vertex_count - 1):
        g = graph.flipped([i + 1 for i, f in enumerate(flips) if f])
        m = star_moment(DiscreteSurface(g, positions, lattice).stars)
        n = m / np.linalg.norm(m, axis=1)[:, None]
        dots = np.einsum("ij,ij->i", n[g.origin], n[g.terminus])
        spread = np.ptp(dots) - 1e-9 * dots.mean()
        if spread < best_spread - 1e-12:
            best, best_spread = g, spread
    return best


_MACKAY_GENERATORS = {
    "Rxy": ((0, 1, 0), (1, 0, 0), (0, 0, 1)), "L": ((0, 0, -1), (0, -1, 0), (-1, 0, 0)),
    "Rz1": ((1, 0, 0), (0, 1, 0), (0, 0, -1)),
}
_MACKAY_OFFSETS = {"Rxy": (0, 0, 0), "L": (1, 1, 1), "Rz1": (0, 0, 2)}


def _apply(g, p):
    M, t = g
    return tuple(sum(M[i][j] * p[j] for j in range(3)) + t[i] for i in range(3))


def _compose(g, h):
    M = g[0]
    MN = tuple(tuple(sum(M[i][k] * h[0][k][j] for k in range(3)) for j in range(3)) for i in range(3))
    return MN, tuple(v % 2 for v in _apply(g, h[1]))


def _mackay_seed():
    """Solve the three harmonic equations of the fundamental patch exactly."""
    Rxy, L, Rz = (np.array(_MACKAY_GENERATORS[k], float) for k in ("Rxy", "L", "Rz1"))
    tL, tz = np.array(_MACKAY_OFFSETS["L"], float), np.array(_MACKAY_OFFSETS["Rz1"], float)
    A = np.zeros((9, 9))
    b = np.zeros(9)
    blk = lambda i: slice(3 * i, 3 * i + 3)
    A[blk(0), blk(1)] += np.eye(3)
    A[blk(0), blk(0)] += Rxy @ L + L - 3 * np.eye(3)
    b[blk(0)] -= Rxy @ tL + tL
    A[blk(1), blk(0)] += np.eye(3)
    A[blk(1), blk(2)] += np.eye(3) + Rxy
    A[blk(1), blk(1)] -= 3 * np.eye(3)
    A[blk(2), blk(1)] += np.eye(3)
    A[blk(2), blk(2)] += L + Rz - 3 * np.eye(3)
    b[blk(2)] -= tL + tz
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    exact = [Fraction(v).limit_denominator(10 ** 6) for v in sol]
    res = [sum(Fraction(A[i, j]).limit_denominator(10) * exact[j] for j in range(9)) - Fraction(b[i])
           for i in range(9)]
    if any(res):
        raise SingularSystem("seed system has no rational solution")
    return [tuple(exact[3 * i:3 * i + 3]) for i in range(3)]


_MACKAY_CACHE: dict = {}


def mackay_data():
    """Graph, exact positions, seed ids and symmetry labels of the Mackay crystal.

    Vertices are the orbit of the three seed vertices under the group
    generated by ``Rxy``, ``L`` and ``Rz1`` taken modulo ``2 Z^3``.  Returns a
    dict with keys ``graph``, ``positions`` (lattice ``2 I``), ``seeds`` and
    ``labels`` (per vertex: seed index and affine map ``(M, t)`` carrying
    the seed onto it).
    """
    if _MACKAY_CACHE:
        return _MACKAY_CACHE
    gens = [(_MACKAY_GENERATORS[k], tuple(Fraction(v) for v in _MACKAY_OFFSETS[k])) for k in ("Rxy", "L", "Rz1")]
    ident = (((1, 0, 0), (0, 1, 0), (0, 0, 1)), (Fraction(0),) * 3)
    group, frontier = {ident}, [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for h in gens:
                c = _compose(h, g)
                if c not in group:
                    group.add(c)
                    nxt.append(c)
        frontier = nxt
    group = sorted(group)
    seeds = _mackay_seed()
    mod = lambda p: tuple(v % 2 for v in p)
    index, labels, points = {}, [], []
    for i, p in enumerate(seeds):
        for g in group:
            q = mod(_apply(g, p))
            if q not in index:
                index[q] = len(points)
                points.append(q)
                labels.append((i, g))
    Rxy, L, Rz = gens
    x0, x1, x2 = seeds
    stencil = [(x0, x1), (x0, _apply(L, x0)), (x0, _apply(Rxy, _apply(L, x0))), (x1, x2), (x1, _apply(Rxy, x2)),
               (x2, _apply(L, x2)), (x2, _apply(Rz, x2))]
    records = set()
    for g in group:
        for p, q in stencil:
            a, b = _apply(g, p), _apply(g, q)
            cell = tuple((u // 2) for u in a)
            rel = tuple(v - 2 * c for v, c in zip(b, cell))
            ia, ib = index[mod(a)], index[mod(rel)]
            shift = tuple(int((v - w) // 2) for v, w in zip(rel, mod(rel)))
            rec = (ia, ib, shift) if (ia, ib) < (ib, ia) or (ia == ib and shift > tuple(-s for s in shift)) \
                else (ib, ia, tuple(-s for s in shift))
            records.add(rec)
    graph = TrivalentGraph.from_edges(len(points), sorted(records), period_rank=3)
    positions = np.array([[float(v) for v in p] for p in points])
    lattice = 2.0 * np.eye(3)
    graph = orient_consistently(graph, positions, lattice)
    _MACKAY_CACHE.update(graph=graph, positions=positions, seeds=tuple(index[mod(p)] for p in seeds),
                         labels=labels, group=group)
    return _MACKAY_CACHE


def mackay_standard() -> DiscreteSurface:
    """Standard realization of the classical Mackay crystal with lattice ``2 I``.

    It is the unique harmonic realization with unit weights; the result is
    checked against the symmetric closed-form solution.
    """
    from .goldberg import face_trace
    from .realization import harmonic_realize

    data = mackay_data()
    lattice = 2.0 * np.eye(3)
    surface = harmonic_realize(data["graph"], None, lattice, gauge=_first_vertex_gauge(data))
    if np.abs(surface.positions - data["positions"]).max() > 1e-12:
        raise SingularSystem("harmonic realization disagrees with the symmetric solution")
    census = face_trace(data["graph"]).census()
    if set(census) != {6, 8}:
        raise ValidationError(f"unexpected face sizes {dict(census)}")
    return build_surface(data["graph"], data["positions"], lattice)


def _first_vertex_gauge(data):
    from .realization import FixVertex

    return FixVertex(0, tuple(data["positions"][0]))


def mackay_constraints(data=None):
    """Symmetry ties reducing the Mackay unknowns to the fundamental patch.

    Every vertex is tied to its seed by the affine map of the labelled group
    element (offset read from the reference cell representatives); the first
    two seeds are fixed by ``Rxy``.
    """
    from .realization import SymmetryConstraint

    data = data or mackay_data()
    seeds = data["seeds"]
    pos = data["positions"]
    cons = SymmetryConstraint()
    for v, (i, (M, _)) in enumerate(data["labels"]):
        if v in seeds:
            continue
        M = np.array(M, float)
        cons.tie(v, seeds[i], M, pos[v] - M @ pos[seeds[i]])
    rxy = np.array(_MACKAY_GENERATORS["Rxy"], float)
    cons.fix(seeds[0], rxy)
    cons.fix(seeds[1], rxy)
    return cons


def mackay_minimal(return_info: bool = False):
    """Discrete minimal Mackay crystal solving the prescribed ``H = 0`` equation.

    Normals and tangent planes come from :func:`mackay_standard`.
    """
    from .realization import solve_prescribed_h

    return solve_prescribed_h(mackay_standard(), 0.0, mackay_constraints(), return_info=return_info)


def mackay_gc_table(k_list=(1, 2, 3, 4, 5)) -> list[dict]:
    """Curvature and edge-length statistics of ``GC_{k,0}`` Mackay crystals.

    Each subdivision is realized harmonically with unit weights and the unit
    lattice.  ``K_least`` is the curvature of smallest magnitude (all
    vertices have ``K < 0``); ``max_edge_on_octagon`` tells whether a longest
    edge borders an 8-ring.
    """
    from .curvature import curvature_field
    from .goldberg import face_trace, gc_k0
    from .realization import harmonic_realize

    graph = mackay_data()["graph"]
    rows = []
    for k in k_list:
        g = gc_k0(graph, int(k))
        surface = harmonic_realize(g, None, np.eye(3))
        field = curvature_field(surface)
        lengths = surface.edge_lengths()
        faces = face_trace(g)
        sizes = np.array([len(f) for f in faces.faces])[faces.face_of_dart]
        longest = np.flatnonzero(lengths >= lengths.max() * (1 - 1e-9))
        on_oct = bool(np.any((sizes[2 * longest] == 8) | (sizes[2 * longest + 1] == 8)))
        H, K = field.mean, field.gauss
        rows.append(dict(k=int(k), vertices=g.vertex_count, H_mean=float(H.mean()),
                         H_abs_min=float(np.abs(H).min()), H_abs_max=float(np.abs(H).max()),
                         K_min=float(K.min()), K_max=float(K.max()),
                         K_least=float(K[np.argmin(np.abs(K))]), length_min=float(lengths.min()),
                         length_max=float(lengths.max()), ratio=float(lengths.max() / lengths.min()),
                         max_edge_on_octagon=on_oct))
    return rows
