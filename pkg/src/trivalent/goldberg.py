"""Face tracing, dual triangulations and the Goldberg-Coxeter ``(k, 0)`` construction.

Faces are traced with the face on the left of each dart: the successor of a
dart ``d`` ending at ``y`` is the dart preceding ``reverse(d)`` in the
rotation at ``y``.  With counterclockwise rotations this walks each face
counterclockwise.

For a vertex ``x`` with rotation ``(e1, e2, e3)`` the dual triangle has
corners ``(F(e1), F(e2), F(e3))`` where ``F(e)`` is the face left of ``e``.
``gc_k0`` cuts every dual triangle into ``k**2`` triangles and takes the
dual again; new vertices are the small triangles.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonClosed
from .graph import DiscreteSurface, TrivalentGraph, build_surface


@dataclass(frozen=True)
class FaceStructure:
    """Faces of the rotation system, each a cyclic list of darts."""

    faces: list
    face_of_dart: np.ndarray
    vertex_count: int
    edge_count: int

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def euler_characteristic(self) -> int:
        return self.vertex_count - self.edge_count + self.face_count

    @property
    def genus(self) -> float:
        return (2 - self.euler_characteristic) / 2

    def census(self) -> Counter:
        """Number of faces of each size."""
        return Counter(len(f) for f in self.faces)


def face_successor(graph: TrivalentGraph, dart: int) -> int:
    return graph.next_in_rotation(graph.reverse(dart), -1)


def face_trace(graph: TrivalentGraph) -> FaceStructure:
    """Partition the darts into faces."""
    succ = np.empty(graph.dart_count, dtype=np.int64)
    pos = graph.rotation_position
    rev = np.arange(graph.dart_count) ^ 1
    succ[:] = graph.rotation[graph.origin[rev], (pos[rev] - 1) % 3]
    face_of = np.full(graph.dart_count, -1, dtype=np.int64)
    faces = []
    for start in range(graph.dart_count):
        if face_of[start] >= 0:
            continue
        cycle = []
        d = start
        while face_of[d] < 0:
            face_of[d] = len(faces)
            cycle.append(int(d))
            d = succ[d]
            if len(cycle) > graph.dart_count:
                raise NonClosed("face tracing did not close")
        if d != start:
            raise NonClosed(f"face starting at dart {start} does not close on itself")
        faces.append(cycle)
    return FaceStructure(faces, face_of, graph.vertex_count, graph.edge_count)


@dataclass(frozen=True)
class Triangulation:
    """The dual triangulation: one triangle of face ids per primal vertex."""

    triangles: np.ndarray
    face_count: int


def dualize(graph: TrivalentGraph, faces: FaceStructure | None = None) -> Triangulation:
    faces = faces or face_trace(graph)
    return Triangulation(faces.face_of_dart[graph.rotation], faces.face_count)


def _local_layout(k: int):
    """Local ids of the small triangles ``U(a, b)`` and ``D(a, b)``."""
    ids = {}
    for a in range(k):
        for b in range(k - a):
            ids["U", a, b] = len(ids)
    for a in range(k - 1):
        for b in range(k - 1 - a):
            ids["D", a, b] = len(ids)
    return ids


def _boundary_slot(k: int, side: int, s: int):
    """Small triangle and rotation slot that meet boundary segment ``s`` of ``side``.

    Side ``i`` is the dual edge crossing the ``i``-th rotation dart; segments
    are counted from the face right of that dart.
    """
    if side == 1:
        return ("U", s, 0), 0
    if side == 2:
        return ("U", k - 1 - s, s), 1
    return ("U", 0, k - 1 - s), 2


def _gc_neighbors(graph: TrivalentGraph, k: int):
    """Per new vertex, its three ``(vertex, slot, shift)`` neighbours in rotation order."""
    ids = _local_layout(k)
    per = len(ids)
    pos = graph.rotation_position
    zero = (0,) * graph.period_rank
    table: dict[tuple[int, int], tuple[int, int, tuple]] = {}

    def across(x, side, s):
        dart = int(graph.rotation[x, side])
        y, j = int(graph.terminus[dart]), int(pos[dart ^ 1])
        key, slot = _boundary_slot(k, j, k - 1 - s)
        return y * per + ids[key], slot, tuple(int(v) for v in graph.shift[dart])

    for x in range(graph.vertex_count):
        base = x * per
        for (kind, a, b), local in ids.items():
            v = base + local
            if kind == "U":
                table[v, 0] = across(x, 1, a) if b == 0 else (base + ids["D", a, b - 1], 1, zero)
                table[v, 1] = across(x, 2, b) if a + b == k - 1 else (base + ids["D", a, b], 2, zero)
                table[v, 2] = across(x, 0, k - 1 - b) if a == 0 else (base + ids["D", a - 1, b], 0, zero)
            else:
                table[v, 0] = (base + ids["U", a + 1, b], 2, zero)
                table[v, 1] = (base + ids["U", a, b + 1], 0, zero)
                table[v, 2] = (base + ids["U", a, b], 1, zero)
    return table, per, ids


def gc_k0(graph: TrivalentGraph, k: int) -> TrivalentGraph:
    """Goldberg-Coxeter ``GC_{k,0}`` of a closed 3-valent graph.

    New vertex ``x * k**2 + j`` is the ``j``-th small triangle inside the dual
    triangle of ``x``; it lives in the period cell of ``x``.
    """
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    face_trace(graph)
    table, per, _ = _gc_neighbors(graph, k)
    n = graph.vertex_count * per
    edges, rotation = [], np.empty((n, 3), dtype=np.int64)
    for (v, slot), (w, wslot, shift) in sorted(table.items()):
        if (v, slot) < (w, wslot):
            j = len(edges)
            edges.append((v, w, shift))
            rotation[v, slot] = 2 * j
            rotation[w, wslot] = 2 * j + 1
    return TrivalentGraph.from_edges(n, edges, rotation=rotation, period_rank=graph.period_rank)


def face_centroids_from(surface: DiscreteSurface, faces: FaceStructure) -> np.ndarray:
    """For every dart ``d``, centroid of its left face relative to ``Phi(o(d))``."""
    g = surface.graph
    vec = surface.edge_vectors
    out = np.empty((g.dart_count, 3))
    for cycle in faces.faces:
        steps = vec[cycle]
        pts = np.vstack([np.zeros(3), np.cumsum(steps, axis=0)[:-1]])
        for i, d in enumerate(cycle):
            out[d] = pts.mean(axis=0) - pts[i]
    return out


def gc_k0_surface(surface: DiscreteSurface, k: int,
                  project: Callable[[np.ndarray], np.ndarray] | None = None) -> DiscreteSurface:
    """``GC_{k,0}`` with barycentric placement of the new vertices.

    Each new vertex is put at the centroid of its small triangle, whose
    corners interpolate the centroids of the three faces around ``x``.
    ``project`` may post-process positions (e.g. radial projection onto a sphere).
    """
    graph = surface.graph
    faces = face_trace(graph)
    new_graph = gc_k0(graph, k)
    ids = _local_layout(k)
    cent = face_centroids_from(surface, faces)
    corners = cent[graph.rotation] + surface.positions[:, None, :]
    frac = np.empty((len(ids), 2))
    for (kind, a, b), j in ids.items():
        off = 1 / 3 if kind == "U" else 2 / 3
        frac[j] = ((a + off) / k, (b + off) / k)
    c0, c1, c2 = corners[:, 0], corners[:, 1], corners[:, 2]
    pos = (c0[:, None, :] + frac[None, :, :1] * (c1 - c0)[:, None, :]
           + frac[None, :, 1:] * (c2 - c0)[:, None, :]).reshape(-1, 3)
    if project is not None:
        pos = project(pos)
    return build_surface(new_graph, pos, surface.lattice)


def _dart_invariant(graph: TrivalentGraph, faces: FaceStructure) -> np.ndarray:
    size = np.array([len(f) for f in faces.faces])[faces.face_of_dart]
    return size * (graph.dart_count + 1) + size[np.arange(graph.dart_count) ^ 1]


def _rooted_code(graph: TrivalentGraph, root: int) -> tuple:
    sigma = graph.rotation[graph.origin, (graph.rotation_position + 1) % 3]
    label = {root: 0}
    order = [root]
    i = 0
    while i < len(order):
        d = order[i]
        for e in (int(sigma[d]), d ^ 1):
            if e not in label:
                label[e] = len(order)
                order.append(e)
        i += 1
    if len(order) != graph.dart_count:
        raise ValueError("graph is disconnected")
    return tuple(v for d in order for v in (label[int(sigma[d])], label[d ^ 1]))


def canonical_form(graph: TrivalentGraph) -> tuple:
    """Canonical code of the oriented map (rotation system), ignoring shifts."""
    faces = face_trace(graph)
    inv = _dart_invariant(graph, faces)
    roots = np.flatnonzero(inv == inv.min())
    return (int(inv.min()),) + min(_rooted_code(graph, int(r)) for r in roots)


def maps_isomorphic(g1: TrivalentGraph, g2: TrivalentGraph) -> bool:
    """Isomorphism of rotation systems, allowing a global orientation reversal."""
    if (g1.vertex_count, g1.edge_count) != (g2.vertex_count, g2.edge_count):
        return False
    c1 = canonical_form(g1)
    return c1 == canonical_form(g2) or c1 == canonical_form(g2.flipped(range(g2.vertex_count)))


def gc_compose_check(graph: TrivalentGraph, k1: int, k2: int) -> bool:
    """Whether ``GC_{k2,0}(GC_{k1,0}(X))`` and ``GC_{k1 k2,0}(X)`` are isomorphic."""
    return maps_isomorphic(gc_k0(gc_k0(graph, k1), k2), gc_k0(graph, k1 * k2))
