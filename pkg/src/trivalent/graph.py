"""Combinatorial and embedded 3-valent graphs.

A :class:`TrivalentGraph` stores oriented edges ("darts") in pairs: dart
``2j`` runs along edge record ``j`` from ``a`` to ``b`` with shift ``s`` and
dart ``2j+1`` is its reverse with shift ``-s``.  Shifts are integer vectors
of length ``period_rank``; a shift ``s`` means the terminus lives in the cell
translated by ``lattice.T @ s``.

The rotation system lists, for every vertex, its three outgoing darts in
cyclic order.  That order fixes the sign of the vertex normal.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import BadRotation, DegenerateVertex, NonInjective, NonTrivalent, ValidationError

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TrivalentGraph:
    """3-valent graph with rotation system and optional periodicity labels."""

    vertex_count: int
    origin: np.ndarray
    terminus: np.ndarray
    shift: np.ndarray
    rotation: np.ndarray
    period_rank: int = 0

    def __post_init__(self):
        n_darts = len(self.origin)
        if n_darts % 2 or len(self.terminus) != n_darts or self.shift.shape != (n_darts, self.period_rank):
            raise ValidationError("dart arrays have inconsistent shapes")
        if self.period_rank not in (0, 1, 2, 3):
            raise ValidationError(f"period rank {self.period_rank} not in 0..3")
        rev = np.arange(n_darts) ^ 1
        if (np.any(self.origin[rev] != self.terminus) or np.any(self.shift[rev] != -self.shift)):
            raise ValidationError("reverse darts are inconsistent")
        degree = np.bincount(self.origin, minlength=self.vertex_count)
        if self.vertex_count == 0:
            raise ValidationError("graph has no vertices")
        for x in np.flatnonzero(degree != 3):
            raise NonTrivalent(int(x), int(degree[x]))
        if self.rotation.shape != (self.vertex_count, 3):
            raise BadRotation(0, "rotation table must have shape (V, 3)")
        for x in range(self.vertex_count):
            darts = self.rotation[x]
            if len(set(darts.tolist())) != 3 or np.any(self.origin[darts] != x):
                raise BadRotation(x)

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[Sequence], rotation=None,
                   period_rank: int | None = None) -> "TrivalentGraph":
        """Build from edge records ``(a, b)`` or ``(a, b, shift)``.

        ``rotation`` is a per-vertex triple of dart ids; by default darts are
        taken in order of appearance.
        """
        edges = list(edges)
        if period_rank is None:
            period_rank = len(edges[0][2]) if edges and len(edges[0]) > 2 else 0
        n = len(edges)
        origin = np.empty(2 * n, dtype=np.int64)
        terminus = np.empty(2 * n, dtype=np.int64)
        shift = np.zeros((2 * n, period_rank), dtype=np.int64)
        for j, rec in enumerate(edges):
            a, b = int(rec[0]), int(rec[1])
            s = np.asarray(rec[2] if len(rec) > 2 else (), dtype=np.int64).reshape(-1)
            if len(s) != period_rank:
                raise ValidationError(f"edge {j} has shift of length {len(s)}, expected {period_rank}")
            if not (0 <= a < vertex_count and 0 <= b < vertex_count):
                raise ValidationError(f"edge {j} references a missing vertex")
            if a == b and not s.any():
                raise ValidationError(f"edge {j} is a loop with zero shift")
            origin[2 * j], terminus[2 * j] = a, b
            origin[2 * j + 1], terminus[2 * j + 1] = b, a
            shift[2 * j], shift[2 * j + 1] = s, -s
        if rotation is None:
            out = [[] for _ in range(vertex_count)]
            for d, x in enumerate(origin):
                out[x].append(d)
            for x, darts in enumerate(out):
                if len(darts) != 3:
                    raise NonTrivalent(x, len(darts))
            rotation = out
        rotation = np.asarray(rotation, dtype=np.int64).reshape(vertex_count, 3) if vertex_count else \
            np.zeros((0, 3), dtype=np.int64)
        return cls(vertex_count, origin, terminus, shift, rotation, period_rank)

    @property
    def dart_count(self) -> int:
        return len(self.origin)

    @property
    def edge_count(self) -> int:
        return len(self.origin) // 2

    @staticmethod
    def reverse(dart: int) -> int:
        return dart ^ 1

    def edge_records(self) -> list[tuple[int, int, tuple[int, ...]]]:
        return [(int(self.origin[d]), int(self.terminus[d]), tuple(int(v) for v in self.shift[d]))
                for d in range(0, self.dart_count, 2)]

    def neighbors(self, x: int) -> np.ndarray:
        return self.terminus[self.rotation[x]]

    @cached_property
    def rotation_position(self) -> np.ndarray:
        """Index of each dart inside its origin's rotation triple."""
        pos = np.empty(self.dart_count, dtype=np.int64)
        for k in range(3):
            pos[self.rotation[:, k]] = k
        return pos

    def next_in_rotation(self, dart: int, step: int = 1) -> int:
        x = self.origin[dart]
        return int(self.rotation[x, (self.rotation_position[dart] + step) % 3])

    def with_rotation(self, rotation) -> "TrivalentGraph":
        return TrivalentGraph(self.vertex_count, self.origin, self.terminus, self.shift,
                              np.asarray(rotation, dtype=np.int64), self.period_rank)

    def flipped(self, vertices: Iterable[int]) -> "TrivalentGraph":
        """Reverse the cyclic order at the given vertices."""
        rot = self.rotation.copy()
        for x in vertices:
            rot[x] = rot[x, [0, 2, 1]]
        return self.with_rotation(rot)

    def is_connected(self) -> bool:
        seen = np.zeros(self.vertex_count, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for y in self.neighbors(x):
                if not seen[y]:
                    seen[y] = True
                    queue.append(int(y))
        return bool(seen.all())


@dataclass(frozen=True, eq=False)
class DiscreteSurface:
    """A realization of a :class:`TrivalentGraph` in R^3."""

    graph: TrivalentGraph
    positions: np.ndarray
    lattice: np.ndarray

    @cached_property
    def edge_vectors(self) -> np.ndarray:
        """Array ``(2E, 3)`` of edge vectors, reverse darts negated exactly."""
        g = self.graph
        fwd = slice(0, g.dart_count, 2)
        vec = self.positions[g.terminus[fwd]] - self.positions[g.origin[fwd]]
        if g.period_rank:
            vec = vec + g.shift[fwd] @ self.lattice
        out = np.empty((g.dart_count, 3))
        out[0::2] = vec
        out[1::2] = -vec
        return out

    @cached_property
    def stars(self) -> np.ndarray:
        """Array ``(V, 3, 3)``; row ``x`` holds the edge vectors in rotation order."""
        return self.edge_vectors[self.graph.rotation]

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count

    def edge_lengths(self) -> np.ndarray:
        """Length of each unoriented edge record."""
        return np.linalg.norm(self.edge_vectors[0::2], axis=1)

    def with_positions(self, positions) -> "DiscreteSurface":
        return DiscreteSurface(self.graph, np.asarray(positions, dtype=float), self.lattice)

    def scaled(self, s: float) -> "DiscreteSurface":
        return DiscreteSurface(self.graph, self.positions * s, self.lattice * s)


def build_surface(graph: TrivalentGraph, positions, lattice=(), *, check_injective: bool = True,
                  tol: float = DEGENERACY_TOL) -> DiscreteSurface:
    """Validate and assemble a discrete surface.

    Raises
    ------
    DegenerateVertex
        If all three edge pairs at some vertex are parallel up to ``tol``.
    NonInjective
        If two vertices of the period cell coincide.
    """
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    lattice = np.asarray(lattice, dtype=float).reshape(-1, 3)
    if len(positions) != graph.vertex_count:
        raise ValidationError(f"{len(positions)} positions for {graph.vertex_count} vertices")
    if len(lattice) != graph.period_rank:
        raise ValidationError(f"{len(lattice)} lattice vectors for period rank {graph.period_rank}")
    if graph.period_rank and np.linalg.matrix_rank(lattice) < graph.period_rank:
        raise ValidationError("lattice vectors are linearly dependent")
    surface = DiscreteSurface(graph, positions, lattice)
    bad = degenerate_vertices(surface, tol)
    if len(bad):
        raise DegenerateVertex(int(bad[0]))
    if check_injective and graph.vertex_count > 1:
        scale = max(float(np.max(surface.edge_lengths())), 1e-300)
        pairs = cKDTree(positions).query_pairs(1e-9 * scale, output_type="ndarray")
        if len(pairs):
            raise NonInjective(int(pairs[0, 0]), int(pairs[0, 1]))
    return surface


def degenerate_vertices(surface: DiscreteSurface, tol: float = DEGENERACY_TOL) -> np.ndarray:
    """Vertices failing condition (ii): no pair of edge vectors is independent."""
    s = surface.stars
    best = np.zeros(surface.vertex_count)
    for i, j in ((0, 1), (1, 2), (2, 0)):
        cross = np.linalg.norm(np.cross(s[:, i], s[:, j]), axis=1)
        scale = np.maximum(np.sum(s[:, i] ** 2, axis=1), np.sum(s[:, j] ** 2, axis=1))
        best = np.maximum(best, cross - tol * scale)
    return np.flatnonzero(best <= 0)


def edge_vector(surface: DiscreteSurface, dart: int) -> np.ndarray:
    """``Phi(t(e)) + lattice.shift - Phi(o(e))`` for a dart id."""
    if not 0 <= dart < surface.graph.dart_count:
        raise IndexError(f"dart {dart} out of range")
    return surface.edge_vectors[dart].copy()


def ordered_star(surface: DiscreteSurface, x: int) -> tuple[int, int, int]:
    """Outgoing darts at ``x`` in rotation order."""
    return tuple(int(d) for d in surface.graph.rotation[x])


def star_moment(stars: np.ndarray) -> np.ndarray:
    """``e1 x e2 + e2 x e3 + e3 x e1`` for stars of shape ``(..., 3, 3)``."""
    e1, e2, e3 = stars[..., 0, :], stars[..., 1, :], stars[..., 2, :]
    return np.cross(e1, e2) + np.cross(e2, e3) + np.cross(e3, e1)


def orient_along(graph: TrivalentGraph, positions, lattice, directions) -> TrivalentGraph:
    """Choose each vertex's cyclic order so its normal has positive component along ``directions``."""
    surface = DiscreteSurface(graph, np.asarray(positions, float), np.asarray(lattice, float).reshape(-1, 3))
    m = star_moment(surface.stars)
    flip = np.einsum("ij,ij->i", m, np.asarray(directions, float)) < 0
    return graph.flipped(np.flatnonzero(flip))


def orient_consistently(graph: TrivalentGraph, positions, lattice, seed: int = 0) -> TrivalentGraph:
    """Propagate the orientation at ``seed`` so adjacent normals point to the same side.

    Raises ValidationError if some edge still joins opposite-facing normals
    (non-orientable realization or too coarse a net).
    """
    lattice = np.asarray(lattice, float).reshape(-1, 3)
    surface = DiscreteSurface(graph, np.asarray(positions, float), lattice)
    m = star_moment(surface.stars)
    sign = np.zeros(graph.vertex_count)
    sign[seed] = 1.0
    queue = deque([seed])
    while queue:
        x = queue.popleft()
        for y in graph.neighbors(x):
            if sign[y] == 0:
                sign[y] = sign[x] if np.dot(m[x], m[y]) >= 0 else -sign[x]
                queue.append(int(y))
    if np.any(sign == 0):
        raise ValidationError("graph is disconnected")
    oriented = graph.flipped(np.flatnonzero(sign < 0))
    m = star_moment(DiscreteSurface(oriented, surface.positions, lattice).stars)
    dots = np.einsum("ij,ij->i", m[oriented.origin], m[oriented.terminus])
    if np.any(dots < 0):
        raise ValidationError("no consistent orientation: adjacent normals disagree")
    return oriented


def translate_vertex(surface: DiscreteSurface, x: int, m) -> DiscreteSurface:
    """Move vertex ``x`` by ``lattice.T @ m`` and compensate incident shifts.

    Every edge vector is unchanged; only the period-cell representative moves.
    """
    g = surface.graph
    m = np.asarray(m, dtype=np.int64)
    shift = g.shift.copy()
    shift[g.origin == x] += m
    shift[g.terminus == x] -= m
    positions = surface.positions.copy()
    positions[x] += m @ surface.lattice
    graph = TrivalentGraph(g.vertex_count, g.origin, g.terminus, shift, g.rotation, g.period_rank)
    return DiscreteSurface(graph, positions, surface.lattice)
