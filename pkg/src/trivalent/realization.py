"""Harmonic realizations and the prescribed mean curvature equation.

A realization is harmonic with weight ``m`` if ``sum_i m(e_i) Phi(e_i) = 0``
at every vertex.  For periodic graphs the lattice vectors are fixed by the
caller, so the harmonic realization is unique up to a translation, which is
removed by a gauge.

:func:`solve_prescribed_h` solves

    sum over cyclic (1,2,3) of  grad_{e2-e3} n0  x  Phi(e1)  =  2 H(x) m(x)

for ``Phi`` with the normals ``n0`` and tangent planes of a reference surface
held fixed; ``m(x)`` is the unnormalized normal of the unknown.  For
``H = 0`` this is linear.  Symmetry constraints are eliminated exactly by an
affine parametrization of the unknowns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components

from .curvature import curvature_field, normals_and_areas, tangent_project
from .errors import (GaugeConflict, HypothesisFailed, NotHarmonic, RankDeficient, SingularSystem,
                     SolverError, ValidationError)
from .graph import DEGENERACY_TOL, DiscreteSurface, TrivalentGraph, build_surface, star_moment


@dataclass(frozen=True)
class FixVertex:
    """Gauge pinning one vertex."""

    vertex: int
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class FixBarycenter:
    """Gauge pinning the mean of the cell representatives."""

    point: tuple[float, float, float] = (0.0, 0.0, 0.0)


def unit_weights(graph: TrivalentGraph) -> np.ndarray:
    return np.ones(graph.edge_count)


def _check_weights(graph: TrivalentGraph, weights) -> np.ndarray:
    w = unit_weights(graph) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    if len(w) != graph.edge_count:
        raise ValidationError(f"{len(w)} weights for {graph.edge_count} edges")
    if np.any(~(w > 0)):
        raise ValidationError("weights must be positive")
    return w


def dart_weights(graph: TrivalentGraph, weights=None) -> np.ndarray:
    return np.repeat(_check_weights(graph, weights), 2)


def harmonic_residual(surface: DiscreteSurface, weights=None) -> np.ndarray:
    """``sum_i m(e_i) Phi(e_i)`` at every vertex."""
    w = dart_weights(surface.graph, weights)[surface.graph.rotation]
    return np.einsum("vi,vij->vj", w, surface.stars)


def harmonic_realize(graph: TrivalentGraph, weights=None, lattice=(), gauge=None) -> DiscreteSurface:
    """Harmonic realization with fixed lattice vectors.

    The weighted graph Laplacian is factorized directly.  ``gauge`` is a
    :class:`FixVertex` or :class:`FixBarycenter` (default: barycenter at the
    origin).
    """
    lattice = np.asarray(lattice, dtype=float)
    if lattice.size % 3:
        raise ValidationError(f"lattice of shape {lattice.shape} is not a list of 3-vectors")
    lattice = lattice.reshape(-1, 3)
    if len(lattice) != graph.period_rank:
        raise ValidationError(f"{len(lattice)} lattice vectors for period rank {graph.period_rank}")
    n = graph.vertex_count
    w = dart_weights(graph, weights)
    adjacency = sp.csr_matrix((np.ones(graph.dart_count), (graph.origin, graph.terminus)), shape=(n, n))
    if connected_components(adjacency, directed=False)[0] != 1:
        raise SingularSystem("graph is disconnected")
    lap = sp.csr_matrix((np.r_[w, -w], (np.r_[graph.origin, graph.origin], np.r_[graph.origin, graph.terminus])),
                        shape=(n, n))
    rhs = np.zeros((n, 3))
    if graph.period_rank:
        np.add.at(rhs, graph.origin, w[:, None] * (graph.shift @ lattice))
    gauge = FixBarycenter() if gauge is None else gauge
    if isinstance(gauge, FixVertex):
        if not 0 <= gauge.vertex < n:
            raise GaugeConflict(f"gauge vertex {gauge.vertex} does not exist")
        keep = np.setdiff1d(np.arange(n), [gauge.vertex])
        pin = np.asarray(gauge.position, dtype=float)
        sub = lap[keep][:, keep].tocsc()
        b = rhs[keep] - lap[keep][:, [gauge.vertex]].toarray() * pin
        pos = np.empty((n, 3))
        pos[gauge.vertex] = pin
        pos[keep] = _solve(sub, b) if len(keep) else np.zeros((0, 3))
    elif isinstance(gauge, FixBarycenter):
        ones = sp.csr_matrix(np.ones((n, 1)))
        big = sp.bmat([[lap, ones], [ones.T, None]]).tocsc()
        b = np.vstack([rhs, n * np.asarray(gauge.point, dtype=float)[None, :]])
        pos = _solve(big, b)[:n]
    else:
        raise GaugeConflict(f"unknown gauge {gauge!r}")
    surface = build_surface(graph, pos, lattice)
    res = np.abs(harmonic_residual(surface, weights)).max()
    scale = float(np.mean(surface.edge_lengths()))
    if not res <= 1e-10 * max(scale, 1e-300) * max(1.0, float(np.max(w))):
        raise SolverError(f"harmonic residual {res:.3e} too large")
    return surface


def _solve(matrix, rhs):
    try:
        sol = spla.splu(matrix.tocsc()).solve(np.ascontiguousarray(rhs))
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(sol)):
        raise SingularSystem("factorization produced non-finite values")
    res = np.abs(matrix @ sol - rhs).max()
    if res > 1e-12 * max(1.0, np.abs(rhs).max()):
        sol2 = np.column_stack([spla.gmres(matrix, rhs[:, j], x0=sol[:, j], rtol=1e-12)[0]
                                for j in range(rhs.shape[1])])
        sol = sol2
    return sol


def harmonic_curvatures(surface: DiscreteSurface, weights=None, tol: float = 1e-9):
    """Closed-form ``(H, K)`` arrays valid on harmonic surfaces.

    With ``e_a`` the edge vectors, ``n_a`` the neighbour normals and the sum
    over cyclic ``(a, b, c)``::

        H = (m1+m2+m3) / (2 A^2) * sum <e_a,e_b> (<e_a,n_b> + <e_b,n_a>) / m_c
        K = -(m1+m2+m3) / A^2 * sum <e_a,n_b> <e_b,n_a> / m_c

    Raises NotHarmonic when the harmonic residual exceeds ``tol`` times the
    mean edge length.
    """
    g = surface.graph
    m = dart_weights(g, weights)[g.rotation]
    res = np.abs(harmonic_residual(surface, weights)).max()
    if res > tol * float(np.mean(surface.edge_lengths())) * float(m.max()):
        raise NotHarmonic(float(res))
    n, _ = normals_and_areas(surface)
    return harmonic_star_curvatures(surface.stars, n[g.terminus[g.rotation]], m)


def harmonic_star_curvatures(stars, neighbor_normals, m):
    """Closed-form ``(H, K)`` for stars ``(V, 3, 3)``, neighbour normals and edge weights ``(V, 3)``."""
    e = np.asarray(stars, dtype=float).reshape(-1, 3, 3)
    nbr = np.asarray(neighbor_normals, dtype=float).reshape(-1, 3, 3)
    m = np.asarray(m, dtype=float).reshape(-1, 3)
    area = np.linalg.norm(star_moment(e), axis=1)
    total = m.sum(axis=1)
    H = np.zeros(len(e))
    K = np.zeros(len(e))
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        ea_nb = np.einsum("vi,vi->v", e[:, a], nbr[:, b])
        eb_na = np.einsum("vi,vi->v", e[:, b], nbr[:, a])
        ea_eb = np.einsum("vi,vi->v", e[:, a], e[:, b])
        H += ea_eb * (ea_nb + eb_na) / m[:, c]
        K += ea_nb * eb_na / m[:, c]
    return total / (2 * area ** 2) * H, -total / area ** 2 * K


def conformality_check(surface: DiscreteSurface, x: int, weights=None, tol: float = 1e-10) -> bool:
    """Equal pairwise inner products of the three edge vectors at ``x``.

    With constant weights the equivalent equal-length condition is tested too
    and must agree.
    """
    e = surface.stars[x]
    scale2 = float(np.max(np.sum(e ** 2, axis=1)))
    dots = np.array([e[0] @ e[1], e[1] @ e[2], e[2] @ e[0]])
    conformal = bool(np.ptp(dots) <= tol * scale2)
    w = _check_weights(surface.graph, weights)
    if np.ptp(w) == 0:
        lengths2 = np.sum(e ** 2, axis=1)
        harmonic = np.abs(harmonic_residual(surface, weights)[x]).max() <= tol * np.sqrt(scale2)
        if harmonic:
            conformal = conformal and bool(np.ptp(lengths2) <= tol * scale2 * 4)
    return conformal


@dataclass(frozen=True)
class AffineTie:
    """``Phi(target) = matrix @ Phi(source) + offset``; ``source=None`` makes it a fixed-point row."""

    matrix: np.ndarray
    offset: np.ndarray
    target: int
    source: int | None = None

    @property
    def is_fixed_point(self) -> bool:
        return self.source is None or self.source == self.target


@dataclass
class SymmetryConstraint:
    """A list of affine ties between vertex positions."""

    rows: list = field(default_factory=list)

    def tie(self, target: int, source: int, matrix, offset=(0.0, 0.0, 0.0)) -> "SymmetryConstraint":
        self.rows.append(AffineTie(np.asarray(matrix, float), np.asarray(offset, float), int(target), int(source)))
        return self

    def fix(self, vertex: int, matrix, offset=(0.0, 0.0, 0.0)) -> "SymmetryConstraint":
        self.rows.append(AffineTie(np.asarray(matrix, float), np.asarray(offset, float), int(vertex), None))
        return self


def affine_parametrization(vertex_count: int, constraints: SymmetryConstraint | None,
                           tol: float = 1e-12):
    """Matrix ``P`` and vector ``q`` with ``Phi = P z + q`` satisfying every tie."""
    rows = [] if constraints is None else constraints.rows
    parent: dict[int, AffineTie] = {}
    for row in rows:
        if not row.is_fixed_point:
            if row.target in parent:
                raise GaugeConflict(f"vertex {row.target} is tied twice")
            parent[row.target] = row
    chain: dict[int, tuple[int, np.ndarray, np.ndarray]] = {}

    def resolve(x, depth=0):
        if x in chain:
            return chain[x]
        if depth > vertex_count:
            raise GaugeConflict("symmetry ties form a cycle")
        if x not in parent:
            chain[x] = (x, np.eye(3), np.zeros(3))
        else:
            row = parent[x]
            root, T, s = resolve(row.source, depth + 1)
            chain[x] = (root, row.matrix @ T, row.matrix @ s + row.offset)
        return chain[x]

    for x in range(vertex_count):
        resolve(x)
    conditions: dict[int, list] = {}
    for row in rows:
        if row.is_fixed_point:
            root, T, s = chain[row.target]
            A = np.eye(3) - row.matrix
            conditions.setdefault(root, []).append((A @ T, row.offset - A @ s))
    roots = sorted({c[0] for c in chain.values()})
    base, null, col = {}, {}, 0
    for r in roots:
        if r in conditions:
            C = np.vstack([c for c, _ in conditions[r]])
            d = np.concatenate([d for _, d in conditions[r]])
            p0 = np.linalg.lstsq(C, d, rcond=None)[0]
            if np.abs(C @ p0 - d).max() > tol * max(1.0, np.abs(d).max()):
                raise GaugeConflict(f"inconsistent fixed-point rows at vertex {r}")
            _, sv, vt = np.linalg.svd(C)
            rank = int(np.sum(sv > tol * max(1.0, sv.max())))
            N = vt[rank:].T
        else:
            p0, N = np.zeros(3), np.eye(3)
        base[r], null[r] = p0, (col, N)
        col += N.shape[1]
    P = np.zeros((3 * vertex_count, col))
    q = np.zeros(3 * vertex_count)
    for x in range(vertex_count):
        r, T, s = chain[x]
        c0, N = null[r]
        P[3 * x:3 * x + 3, c0:c0 + N.shape[1]] = T @ N
        q[3 * x:3 * x + 3] = T @ base[r] + s
    return P, q


def _skew(v):
    z = np.zeros(v.shape[:-1])
    return np.stack([np.stack([z, -v[..., 2], v[..., 1]], -1),
                     np.stack([v[..., 2], z, -v[..., 0]], -1),
                     np.stack([-v[..., 1], v[..., 0], z], -1)], -2)


@dataclass
class PrescribedHInfo:
    nullity: int
    gauge_dim: int
    residual: float
    iterations: int
    flipped: list
    max_sine: float


def prescribed_h_operator(reference: DiscreteSurface):
    """Linear part ``A`` (3V x 3V) and constant ``c`` of the left-hand side."""
    g = reference.graph
    n0, _ = normals_and_areas(reference)
    nbr = n0[g.terminus[g.rotation]]
    V = g.vertex_count
    G = np.stack([tangent_project(n0, nbr[:, (i + 1) % 3] - nbr[:, (i + 2) % 3]) for i in range(3)], axis=1)
    d1 = tangent_project(n0, nbr[:, 1] - nbr[:, 0])
    d2 = tangent_project(n0, nbr[:, 2] - nbr[:, 0])
    scale = np.maximum(np.sum(d1 ** 2, axis=1), np.sum(d2 ** 2, axis=1))
    bad = np.flatnonzero(np.linalg.norm(np.cross(d1, d2), axis=1) <= DEGENERACY_TOL * np.maximum(scale, 1e-300))
    if len(bad):
        raise HypothesisFailed(int(bad[0]))
    S = _skew(G)
    rows, cols, vals = [], [], []
    c = np.zeros((V, 3))
    lat_shift = g.shift @ reference.lattice if g.period_rank else np.zeros((g.dart_count, 3))
    for i in range(3):
        darts = g.rotation[:, i]
        t = g.terminus[darts]
        for a in range(3):
            for b in range(3):
                rows += [3 * np.arange(V) + a, 3 * np.arange(V) + a]
                cols += [3 * t + b, 3 * np.arange(V) + b]
                vals += [S[:, i, a, b], -S[:, i, a, b]]
        c += np.einsum("vab,vb->va", S[:, i], lat_shift[darts])
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(3 * V, 3 * V))
    return A, c.reshape(-1)


def _moment_and_jacobian(graph, lattice, phi):
    """``m(x)`` for all vertices and its sparse Jacobian in ``Phi``."""
    surface = DiscreteSurface(graph, phi.reshape(-1, 3), lattice)
    e = surface.stars
    m = star_moment(e)
    V = graph.vertex_count
    rows, cols, vals = [], [], []
    for i in range(3):
        w = e[:, (i + 1) % 3] - e[:, (i + 2) % 3]
        D = -_skew(w)
        t = graph.terminus[graph.rotation[:, i]]
        for a in range(3):
            for b in range(3):
                rows += [3 * np.arange(V) + a, 3 * np.arange(V) + a]
                cols += [3 * t + b, 3 * np.arange(V) + b]
                vals += [D[:, a, b], -D[:, a, b]]
    J = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(3 * V, 3 * V))
    return m.reshape(-1), J


def solve_prescribed_h(reference: DiscreteSurface, target_h, constraints: SymmetryConstraint | None = None,
                       *, tol: float = 1e-10, max_iter: int = 30, return_info: bool = False):
    """Solve the prescribed mean curvature equation around ``reference``.

    The result satisfies ``m(x) || n0(x)`` at every vertex; vertices whose
    normal came out antiparallel get their rotation reversed so the returned
    surface has mean curvature ``target_h``.

    Raises
    ------
    RankDeficient
        If the solution set has more freedom than the translations allowed by
        ``constraints``.
    HypothesisFailed
        If the reference normal derivatives at some vertex are dependent.
    """
    g = reference.graph
    V = g.vertex_count
    h = np.broadcast_to(np.asarray(target_h, dtype=float), (V,)).copy()
    A, c = prescribed_h_operator(reference)
    P, q = affine_parametrization(V, constraints)
    lattice = reference.lattice
    z = np.linalg.lstsq(P, reference.positions.reshape(-1) - q, rcond=None)[0] if P.shape[1] else np.zeros(0)
    h3 = np.repeat(h, 3)
    AP = A @ P
    scale = float(np.mean(reference.edge_lengths()))

    def residual(phi):
        m, J = _moment_and_jacobian(g, lattice, phi)
        return A @ phi + c - 2 * h3 * m, J

    phi = P @ z + q
    F, J = residual(phi)
    jac = AP - 2 * h3[:, None] * (J @ P)
    sv = np.linalg.svd(jac, compute_uv=False) if jac.size else np.zeros(0)
    rank = int(np.sum(sv > 1e-10 * max(1.0, sv.max() if len(sv) else 1.0)))
    nullity = P.shape[1] - rank
    trans = np.kron(np.ones(V), np.eye(3)).T
    zt = np.linalg.lstsq(P, trans, rcond=None)[0] if P.shape[1] else np.zeros((0, 3))
    ok = np.abs(P @ zt - trans).max(axis=0) <= 1e-10 if P.shape[1] else np.zeros(3, bool)
    gauge_dim = int(np.linalg.matrix_rank(zt[:, ok])) if ok.any() else 0
    if nullity > gauge_dim:
        raise RankDeficient(nullity)
    it = 0
    while np.abs(F).max() > tol * scale * scale and it < max_iter:
        step = np.linalg.lstsq(jac, -F, rcond=None)[0]
        z = z + step
        phi = P @ z + q
        F, J = residual(phi)
        jac = AP - 2 * h3[:, None] * (J @ P)
        it += 1
    res = float(np.abs(F).max())
    if not res <= tol * scale * scale * 10:
        if not np.any(h):
            raise SolverError(f"linear system is inconsistent (least-squares residual {res:.3e})")
        raise SolverError(f"prescribed mean curvature solve did not converge (residual {res:.3e})")
    positions = phi.reshape(-1, 3)
    n0, _ = normals_and_areas(reference)
    m = star_moment(DiscreteSurface(g, positions, lattice).stars)
    mn = np.linalg.norm(m, axis=1)
    sine = np.linalg.norm(np.cross(m, n0), axis=1) / np.maximum(mn, 1e-300)
    flipped = np.flatnonzero(np.einsum("ij,ij->i", m, n0) < 0)
    graph = g.flipped(flipped) if len(flipped) else g
    surface = build_surface(graph, positions, lattice)
    got = curvature_field(surface).mean
    if np.abs(got - h).max() > 1e-8 * max(1.0, np.abs(h).max()):
        raise SolverError("solution does not attain the prescribed mean curvature")
    info = PrescribedHInfo(nullity, gauge_dim, res, it, flipped.tolist(), float(sine.max()))
    return (surface, info) if return_info else surface
