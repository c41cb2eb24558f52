"""Normals, fundamental forms and vertex curvatures.

Sign convention: when the rotation at every vertex of a sphere-inscribed
polyhedron is counterclockwise seen from outside, normals point outward and
the curvatures are ``H = -1/r`` and ``K = 1/r**2``.

Two estimators are provided for the vertex curvatures:

``"weighted"``
    the area-weighted average over the three projected edge pairs;
``"large_triangle"``
    trace and determinant of the shape operator of the neighbour triangle.

They agree up to rounding on non-degenerate stars.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import AllPairsSkipped, DegenerateTriangle, ZeroNormal
from .graph import DEGENERACY_TOL, DiscreteSurface, star_moment

WEIGHTED = "weighted"
LARGE_TRIANGLE = "large_triangle"
METHODS = (WEIGHTED, LARGE_TRIANGLE)
PAIRS = ((0, 1), (1, 2), (2, 0))


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def tangent_project(n, v):
    """Orthogonal projection of ``v`` onto the plane with unit normal ``n``."""
    n = np.asarray(n, dtype=float)
    v = np.asarray(v, dtype=float)
    return v - _dot(v, n)[..., None] * n


def normals_and_areas(surface: DiscreteSurface) -> tuple[np.ndarray, np.ndarray]:
    """Unit normals ``(V, 3)`` and area elements ``A(x)`` for every vertex.

    Raises ZeroNormal at the first vertex whose area element vanishes.
    """
    stars = surface.stars
    m = star_moment(stars)
    area = np.linalg.norm(m, axis=1)
    scale = np.max(np.sum(stars ** 2, axis=2), axis=1)
    bad = np.flatnonzero(area <= DEGENERACY_TOL * scale)
    if len(bad):
        raise ZeroNormal(int(bad[0]))
    return m / area[:, None], area


def vertex_normal(surface: DiscreteSurface, x: int) -> np.ndarray:
    """Unit normal ``(e1 x e2 + e2 x e3 + e3 x e1) / A(x)``."""
    star = surface.stars[x]
    m = star_moment(star)
    area = np.linalg.norm(m)
    if area <= DEGENERACY_TOL * np.max(np.sum(star ** 2, axis=1)):
        raise ZeroNormal(x)
    return m / area


@dataclass(frozen=True)
class TriangleForms:
    """First, second and third fundamental forms of a normal-decorated triangle.

    ``II`` is laid out as ``[[L, M2], [M1, N]]``.
    """

    I: np.ndarray
    II: np.ndarray
    III: np.ndarray

    E = property(lambda self: self.I[..., 0, 0])
    F = property(lambda self: self.I[..., 0, 1])
    G = property(lambda self: self.I[..., 1, 1])
    L = property(lambda self: self.II[..., 0, 0])
    M2 = property(lambda self: self.II[..., 0, 1])
    M1 = property(lambda self: self.II[..., 1, 0])
    N = property(lambda self: self.II[..., 1, 1])

    @property
    def det_I(self):
        return self.E * self.G - self.F ** 2


def forms_from_vectors(v1, v2, d1, d2) -> TriangleForms:
    """Forms from tangent vectors ``v1, v2`` and normal derivatives ``d1, d2``.

    Broadcasts over leading axes.
    """
    v = np.stack([np.asarray(v1, float), np.asarray(v2, float)], axis=-2)
    d = np.stack([np.asarray(d1, float), np.asarray(d2, float)], axis=-2)
    I = np.einsum("...ik,...jk->...ij", v, v)
    II = -np.einsum("...ik,...jk->...ij", v, d)
    III = np.einsum("...ik,...jk->...ij", d, d)
    return TriangleForms(I, II, III)


def triangle_forms(x0, x1, x2, n0, n1, n2) -> TriangleForms:
    """Fundamental forms of the triangle ``x0 x1 x2`` decorated with unit normals.

    ``II`` uses raw normal differences, ``III`` their projections onto the
    plane of the triangle.
    """
    x0, x1, x2, n0, n1, n2 = (np.asarray(a, dtype=float) for a in (x0, x1, x2, n0, n1, n2))
    v1, v2 = x1 - x0, x2 - x0
    c = np.cross(v1, v2)
    norm = np.linalg.norm(c, axis=-1)
    scale = np.maximum(_dot(v1, v1), _dot(v2, v2))
    if np.any(norm <= DEGENERACY_TOL * scale):
        raise DegenerateTriangle("triangle edge vectors are parallel")
    nu = c / norm[..., None]
    forms = forms_from_vectors(v1, v2, n1 - n0, n2 - n0)
    d = np.stack([tangent_project(nu, n1 - n0), tangent_project(nu, n2 - n0)], axis=-2)
    III = np.einsum("...ik,...jk->...ij", d, d)
    return TriangleForms(forms.I, forms.II, III)


def triangle_curvatures(forms: TriangleForms):
    """``(H, K)`` of a triangle from its first and second forms."""
    det = forms.det_I
    scale = np.maximum(forms.E, forms.G)
    if np.any(det <= DEGENERACY_TOL * scale ** 2):
        raise DegenerateTriangle("det I is not positive")
    H = (forms.E * forms.N + forms.G * forms.L - forms.F * (forms.M1 + forms.M2)) / (2 * det)
    K = (forms.L * forms.N - forms.M1 * forms.M2) / det
    return H, K


def weingarten_residual(forms: TriangleForms) -> np.ndarray:
    """``K I - 2H II + III`` evaluated directly."""
    H, K = triangle_curvatures(forms)
    H = np.asarray(H)[..., None, None]
    K = np.asarray(K)[..., None, None]
    return K * forms.I - 2 * H * forms.II + forms.III


def residual_formula(forms: TriangleForms) -> np.ndarray:
    """Closed form of the residual; it is proportional to ``M1 - M2``."""
    E, F, G, L, M1, M2, N = (forms.E, forms.F, forms.G, forms.L, forms.M1, forms.M2, forms.N)
    factor = (M1 - M2) / forms.det_I
    mat = np.stack([np.stack([E * M1 - F * L, E * N - F * M2], axis=-1),
                    np.stack([F * M1 - G * L, F * N - G * M2], axis=-1)], axis=-2)
    return np.asarray(factor)[..., None, None] * mat


@dataclass
class CurvatureReport:
    """Curvature data at one vertex."""

    vertex: int
    normal: np.ndarray
    area_element: float
    mean: float
    gauss: float
    method: str
    triangle_contributions: list = field(default_factory=list)
    skipped_pairs: list = field(default_factory=list)


@dataclass(frozen=True)
class CurvatureField:
    """Per-vertex arrays for a whole period cell."""

    normal: np.ndarray
    area: np.ndarray
    mean: np.ndarray
    gauss: np.ndarray
    method: str


def _neighbor_normals(surface, normals):
    return normals[surface.graph.terminus[surface.graph.rotation]]


def _weighted(stars, n, nbr, area):
    """Weighted estimator, vectorized.  Returns H, K, per-pair data and skip mask.

    Pair weights are the signed areas ``<v_a x v_b, n>``.  They equal
    ``sqrt(det I_ab)`` when the projected star surrounds ``x`` and keep the
    weights summing to ``A(x)`` when it does not.
    """
    v = tangent_project(n[:, None, :], stars)
    d = tangent_project(n[:, None, :], nbr - n[:, None, :])
    scale4 = np.max(np.sum(stars ** 2, axis=2), axis=1) ** 2
    H = np.zeros(len(n))
    K = np.zeros(len(n))
    pair_H, pair_K, pair_w, skipped = [], [], [], []
    for a, b in PAIRS:
        forms = forms_from_vectors(v[:, a], v[:, b], d[:, a], d[:, b])
        det = forms.det_I
        skip = det <= DEGENERACY_TOL * scale4
        safe = np.where(skip, 1.0, det)
        h = (forms.E * forms.N + forms.G * forms.L - forms.F * (forms.M1 + forms.M2)) / (2 * safe)
        k = (forms.L * forms.N - forms.M1 * forms.M2) / safe
        w = np.where(skip, 0.0, _dot(np.cross(v[:, a], v[:, b]), n))
        H += w / area * np.where(skip, 0.0, h)
        K += w / area * np.where(skip, 0.0, k)
        pair_H.append(h)
        pair_K.append(k)
        pair_w.append(w)
        skipped.append(skip)
    return H, K, np.array(pair_H).T, np.array(pair_K).T, np.array(pair_w).T, np.array(skipped).T


def _large_triangle(stars, nbr):
    b = stars[:, 1:, :] - stars[:, :1, :]
    dn = nbr[:, 1:, :] - nbr[:, :1, :]
    I = np.einsum("vik,vjk->vij", b, b)
    II = -np.einsum("vik,vjk->vij", b, dn)
    S = np.linalg.solve(I, II)
    return 0.5 * np.trace(S, axis1=1, axis2=2), np.linalg.det(S)


def star_curvatures(stars, neighbor_normals, method: str = WEIGHTED):
    """``(H, K)`` from edge stars ``(..., 3, 3)`` and neighbour unit normals ``(..., 3, 3)``.

    This is the local computation behind :func:`curvature_field`; it needs
    no graph.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    stars = np.asarray(stars, dtype=float).reshape(-1, 3, 3)
    nbr = np.asarray(neighbor_normals, dtype=float).reshape(-1, 3, 3)
    m = star_moment(stars)
    area = np.linalg.norm(m, axis=1)
    bad = np.flatnonzero(area <= DEGENERACY_TOL * np.max(np.sum(stars ** 2, axis=2), axis=1))
    if len(bad):
        raise ZeroNormal(int(bad[0]))
    if method == LARGE_TRIANGLE:
        return _large_triangle(stars, nbr)
    H, K, *_, skipped = _weighted(stars, m / area[:, None], nbr, area)
    if np.any(skipped.all(axis=1)):
        raise AllPairsSkipped(int(np.flatnonzero(skipped.all(axis=1))[0]))
    return H, K


def curvature_field(surface: DiscreteSurface, method: str = WEIGHTED) -> CurvatureField:
    """Normals, area elements, mean and Gauss curvature at every vertex."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    n, area = normals_and_areas(surface)
    nbr = _neighbor_normals(surface, n)
    if method == WEIGHTED:
        H, K, *_, skipped = _weighted(surface.stars, n, nbr, area)
        all_skipped = np.flatnonzero(skipped.all(axis=1))
        if len(all_skipped):
            raise AllPairsSkipped(int(all_skipped[0]))
    else:
        H, K = _large_triangle(surface.stars, nbr)
    return CurvatureField(n, area, H, K, method)


def vertex_curvature(surface: DiscreteSurface, x: int, method: str = WEIGHTED) -> CurvatureReport:
    """Curvature report at a single vertex."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    n_all, area_all = normals_and_areas(surface)
    nbr = _neighbor_normals(surface, n_all)[x:x + 1]
    stars = surface.stars[x:x + 1]
    n, area = n_all[x:x + 1], area_all[x:x + 1]
    report = CurvatureReport(x, n[0].copy(), float(area[0]), 0.0, 0.0, method)
    if method == WEIGHTED:
        H, K, ph, pk, pw, skipped = _weighted(stars, n, nbr, area)
        for (a, b), h, k, w, s in zip(PAIRS, ph[0], pk[0], pw[0], skipped[0]):
            if s:
                report.skipped_pairs.append((a + 1, b + 1))
            else:
                report.triangle_contributions.append(((a + 1, b + 1), float(h), float(k), float(w)))
        if skipped[0].all():
            raise AllPairsSkipped(x)
    else:
        H, K = _large_triangle(stars, nbr)
    report.mean, report.gauss = float(H[0]), float(K[0])
    return report


def mean_curvature_vectors(surface: DiscreteSurface) -> np.ndarray:
    """``sum over cyclic (1,2,3) of grad_{e2-e3} n x Phi(e1)`` at every vertex."""
    n, _ = normals_and_areas(surface)
    nbr = _neighbor_normals(surface, n)
    e = surface.stars
    out = np.zeros_like(n)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        out += np.cross(tangent_project(n, nbr[:, j] - nbr[:, k]), e[:, i])
    return out


def mean_curvature_vector(surface: DiscreteSurface, x: int) -> np.ndarray:
    """The mean curvature vector ``2 H(x) A(x) n(x)`` computed from normal derivatives."""
    return mean_curvature_vectors(surface)[x]


class MinimalityResult(NamedTuple):
    minimal: bool
    worst_vertex: int
    worst_value: float


def is_minimal(surface: DiscreteSurface, tol: float = 1e-10, method: str = WEIGHTED) -> MinimalityResult:
    """Whether ``max |H(x)| <= tol``, with the worst vertex."""
    H = curvature_field(surface, method).mean
    worst = int(np.argmax(np.abs(H)))
    return MinimalityResult(bool(abs(H[worst]) <= tol), worst, float(H[worst]))
