"""Area functional, its first and second variations, and the Steiner formula.

The area element ``A(x) = |m(x)|`` is twice the area of the triangle spanned
by the three neighbours of ``x``, so a variation field enters ``A(x)`` only
through the neighbours.  Fields on periodic surfaces are given on one period
cell and extended periodically; totals are per cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import _large_triangle, normals_and_areas, tangent_project
from .errors import DegenerateVertex, NotParallel, ValidationError
from .graph import DiscreteSurface, degenerate_vertices, star_moment

FD_STEPS = (1e-4, 5e-5, 2.5e-5)


def _field(surface: DiscreteSurface, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape == (3,):
        u = np.broadcast_to(u, (surface.vertex_count, 3))
    if u.shape != (surface.vertex_count, 3):
        raise ValidationError(f"vector field has shape {u.shape}, expected ({surface.vertex_count}, 3)")
    return u


def area_elements(surface: DiscreteSurface) -> np.ndarray:
    return np.linalg.norm(star_moment(surface.stars), axis=1)


def area_functional(surface: DiscreteSurface) -> float:
    """Sum of the area elements over one period cell."""
    return float(np.sum(area_elements(surface)))


def _neighbor_triangles(surface: DiscreteSurface):
    """Neighbour positions relative to ``Phi(x)``, unit normal and ``A(x)``."""
    bad = degenerate_vertices(surface)
    if len(bad):
        raise DegenerateVertex(int(bad[0]))
    n, area = normals_and_areas(surface)
    return surface.stars, n, area


def area_gradient(surface: DiscreteSurface) -> np.ndarray:
    """Gradient of the area functional with respect to each vertex position.

    The corner ``i`` of the neighbour triangle at ``x`` contributes the side
    opposite to it turned by 90 degrees in the triangle plane.
    """
    g = surface.graph
    e, n, _ = _neighbor_triangles(surface)
    grad = np.zeros((g.vertex_count, 3))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        V = np.cross(e[:, j] - e[:, k], n)
        np.add.at(grad, g.terminus[g.rotation[:, i]], V)
    return grad


def first_variation(surface: DiscreteSurface, u) -> float:
    """``d/dt A[Phi + t u]`` at ``t = 0``."""
    return float(np.sum(area_gradient(surface) * _field(surface, u)))


def _forms(surface: DiscreteSurface):
    g = surface.graph
    e, n, area = _neighbor_triangles(surface)
    nbr = n[g.terminus[g.rotation]]
    b = e[:, 1:] - e[:, :1]
    d = nbr[:, 1:] - nbr[:, :1]
    return e, n, area, nbr, b, d


@dataclass(frozen=True)
class VariationSeries:
    """Per-vertex coefficients of ``A[Phi + t n]`` up to order two."""

    area: np.ndarray
    first_order: np.ndarray
    second_order: np.ndarray

    @property
    def total_area(self) -> float:
        return float(self.area.sum())

    @property
    def total_first(self) -> float:
        return float(self.first_order.sum())

    @property
    def total_second(self) -> float:
        return float(self.second_order.sum())

    def predict(self, t: float) -> float:
        """Second-order Taylor value of the total area."""
        return self.total_area + t * self.total_first + 0.5 * t * t * self.total_second


def third_forms(surface: DiscreteSurface):
    """``I``, ``III'`` (raw normal differences) and ``III`` (projected) of each neighbour triangle."""
    _, n, _, _, b, d = _forms(surface)
    I = np.einsum("vik,vjk->vij", b, b)
    III_raw = np.einsum("vik,vjk->vij", d, d)
    dp = tangent_project(n[:, None, :], d)
    III = np.einsum("vik,vjk->vij", dp, dp)
    return I, III_raw, III


def normal_variation_series(surface: DiscreteSurface) -> VariationSeries:
    """Area elements with first order ``-2 H A`` and second order ``(2K + tr I^-1 (III' - III)) A``."""
    e, n, area, nbr, b, d = _forms(surface)
    H, K = _large_triangle(e, nbr)
    I, III_raw, III = third_forms(surface)
    tr = np.trace(np.linalg.solve(I, III_raw - III), axis1=1, axis2=2)
    return VariationSeries(area, -2 * H * area, (2 * K + tr) * area)


def steiner_check(surface: DiscreteSurface, t: float, tol: float = 1e-10):
    """Area elements of the parallel surface ``Phi + t n`` and the Steiner prediction.

    Returns ``(A_t, (1 - 2tH + t^2 K) A)``.  Raises NotParallel when some
    neighbour normal difference leaves the triangle plane by more than
    ``tol`` relative to its length.
    """
    e, n, area, nbr, b, d = _forms(surface)
    off = np.abs(np.einsum("vik,vk->vi", d, n))
    size = np.linalg.norm(d, axis=2)
    dev = np.where(size > 0, off / np.maximum(size, 1e-300), 0.0)
    if dev.max() > tol:
        raise NotParallel(float(dev.max()))
    bt = b + t * d
    actual = np.einsum("vk,vk->v", np.cross(bt[:, 0], bt[:, 1]), n)
    H, K = _large_triangle(e, nbr)
    return np.abs(actual), (1 - 2 * t * H + t * t * K) * area


def normal_field(surface: DiscreteSurface) -> np.ndarray:
    return normals_and_areas(surface)[0]


def fd_first_variation(surface: DiscreteSurface, u, t: float) -> float:
    """Central difference ``(A[Phi + t u] - A[Phi - t u]) / 2t``."""
    u = _field(surface, u)
    plus = area_functional(surface.with_positions(surface.positions + t * u))
    minus = area_functional(surface.with_positions(surface.positions - t * u))
    return (plus - minus) / (2 * t)


def fd_second_variation(surface: DiscreteSurface, u, t: float) -> float:
    """Second central difference of ``A[Phi + t u]`` at zero."""
    u = _field(surface, u)
    plus = area_functional(surface.with_positions(surface.positions + t * u))
    minus = area_functional(surface.with_positions(surface.positions - t * u))
    return (plus - 2 * area_functional(surface) + minus) / (t * t)


@dataclass(frozen=True)
class RichardsonReport:
    steps: tuple
    errors: tuple
    ratios: tuple


def richardson_check(surface: DiscreteSurface, u, steps=FD_STEPS) -> RichardsonReport:
    """Errors of the central difference against :func:`first_variation` at shrinking steps.

    Steps are multiples of the mean edge length.  For a smooth functional
    consecutive error ratios approach 4 when the step is halved.
    """
    exact = first_variation(surface, u)
    scale = float(np.mean(surface.edge_lengths()))
    hs = tuple(s * scale for s in steps)
    errors = tuple(abs(fd_first_variation(surface, u, h) - exact) for h in hs)
    ratios = tuple(errors[i] / errors[i + 1] if errors[i + 1] > 0 else np.inf for i in range(len(errors) - 1))
    return RichardsonReport(hs, errors, ratios)
