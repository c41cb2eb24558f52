"""Hexagonal lattices, carbon nanotubes and their Goldberg-Coxeter subdivisions.

Conventions
-----------
``H(u, xi)`` has a vertex at ``u`` joined to ``u + xi_i`` where ``xi_1 = xi``,
``xi_2 = rho(2pi/3) xi`` and ``xi_3 = rho(-2pi/3) xi``.  Lattice vectors are
``a_1 = xi_2 - xi_1`` and ``a_2 = xi_3 - xi_1``; a vertex is
``u + alpha_1 a_1 + alpha_2 a_2`` with ``alpha`` in ``Z^2`` (sublattice A)
or in ``Z^2 - (1/3, 1/3)`` (sublattice B).

A GC index ``(k, l)`` is identified with the Eisenstein integer
``k + l*omega``, ``omega = exp(i pi/3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curvature import curvature_field
from .errors import DegenerateChirality, ValidationError
from .graph import DiscreteSurface, TrivalentGraph, build_surface, orient_along

SQRT3 = math.sqrt(3.0)
OMEGA = complex(0.5, SQRT3 / 2)


def rho(theta: float) -> np.ndarray:
    """Counterclockwise rotation of the plane by ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class HexLattice:
    """The regular hexagonal lattice ``H(u, xi)`` in the plane."""

    u: tuple[float, float]
    xi: tuple[float, float]

    def __post_init__(self):
        if np.hypot(*self.xi) == 0:
            raise ValidationError("bond vector must be nonzero")

    @property
    def bonds(self) -> np.ndarray:
        xi = np.asarray(self.xi, dtype=float)
        return np.array([xi, rho(2 * math.pi / 3) @ xi, rho(-2 * math.pi / 3) @ xi])

    @property
    def a1(self) -> np.ndarray:
        b = self.bonds
        return b[1] - b[0]

    @property
    def a2(self) -> np.ndarray:
        b = self.bonds
        return b[2] - b[0]

    def point(self, alpha) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        return np.asarray(self.u, dtype=float) + alpha[..., :1] * self.a1 + alpha[..., 1:2] * self.a2


def hexagonal_lattice(lam: float = 1.0) -> HexLattice:
    """``X(lambda)``: base vertex at the origin, bond ``lambda (-sqrt3/2, -1/2)``."""
    if lam <= 0:
        raise ValidationError("scale factor must be positive")
    return HexLattice((0.0, 0.0), (-lam * SQRT3 / 2, -lam / 2))


def hex_patch(lattice: HexLattice, window: Sequence[int] = (1, 1)) -> DiscreteSurface:
    """Doubly periodic ``n1 x n2`` block of ``lattice`` in the plane ``z = 0``.

    Vertex ``2*(i*n2 + j)`` is the A vertex ``u + i a1 + j a2`` and the next id
    is the B vertex ``u + xi_1 + i a1 + j a2``.  The lattice vectors of the
    surface are ``n1 a1`` and ``n2 a2``.
    """
    n1, n2 = (int(w) for w in window)
    if n1 < 1 or n2 < 1:
        raise ValidationError("window must be at least 1 x 1")
    a1, a2 = lattice.a1, lattice.a2

    def vid(i, j, part):
        return 2 * ((i % n1) * n2 + (j % n2)) + part

    positions, edges = [], []
    for i in range(n1):
        for j in range(n2):
            base = np.asarray(lattice.u) + i * a1 + j * a2
            positions += [(*base, 0.0), (*(base + lattice.bonds[0]), 0.0)]
            for di, dj in ((0, 0), (1, 0), (0, 1)):
                shift = ((i + di) // n1, (j + dj) // n2)
                edges.append((vid(i, j, 0), vid(i + di, j + dj, 1), shift))
    lat = np.array([[*(n1 * a1), 0.0], [*(n2 * a2), 0.0]])
    graph = TrivalentGraph.from_edges(2 * n1 * n2, edges, period_rank=2)
    graph = orient_along(graph, positions, lat, np.tile([0.0, 0.0, 1.0], (len(positions), 1)))
    return build_surface(graph, positions, lat)


@dataclass(frozen=True)
class GCIndex:
    """Goldberg-Coxeter index ``(k, l)``, i.e. the Eisenstein integer ``k + l omega``."""

    k: int
    l: int = 0

    def __post_init__(self):
        if self.k < 0 or self.l < 0 or self.norm < 1:
            raise ValidationError(f"invalid GC index ({self.k}, {self.l})")

    @property
    def norm(self) -> int:
        return self.k * self.k + self.k * self.l + self.l * self.l

    @property
    def eisenstein(self) -> complex:
        return self.k + self.l * OMEGA

    def __mul__(self, other: "GCIndex") -> "GCIndex":
        """Eisenstein product; ``omega**2 = omega - 1``."""
        k1, l1, k2, l2 = self.k, self.l, other.k, other.l
        return GCIndex(k1 * k2 - l1 * l2, k1 * l2 + k2 * l1 + l1 * l2)


def gc_hex_zeta(xi, idx: GCIndex) -> np.ndarray:
    """New bond vector, written with plane rotations."""
    xi = np.asarray(xi, dtype=float)
    k, l = idx.k, idx.l
    return ((2 * k + l) * xi + (k - l) * rho(math.pi / 3) @ xi
            - (k + 2 * l) * rho(2 * math.pi / 3) @ xi) / (3 * idx.norm)


def gc_hex_base_formula(lattice: HexLattice, idx: GCIndex) -> np.ndarray:
    """Base vertex obtained from the dual-of-subdivided-dual derivation.

    It is a vertex of the subdivided lattice in the same sublattice as
    :func:`gc_hex`'s base vertex; the two differ by a lattice translation.
    """
    u, xi = np.asarray(lattice.u, float), np.asarray(lattice.xi, float)
    k, l = idx.k, idx.l
    return (u - rho(-2 * math.pi / 3) @ xi
            - ((k + 2 * l) * xi + (2 * k + l) * rho(math.pi / 3) @ xi
               + (k - l) * rho(2 * math.pi / 3) @ xi) / (3 * idx.norm))


def gc_hex(lattice: HexLattice, idx: GCIndex) -> HexLattice:
    """``GC_{k,l}`` of a hexagonal lattice.

    The bond is ``zeta = xi / (k + l omega)``.  The base vertex is chosen as
    ``w = u + rho(2pi/3)(zeta - xi)``: the subdivided-lattice vertex next to
    the hexagon centre ``u - xi_2``.  With this choice ``GC_{1,0}`` is the
    identity and base vertices compose under Eisenstein multiplication.
    """
    zeta = gc_hex_zeta(lattice.xi, idx)
    w = np.asarray(lattice.u, float) + rho(2 * math.pi / 3) @ (zeta - np.asarray(lattice.xi, float))
    return HexLattice(tuple(w), tuple(zeta))


def same_hex_lattice(x: HexLattice, y: HexLattice, tol: float = 1e-12) -> bool:
    """Whether two descriptions give the same labelled vertex set."""
    if np.linalg.norm(np.subtract(x.xi, y.xi)) > tol:
        return False
    basis = np.array([x.a1, x.a2]).T
    coeff = np.linalg.solve(basis, np.subtract(y.u, x.u))
    return bool(np.all(np.abs(coeff - np.round(coeff)) <= tol * (1 + np.abs(coeff))))


@dataclass(frozen=True)
class ChiralSpec:
    """Carbon nanotube ``CNT(lambda, c)``."""

    lam: float
    c1: int
    c2: int

    def __post_init__(self):
        if self.lam <= 0:
            raise ValidationError("scale factor must be positive")
        if int(self.c1) != self.c1 or int(self.c2) != self.c2 or (self.c1, self.c2) == (0, 0):
            raise ValidationError(f"invalid chiral index ({self.c1}, {self.c2})")
        if self.c1 * self.c1 + self.c1 * self.c2 + self.c2 * self.c2 <= 0:
            raise ValidationError(f"invalid chiral index ({self.c1}, {self.c2})")

    @property
    def L0(self) -> float:
        return math.sqrt(3 * (self.c1 ** 2 + self.c1 * self.c2 + self.c2 ** 2))

    @property
    def radius(self) -> float:
        return self.lam * self.L0 / (2 * math.pi)

    @property
    def d(self) -> int:
        return math.gcd(self.c1 + 2 * self.c2, 2 * self.c1 + self.c2)

    @property
    def t(self) -> tuple[int, int]:
        d = self.d
        return (-(self.c1 + 2 * self.c2) // d, (2 * self.c1 + self.c2) // d)

    @property
    def C(self) -> tuple[float, float]:
        s = 3 * math.pi / self.L0 ** 2
        return (s * self.c1, s * self.c2)

    @property
    def T(self) -> tuple[float, float]:
        s = 3 * math.pi / self.L0 ** 2
        return (-s * (self.c1 + 2 * self.c2), s * (2 * self.c1 + self.c2))

    @property
    def rotation_minus_theta(self) -> np.ndarray:
        """``rho(-theta)`` taking the chiral vector to the positive x axis."""
        p, q = 2 * self.c1 + self.c2, SQRT3 * self.c2
        return SQRT3 / (2 * self.L0) * np.array([[p, q], [-q, p]])

    @property
    def cell_count(self) -> int:
        """Vertices per sublattice in one period of the tube."""
        t1, t2 = self.t
        return self.c1 * t2 - self.c2 * t1


def roll_up(spec: ChiralSpec, points) -> np.ndarray:
    """Wind plane points of ``X(lambda)`` onto the cylinder of radius ``r``."""
    pts = np.asarray(points, dtype=float) @ spec.rotation_minus_theta.T
    r = spec.radius
    return np.stack([r * np.cos(pts[..., 0] / r), r * np.sin(pts[..., 0] / r), pts[..., 1]], axis=-1)


def cnt_vertex(spec: ChiralSpec, alpha) -> np.ndarray:
    """Vertex ``x(alpha)`` by the rotation-translation representation."""
    alpha = np.asarray(alpha, dtype=float)
    C1, C2 = spec.C
    T1, T2 = spec.T
    phi = T2 * alpha[..., 0] - T1 * alpha[..., 1]
    psi = C2 * alpha[..., 0] - C1 * alpha[..., 1]
    r = spec.radius
    return np.stack([r * np.cos(phi), r * np.sin(phi), -SQRT3 * r * psi], axis=-1)


def cnt_build(spec: ChiralSpec, rings: int = 1) -> DiscreteSurface:
    """``CNT(lambda, c)`` as a surface periodic along the tube axis.

    The period cell covers ``rings`` translations by the period vector ``t``.
    Rotations are chosen so normals point away from the axis.
    """
    if rings < 1:
        raise ValidationError("rings must be positive")
    c1, c2 = spec.c1, spec.c2
    t1, t2 = spec.t
    D = spec.cell_count
    if D <= 0:
        raise DegenerateChirality(f"chiral index ({c1}, {c2}) has no period cell")
    height = rings * D
    corners = np.array([[0, 0], [c1, c2], [rings * t1, rings * t2], [c1 + rings * t1, c2 + rings * t2]])
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    grid = np.stack(np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1),
                                indexing="ij"), axis=-1).reshape(-1, 2)

    def keys(alpha):
        P = alpha[..., 0] * t2 - alpha[..., 1] * t1
        Q = c1 * alpha[..., 1] - c2 * alpha[..., 0]
        return P, Q

    P, Q = keys(grid)
    inside = (P >= 0) & (P < D) & (Q >= 0) & (Q < height)
    cells = grid[inside]
    cells = cells[np.lexsort((keys(cells)[0], keys(cells)[1]))]
    index = {k: i for i, k in enumerate(zip(*keys(cells)))}
    n = len(cells)

    def locate(beta):
        P, Q = keys(beta)
        return index[(int(P % D), int(Q % height))], int(Q // height)

    edges = []
    for i, alpha in enumerate(cells):
        for step in ((0, 0), (1, 0), (0, 1)):
            j, s = locate(alpha + np.array(step))
            edges.append((2 * i, 2 * j + 1, (s,)))
    alpha_all = np.repeat(cells.astype(float), 2, axis=0)
    alpha_all[1::2] -= 1.0 / 3.0
    positions = cnt_vertex(spec, alpha_all)
    lattice = (cnt_vertex(spec, [rings * t1, rings * t2]) - cnt_vertex(spec, [0, 0]))[None, :]
    graph = TrivalentGraph.from_edges(2 * n, edges, period_rank=1)
    radial = positions * np.array([1.0, 1.0, 0.0])
    graph = orient_along(graph, positions, lattice, radial)
    try:
        return build_surface(graph, positions, lattice)
    except ValidationError as exc:
        raise DegenerateChirality(f"chiral index ({c1}, {c2}) collapses: {exc}") from exc


def cnt_moment_components(spec: ChiralSpec) -> tuple[float, float, float]:
    """``(m_x, m_y, m_z)`` of the closed-form normal at ``x(0, 0)``."""
    C1, C2 = spec.C
    T1, T2 = spec.T
    mx = C1 * math.cos(C2 / 2) * math.sin(T2 / 2) - C2 * math.cos(C1 / 2) * math.sin(T1 / 2)
    my = -C1 * math.sin(C2 / 2) * math.sin(T2 / 2) + C2 * math.sin(C1 / 2) * math.sin(T1 / 2)
    mz = math.sin(T1 / 2) * math.sin(T2 / 2) * math.sin((T1 + T2) / 2)
    return mx, my, mz


def cnt_normal_closed(spec: ChiralSpec) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized normals ``m0`` at ``x(0,0)`` and ``m1`` at ``x(-1/3,-1/3)``."""
    C1, C2 = spec.C
    T1, T2 = spec.T
    mx, my, mz = cnt_moment_components(spec)
    f = 2 * SQRT3 * spec.radius ** 2
    m0 = f * np.array([mx, my, 2 / SQRT3 * mz])
    m1 = f * np.array([C1 * math.sin(T2 / 2) * math.cos(T2 / 2) - C2 * math.sin(T1 / 2) * math.cos(T1 / 2),
                       -C1 * math.sin(T2 / 2) ** 2 - C2 * math.sin(T1 / 2) ** 2,
                       -2 / SQRT3 * mz])
    return m0, m1


def cnt_curvature_closed(spec: ChiralSpec) -> tuple[float, float]:
    """Constant mean and Gauss curvature of ``CNT(lambda, c)``.

    Raises DegenerateChirality when ``m_x`` vanishes.
    """
    mx, my, mz = cnt_moment_components(spec)
    # the components are trigonometric in angles of order one
    if abs(mx) <= 1e-12:
        raise DegenerateChirality(f"m_x vanishes for chiral index ({spec.c1}, {spec.c2})")
    r = spec.radius
    q = mx * mx + my * my
    den = q + 4 / 3 * mz * mz
    H = -mx / (2 * r) * (q + 8 / 3 * mz * mz) / den ** 1.5
    K = 4 * mz * mz * q / (3 * r * r * den * den)
    return H, K


def gc_cnt(spec: ChiralSpec, idx: GCIndex) -> ChiralSpec:
    """Chiral data of the ``(k, l)``-subdivision of a nanotube."""
    k, l = idx.k, idx.l
    mu = spec.lam / math.sqrt(idx.norm)
    return ChiralSpec(mu, k * spec.c1 - l * spec.c2, l * spec.c1 + (k + l) * spec.c2)


def eisenstein_chiral(spec: ChiralSpec) -> complex:
    """``omega c_1 + c_2``."""
    return OMEGA * spec.c1 + spec.c2


def cnt_curvature_general(spec: ChiralSpec, rings: int = 1, method: str = "weighted"):
    """Per-vertex curvatures of the built tube: ``(H array, K array)``."""
    field = curvature_field(cnt_build(spec, rings), method)
    return field.mean, field.gauss


def cnt_converge_sweep(spec: ChiralSpec, scheme: Sequence[GCIndex], general: bool = True,
                       rings: int = 1) -> list[dict]:
    """Closed-form (and optionally per-vertex) curvatures along a subdivision sequence.

    Row ``n = 0`` is the input tube; row ``n`` follows ``n`` subdivision steps.
    """
    for idx in scheme:
        if idx.norm < 2:
            raise ValidationError("every subdivision step must be strictly refining")
    rows = []
    cur = spec
    for n in range(len(scheme) + 1):
        if n:
            cur = gc_cnt(cur, scheme[n - 1])
        H, K = cnt_curvature_closed(cur)
        row = {"n": n, "mu": cur.lam, "c1": cur.c1, "c2": cur.c2, "radius": cur.radius,
               "H_closed": H, "K_closed": K, "H_general": float("nan"), "K_general": float("nan")}
        if general:
            Hg, Kg = cnt_curvature_general(cur, rings)
            row["H_general"], row["K_general"] = float(np.mean(Hg)), float(np.mean(Kg))
            row["H_spread"] = float(np.ptp(Hg))
            row["K_spread"] = float(np.ptp(Kg))
        rows.append(row)
    return rows
