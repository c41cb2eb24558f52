import math

import numpy as np
import pytest

from trivalent.curvature import curvature_field, vertex_normal
from trivalent.errors import DegenerateChirality, ValidationError
from trivalent.goldberg import face_trace
from trivalent.lattice import (OMEGA, ChiralSpec, GCIndex, HexLattice, cnt_build, cnt_converge_sweep,
                               cnt_curvature_closed, cnt_curvature_general, cnt_moment_components,
                               cnt_normal_closed, cnt_vertex, eisenstein_chiral, gc_cnt, gc_hex,
                               gc_hex_base_formula, gc_hex_zeta, hex_patch, hexagonal_lattice, rho,
                               roll_up, same_hex_lattice)

S3 = math.sqrt(3)
TABLE_X = HexLattice((0.0, 0.0), (-S3 / 2, 0.5))
TABLE_ROWS = [
    ((2, 0), (0, 1 / 2), (-S3 / 4, 1 / 4), 1 / 2),
    ((3, 0), (0, 2 / 3), (-S3 / 6, 1 / 6), 1 / 3),
    ((4, 0), (0, 3 / 4), (-S3 / 8, 1 / 8), 1 / 4),
    ((2, 1), (-S3 / 14, 9 / 14), (-S3 / 7, 2 / 7), 1 / math.sqrt(7)),
    ((3, 1), (-S3 / 26, 19 / 26), (-3 * S3 / 26, 5 / 26), 1 / math.sqrt(13)),
]
SPECS = [ChiralSpec(lam, c1, c2) for lam in (0.5, 1.0, 2.0) for c1 in range(1, 7) for c2 in range(1, 7)]


def test_bonds():
    X = hexagonal_lattice(1.0)
    assert np.allclose(np.linalg.norm(X.bonds, axis=1), 1.0, atol=1e-15)
    assert np.allclose(X.bonds.sum(axis=0), 0.0, atol=1e-15)
    assert abs(np.linalg.det(np.array([X.a1, X.a2]))) > 0
    with pytest.raises(ValidationError):
        hexagonal_lattice(0.0)
    with pytest.raises(ValidationError):
        HexLattice((0, 0), (0, 0))


def test_hex_patch():
    X = hexagonal_lattice(1.0)
    s = hex_patch(X, (3, 2))
    assert s.vertex_count == 12 and s.graph.period_rank == 2
    assert np.allclose(s.edge_lengths(), 1.0, atol=1e-14)
    f = curvature_field(s)
    assert np.abs(f.mean).max() < 1e-14 and np.abs(f.gauss).max() < 1e-14
    faces = face_trace(s.graph)
    assert faces.euler_characteristic == 0
    assert set(faces.census()) == {6}
    # the B vertex with alpha = -(1/3, 1/3) is the neighbour of the A vertex at u
    assert np.allclose(X.point([-1 / 3, -1 / 3]), X.bonds[0])
    with pytest.raises(ValidationError):
        hex_patch(X, (0, 1))


@pytest.mark.parametrize("row", TABLE_ROWS, ids=lambda r: f"{r[0]}")
def test_gc_hex_table(row):
    (k, l), w, zeta, ratio = row
    Y = gc_hex(TABLE_X, GCIndex(k, l))
    assert np.abs(np.subtract(Y.u, w)).max() <= 1e-14
    assert np.abs(np.subtract(Y.xi, zeta)).max() <= 1e-14
    assert abs(np.hypot(*Y.xi) / np.hypot(*TABLE_X.xi) - ratio) <= 1e-14


def test_gc_hex_identity_and_angle():
    assert same_hex_lattice(gc_hex(TABLE_X, GCIndex(1, 0)), TABLE_X)
    X = hexagonal_lattice(1.7)
    for k in range(1, 5):
        for l in range(0, 4):
            idx = GCIndex(k, l)
            zeta = gc_hex_zeta(X.xi, idx)
            nz, nx = np.linalg.norm(zeta), np.linalg.norm(X.xi)
            assert nz == pytest.approx(nx / math.sqrt(idx.norm), rel=1e-14)
            assert zeta @ X.xi / (nz * nx) == pytest.approx((2 * k + l) / (2 * math.sqrt(idx.norm)), rel=1e-14)


def test_gc_hex_base_in_subdivided_lattice():
    for k, l in [(2, 0), (3, 1), (2, 3)]:
        Y = gc_hex(TABLE_X, GCIndex(k, l))
        other = HexLattice(tuple(gc_hex_base_formula(TABLE_X, GCIndex(k, l))), Y.xi)
        assert same_hex_lattice(Y, other)


def test_gc_hex_refines_translations():
    for k, l in [(2, 0), (3, 0), (2, 1), (3, 2)]:
        Y = gc_hex(TABLE_X, GCIndex(k, l))
        coeff = np.linalg.solve(np.array([Y.a1, Y.a2]).T, np.array([TABLE_X.a1, TABLE_X.a2]).T)
        assert np.allclose(coeff, np.round(coeff), atol=1e-12)
        assert abs(np.linalg.det(np.round(coeff))) == pytest.approx(GCIndex(k, l).norm)


@pytest.mark.parametrize("z1,z2", [((2, 0), (2, 0)), ((2, 1), (1, 1)), ((3, 1), (2, 0)), ((1, 2), (2, 1))])
def test_gc_hex_eisenstein_composition(z1, z2):
    a, b = GCIndex(*z1), GCIndex(*z2)
    assert (a * b).eisenstein == pytest.approx(a.eisenstein * b.eisenstein, abs=1e-12)
    twice = gc_hex(gc_hex(TABLE_X, a), b)
    once = gc_hex(TABLE_X, a * b)
    assert same_hex_lattice(twice, once)


def test_gc_index_validation():
    with pytest.raises(ValidationError):
        GCIndex(0, 0)
    with pytest.raises(ValidationError):
        GCIndex(-1, 2)
    assert GCIndex(2, 1).norm == 7


def test_chiral_spec_derived():
    s = ChiralSpec(1.0, 4, 2)
    assert s.t == (-4, 5)
    assert s.radius == pytest.approx(math.sqrt(3 * 28) / (2 * math.pi))
    R = s.rotation_minus_theta
    assert np.allclose(R @ R.T, np.eye(2), atol=1e-15)
    c = 4 * hexagonal_lattice(1.0).a1 + 2 * hexagonal_lattice(1.0).a2
    assert np.allclose(R @ c, [np.linalg.norm(c), 0], atol=1e-12)
    with pytest.raises(ValidationError):
        ChiralSpec(1.0, 0, 0)
    with pytest.raises(ValidationError):
        ChiralSpec(-1.0, 1, 1)


@pytest.mark.parametrize("c", [(4, 2), (2, 0), (3, 3), (5, 1), (1, 4)])
def test_cnt_positions(c):
    spec = ChiralSpec(1.0, *c)
    assert np.allclose(cnt_vertex(spec, [0, 0]), [spec.radius, 0, 0], atol=1e-15)
    s = cnt_build(spec, rings=2)
    assert np.abs(np.hypot(s.positions[:, 0], s.positions[:, 1]) - spec.radius).max() <= 1e-12
    # the rotation-translation form equals winding the plane lattice
    alpha = np.array([[0, 0], [1, 0], [2, -1], [-1 / 3, -1 / 3], [2 / 3, 5 / 3]])
    X = hexagonal_lattice(1.0)
    assert np.allclose(cnt_vertex(spec, alpha), roll_up(spec, X.point(alpha)), atol=1e-12)


def test_cnt_keeps_tube_topology():
    s = cnt_build(ChiralSpec(1.0, 4, 2), rings=3)
    faces = face_trace(s.graph)
    assert set(faces.census()) == {6}
    assert faces.euler_characteristic == 0
    assert s.vertex_count == 2 * 3 * ChiralSpec(1.0, 4, 2).cell_count


def test_cnt_normals_closed():
    for spec in [ChiralSpec(1.0, 4, 2), ChiralSpec(2.0, 3, 1), ChiralSpec(0.5, 2, 5)]:
        m0, m1 = cnt_normal_closed(spec)
        assert np.linalg.norm(m1) == pytest.approx(np.linalg.norm(m0), rel=1e-12)
        s = cnt_build(spec)
        x0 = int(np.argmin(np.linalg.norm(s.positions - [spec.radius, 0, 0], axis=1)))
        assert np.allclose(m0 / np.linalg.norm(m0), vertex_normal(s, x0), atol=1e-12)
    assert cnt_moment_components(ChiralSpec(1.0, 3, 3))[2] == pytest.approx(0, abs=1e-15)


def test_armchair_and_zigzag():
    H, K = cnt_curvature_closed(ChiralSpec(1.0, 1, 1))
    r = 3 / (2 * math.pi)
    assert K == 0.0
    assert H == pytest.approx(-math.cos(math.pi / 6) / (2 * r), abs=1e-14)
    assert H == pytest.approx(-0.9069, abs=1e-4)
    Hz, Kz = cnt_curvature_closed(ChiralSpec(1.0, 2, 0))
    assert Hz == pytest.approx(-0.9526, abs=1e-4) and Kz == pytest.approx(0.3450, abs=1e-4)
    Hg, Kg = cnt_curvature_general(ChiralSpec(1.0, 2, 0))
    assert np.allclose(Hg, Hz, rtol=1e-10) and np.allclose(Kg, Kz, rtol=1e-10)
    _, Ka = cnt_curvature_general(ChiralSpec(1.0, 1, 1))
    assert np.abs(Ka).max() <= 1e-14


def test_degenerate_chirality():
    with pytest.raises(DegenerateChirality):
        cnt_curvature_closed(ChiralSpec(1.0, 1, 0))
    with pytest.raises(DegenerateChirality):
        cnt_curvature_closed(ChiralSpec(2.0, 0, 1))


def test_closed_form_matches_general_on_grid():
    worst = 0.0
    for spec in SPECS:
        H, K = cnt_curvature_closed(spec)
        Hg, Kg = cnt_curvature_general(spec)
        worst = max(worst, np.abs(Hg - H).max() / abs(H))
        worst = max(worst, np.abs(Kg - K).max() / K if K else np.abs(Kg).max())
        assert K >= 0
    assert worst <= 1e-10


def test_scaling_law():
    for c in [(4, 2), (2, 0), (3, 5)]:
        H1, K1 = cnt_curvature_closed(ChiralSpec(1.0, *c))
        H3, K3 = cnt_curvature_closed(ChiralSpec(3.0, *c))
        assert H3 == pytest.approx(H1 / 3, rel=1e-13) and K3 == pytest.approx(K1 / 9, rel=1e-13)


def test_subdivision_examples():
    for lam in (0.5, 1.0, 2.0):
        for c1 in range(1, 6):
            for c2 in range(0, 6):
                s = ChiralSpec(lam, c1, c2)
                assert gc_cnt(s, GCIndex(1, 0)) == s
                for k in range(2, 5):
                    d = gc_cnt(s, GCIndex(k, 0))
                    assert (d.c1, d.c2) == (k * c1, k * c2) and d.lam == pytest.approx(lam / k, rel=1e-15)
            s = ChiralSpec(lam, c1, c1)
            for k in range(1, 4):
                d = gc_cnt(s, GCIndex(k, k))
                assert (d.c1, d.c2) == (0, 3 * k * c1)
                assert d.lam == pytest.approx(lam / (S3 * k), rel=1e-15)


def test_subdivision_radius_and_eisenstein():
    omega = complex(0.5, S3 / 2)
    for spec in SPECS[::5]:
        for k, l in [(2, 0), (2, 1), (3, 2), (1, 1)]:
            d = gc_cnt(spec, GCIndex(k, l))
            assert abs(d.radius - spec.radius) <= 1e-12
            lhs = omega * d.c1 + d.c2
            rhs = (omega * spec.c1 + spec.c2) * (k + omega.conjugate() * l)
            assert abs(lhs - rhs) <= 1e-12
            assert eisenstein_chiral(d) == pytest.approx(lhs, abs=1e-12)


def test_subdivision_composition():
    spec = ChiralSpec(1.0, 4, 2)
    for z1, z2 in [((2, 0), (2, 1)), ((1, 1), (3, 1)), ((2, 1), (2, 1))]:
        a, b = GCIndex(*z1), GCIndex(*z2)
        twice = gc_cnt(gc_cnt(spec, a), b)
        once = gc_cnt(spec, b * a)
        assert (twice.c1, twice.c2) == (once.c1, once.c2)
        assert twice.lam == pytest.approx(once.lam, rel=1e-14)


def test_converge_sweep():
    rows = cnt_converge_sweep(ChiralSpec(1.0, 4, 2), [GCIndex(2, 0)] * 6)
    r = rows[0]["radius"]
    assert all(abs(row["radius"] - r) <= 1e-12 for row in rows)
    herr = [abs(row["H_closed"] + 1 / (2 * r)) * 2 * r for row in rows]
    K = [row["K_closed"] for row in rows]
    assert herr[-1] < 0.01 and K[-1] / K[0] < 0.01
    assert all(a > b for a, b in zip(herr[1:], herr[2:]))
    assert all(a > b for a, b in zip(K[1:], K[2:]))
    for row in rows:
        assert row["H_general"] == pytest.approx(row["H_closed"], rel=1e-10)
        assert row["K_general"] == pytest.approx(row["K_closed"], rel=1e-9, abs=1e-14)


def test_armchair_sweep():
    rows = cnt_converge_sweep(ChiralSpec(1.0, 1, 1), [GCIndex(2, 0)] * 4, general=False)
    assert all(row["c1"] == row["c2"] and row["K_closed"] == 0 for row in rows)


def test_sweep_rejects_identity_step():
    with pytest.raises(ValidationError):
        cnt_converge_sweep(ChiralSpec(1.0, 4, 2), [GCIndex(1, 0)])


def test_rho():
    assert np.allclose(rho(math.pi / 2) @ [1, 0], [0, 1])
    assert OMEGA ** 3 == pytest.approx(-1)
