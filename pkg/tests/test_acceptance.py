"""Acceptance criteria; each test records one PASS/FAIL line shown in the terminal summary."""

import math
import time

import numpy as np
import pytest

from trivalent.curvature import LARGE_TRIANGLE, WEIGHTED, curvature_field, residual_formula, triangle_forms
from trivalent.curvature import star_curvatures, weingarten_residual, triangle_curvatures
from trivalent.errors import DegenerateChirality
from trivalent.fixtures import k4_lattice, mackay_data, mackay_gc_table, mackay_minimal, mackay_standard, polyhedron
from trivalent.goldberg import gc_compose_check
from trivalent.lattice import (ChiralSpec, GCIndex, HexLattice, cnt_build, cnt_converge_sweep,
                               cnt_curvature_closed, cnt_curvature_general, gc_cnt, gc_hex, hex_patch,
                               hexagonal_lattice, same_hex_lattice)
from trivalent.variation import first_variation, richardson_check, steiner_check

from conftest import ACCEPTANCE_LINES, perturbed
from goldens import MACKAY_CURVATURE, MACKAY_LENGTH, MINIMAL_MACKAY

POLYHEDRA = ("hexahedron", "dodecahedron", "truncated_icosahedron")


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def record(n, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} {n}: {detail} [{elapsed:.2f}s < {budget:g}s]")
    assert ok, detail


def random_normal_triangles(rng, count):
    x = rng.standard_normal((count, 3, 3))
    n = rng.standard_normal((count, 3, 3))
    return x, n / np.linalg.norm(n, axis=2)[..., None]


def test_criterion_01_sphere_polyhedra():
    with Clock() as c:
        worst = 0.0
        for name in POLYHEDRA:
            for r in (1.0, 2.5):
                f = curvature_field(polyhedron(name, r))
                worst = max(worst, np.abs(f.mean + 1 / r).max(), np.abs(f.gauss - 1 / r ** 2).max())
    record(1, worst <= 1e-12, f"sphere polyhedra H=-1/r, K=1/r^2, max error {worst:.1e} <= 1e-12", c.elapsed, 1)


def test_criterion_02_triangle_identities():
    rng = np.random.default_rng(2)
    with Clock() as c:
        x, n = random_normal_triangles(rng, 1000)
        f = triangle_forms(x[:, 0], x[:, 1], x[:, 2], n[:, 0], n[:, 1], n[:, 2])
        res = weingarten_residual(f)
        scale = np.maximum(1.0, np.abs(res).max(axis=(1, 2)))
        err_res = float((np.abs(res - residual_formula(f)).max(axis=(1, 2)) / scale).max())
        # Gauss: (n1 - n0) x (n2 - n0) projected on the triangle normal equals K times the area vector
        v1, v2 = x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]
        nu = np.cross(v1, v2)
        _, K = triangle_curvatures(f)
        d1, d2 = n[:, 1] - n[:, 0], n[:, 2] - n[:, 0]
        lhs = np.einsum("ij,ij->i", np.cross(d1, d2), nu)
        rhs = K * np.einsum("ij,ij->i", nu, nu)
        err_gauss = float((np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))).max())
    worst = max(err_res, err_gauss)
    record(2, worst <= 1e-12, f"1000 random triangles, residual formula {err_res:.1e}, Gauss identity "
                              f"{err_gauss:.1e} <= 1e-12", c.elapsed, 1)


def _method_gap(surface):
    """Largest disagreement relative to the curvature scale of the surface.

    Minimal surfaces have ``H`` at rounding level, so ``H`` is compared
    against ``max|H| + sqrt(max|K|)`` and ``K`` against ``max|K| + max|H|^2``.
    """
    w = curvature_field(surface, WEIGHTED)
    l = curvature_field(surface, LARGE_TRIANGLE)
    h, k = np.abs(l.mean).max(), np.abs(l.gauss).max()
    scale_h = max(h + math.sqrt(k), 1e-300)
    scale_k = max(k + h * h, 1e-300)
    return max(np.abs(w.mean - l.mean).max() / scale_h, np.abs(w.gauss - l.gauss).max() / scale_k)


def test_criterion_03_method_equivalence():
    rng = np.random.default_rng(3)
    with Clock() as c:
        fixtures = [polyhedron(n, 1.3) for n in POLYHEDRA] + [
            k4_lattice(), hex_patch(hexagonal_lattice(1.0), (3, 3)), cnt_build(ChiralSpec(1.0, 4, 2), 2),
            mackay_standard(), mackay_minimal()]
        gaps = [_method_gap(s) for s in fixtures]
        bases = fixtures[:3] + [fixtures[3], fixtures[5], fixtures[6]]
        for i in range(100):
            base = bases[i % len(bases)]
            gaps.append(_method_gap(perturbed(base, rng, 0.05)))
    worst = max(gaps)
    record(3, worst <= 1e-10, f"weighted vs large-triangle on {len(fixtures)} fixtures + 100 perturbed, "
                              f"max relative gap {worst:.1e} <= 1e-10", c.elapsed, 5)


def test_criterion_04_cnt_closed_form():
    with Clock() as c:
        worst, checked, skipped = 0.0, 0, 0
        for lam in (0.5, 1.0, 2.0):
            for c1 in range(1, 7):
                for c2 in range(1, 7):
                    spec = ChiralSpec(lam, c1, c2)
                    try:
                        H, K = cnt_curvature_closed(spec)
                    except DegenerateChirality:
                        skipped += 1
                        continue
                    Hg, Kg = cnt_curvature_general(spec)
                    worst = max(worst, np.abs(Hg - H).max() / abs(H),
                                np.abs(Kg - K).max() / K if K else 0.0)
                    checked += 1
        _, Ka = cnt_curvature_general(ChiralSpec(1.0, 1, 1))
        Ka_closed = cnt_curvature_closed(ChiralSpec(1.0, 1, 1))[1]
        arm = max(np.abs(Ka).max(), abs(Ka_closed))
        Hz, Kz = cnt_curvature_general(ChiralSpec(1.0, 2, 0))
        Hzc, Kzc = cnt_curvature_closed(ChiralSpec(1.0, 2, 0))
        zig = max(np.abs(Hz - Hzc).max() / abs(Hzc), np.abs(Kz - Kzc).max() / Kzc)
        zig_ok = abs(Hzc + 0.9526) < 1e-4 and abs(Kzc - 0.3450) < 1e-4
    ok = worst <= 1e-10 and arm <= 1e-14 and zig <= 1e-10 and zig_ok
    record(4, ok, f"CNT closed form vs per-vertex on {checked} specs ({skipped} degenerate) rel {worst:.1e}; "
                  f"armchair |K| {arm:.1e}; zigzag H={Hzc:.6f} K={Kzc:.6f} rel {zig:.1e}", c.elapsed, 10)


TABLE_ONE = [
    ((2, 0), (0, 1 / 2), (-math.sqrt(3) / 4, 1 / 4), 1 / 2),
    ((3, 0), (0, 2 / 3), (-math.sqrt(3) / 6, 1 / 6), 1 / 3),
    ((4, 0), (0, 3 / 4), (-math.sqrt(3) / 8, 1 / 8), 1 / 4),
    ((2, 1), (-math.sqrt(3) / 14, 9 / 14), (-math.sqrt(3) / 7, 2 / 7), 1 / math.sqrt(7)),
    ((3, 1), (-math.sqrt(3) / 26, 19 / 26), (-3 * math.sqrt(3) / 26, 5 / 26), 1 / math.sqrt(13)),
]


def test_criterion_05_gc_hex_table():
    X = HexLattice((0.0, 0.0), (-math.sqrt(3) / 2, 0.5))
    with Clock() as c:
        worst = 0.0
        for (k, l), w, zeta, ratio in TABLE_ONE:
            Y = gc_hex(X, GCIndex(k, l))
            worst = max(worst, np.abs(np.subtract(Y.u, w)).max(), np.abs(np.subtract(Y.xi, zeta)).max(),
                        abs(np.hypot(*Y.xi) / np.hypot(*X.xi) - ratio))
    record(5, worst <= 1e-14, f"hexagonal GC table, 5 rows, max error {worst:.1e} <= 1e-14", c.elapsed, 1)


def test_criterion_06_gc_composition():
    X = HexLattice((0.0, 0.0), (-math.sqrt(3) / 2, 0.5))
    with Clock() as c:
        hex_ok = all(same_hex_lattice(gc_hex(gc_hex(X, GCIndex(*a)), GCIndex(*b)), gc_hex(X, GCIndex(*a) * GCIndex(*b)))
                     for a, b in [((2, 0), (2, 0)), ((2, 1), (3, 1)), ((1, 1), (2, 1))])
        cube_ok = gc_compose_check(polyhedron("hexahedron").graph, 2, 2)
        dodeca_ok = gc_compose_check(polyhedron("dodecahedron").graph, 2, 3)
    record(6, hex_ok and cube_ok and dodeca_ok,
           f"Eisenstein composition on lattices {hex_ok}; cube GC(2)GC(2)~GC(4) {cube_ok}; "
           f"dodecahedron GC(3)GC(2)~GC(6) {dodeca_ok}", c.elapsed, 30)


def test_criterion_07_cnt_subdivision_identities():
    with Clock() as c:
        ok, radius_err = True, 0.0
        for lam in (0.5, 1.0, 2.0):
            for c1 in range(1, 7):
                for c2 in range(0, 7):
                    s = ChiralSpec(lam, c1, c2)
                    ok &= gc_cnt(s, GCIndex(1, 0)) == s
                    for k in range(2, 6):
                        d = gc_cnt(s, GCIndex(k, 0))
                        ok &= (d.c1, d.c2) == (k * c1, k * c2) and math.isclose(d.lam, lam / k, rel_tol=1e-15)
                        radius_err = max(radius_err, abs(d.radius - s.radius))
                        for l in range(0, 3):
                            radius_err = max(radius_err, abs(gc_cnt(s, GCIndex(k, l)).radius - s.radius))
                s = ChiralSpec(lam, c1, c1)
                for k in range(1, 6):
                    d = gc_cnt(s, GCIndex(k, k))
                    ok &= (d.c1, d.c2) == (0, 3 * k * c1) and math.isclose(d.lam, lam / (math.sqrt(3) * k),
                                                                           rel_tol=1e-15)
                    radius_err = max(radius_err, abs(d.radius - s.radius))
    record(7, ok and radius_err <= 1e-12, f"GC(1,0), GC(k,0), GC(k,k) tube identities {ok}; "
                                          f"radius drift {radius_err:.1e} <= 1e-12", c.elapsed, 1)


def test_criterion_08_convergence():
    with Clock() as c:
        rows = cnt_converge_sweep(ChiralSpec(1.0, 4, 2), [GCIndex(2, 0)] * 6)
        r = rows[0]["radius"]
        herr = [abs(row["H_closed"] + 1 / (2 * r)) * 2 * r for row in rows]
        kratio = [row["K_closed"] / rows[0]["K_closed"] for row in rows]
        agree = max(max(abs(row["H_general"] - row["H_closed"]) / abs(row["H_closed"]),
                        abs(row["K_general"] - row["K_closed"]) / row["K_closed"]) for row in rows)
    monotone = all(a > b for a, b in zip(herr[2:], herr[3:])) and all(a > b for a, b in zip(kratio[2:], kratio[3:]))
    # K(1) read as the input tube; the first subdivision is checked as well
    k_first = rows[-1]["K_closed"] / rows[1]["K_closed"]
    ok = herr[-1] < 0.01 and max(kratio[-1], k_first) < 0.01 and monotone and agree <= 1e-9
    record(8, ok, f"(4,2) after six GC(2,0): H error {herr[-1]:.2e} < 0.01, K6/K1 {kratio[-1]:.2e} "
                  f"(vs first subdivision {k_first:.2e}) < 0.01, "
                  f"monotone {monotone}, per-vertex agreement {agree:.1e}", c.elapsed, 30)


def test_criterion_09_variation():
    rng = np.random.default_rng(9)
    with Clock() as c:
        cube = polyhedron("hexahedron", 1.0)
        bumpy = perturbed(polyhedron("truncated_icosahedron", 1.0), rng, 0.05)
        fv_err, ratios = 0.0, []
        for s in (cube, bumpy):
            f = curvature_field(s)
            fv_err = max(fv_err, abs(first_variation(s, f.normal) + 2 * np.sum(f.mean * f.area)))
            ratios += list(richardson_check(s, rng.standard_normal((s.vertex_count, 3))).ratios)
        steiner = 0.0
        for name in POLYHEDRA:
            s = polyhedron(name, 1.7)
            for t in (0.1, 0.5, -0.3):
                actual, predicted = steiner_check(s, t)
                steiner = max(steiner, np.abs(actual - predicted).max())
    ok = fv_err <= 1e-10 and all(2 <= q <= 8 for q in ratios) and steiner <= 1e-12
    record(9, ok, f"first variation vs -2 sum HA {fv_err:.1e}; Richardson ratios "
                  f"{min(ratios):.2f}..{max(ratios):.2f} in [2,8]; Steiner {steiner:.1e}", c.elapsed, 5)


def test_criterion_10_harmonic_minimal():
    from test_realization import conformal_harmonic_star

    rng = np.random.default_rng(10)
    with Clock() as c:
        s = k4_lattice()
        f = curvature_field(s)
        spread = float(np.ptp(s.edge_lengths()))
        hmax = float(np.abs(f.mean).max())
        kpos = bool(np.all(f.gauss > 0))
        star_h = 0.0
        for _ in range(100):
            m, e, nbr = conformal_harmonic_star(rng)
            for method in (WEIGHTED, LARGE_TRIANGLE):
                star_h = max(star_h, abs(star_curvatures(e[None], nbr[None], method)[0][0]))
    ok = spread <= 1e-12 and hmax <= 1e-10 and kpos and star_h <= 1e-9
    record(10, ok, f"K4 edge spread {spread:.1e}, |H| {hmax:.1e}, K>0 {kpos}; 100 conformal harmonic stars "
                   f"max |H| {star_h:.1e}", c.elapsed, 5)


def test_criterion_11_minimal_mackay():
    with Clock() as c:
        s = mackay_minimal()
        seeds = list(mackay_data()["seeds"])
        err = float(np.abs(s.positions[seeds] - MINIMAL_MACKAY).max())
    record(11, err <= 1e-9, f"minimal Mackay sqrt(187) coordinates, max error {err:.1e} <= 1e-9", c.elapsed, 5)


def test_criterion_12_mackay_tables():
    with Clock() as c:
        rows = mackay_gc_table((1, 2, 3, 4, 5))
    worst, tight, oct_ok = 0.0, 0.0, True
    for row in rows:
        ave, hmin, hmax, kmin, _ = MACKAY_CURVATURE[row["k"]]
        lmin, lmax, ratio = MACKAY_LENGTH[row["k"]]
        # the published "min K" column is the K of smallest magnitude
        diffs = [row["H_abs_min"] - hmin, row["H_abs_max"] - hmax, row["K_least"] - kmin,
                 row["length_min"] - lmin, row["length_max"] - lmax, row["ratio"] - ratio]
        worst = max(worst, max(abs(d) for d in diffs))
        tight = max(tight, max(abs(d) for d in diffs[:2] + diffs[3:5]))
        oct_ok &= row["max_edge_on_octagon"] and abs(row["H_mean"]) <= 1e-6
    record(12, worst <= 1e-3 and oct_ok,
           f"Mackay tables k=1..5 max deviation {worst:.1e} <= 1e-3 (curvature and length columns "
           f"{tight:.1e}); average H and octagon argmax {oct_ok}", c.elapsed, 300)
