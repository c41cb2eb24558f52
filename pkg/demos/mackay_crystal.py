"""The Mackay crystal: harmonic and minimal realizations, and its subdivisions."""
import numpy as np

from trivalent.curvature import curvature_field
from trivalent.fixtures import mackay_data, mackay_gc_table, mackay_minimal, mackay_standard

std = mackay_standard()
f = curvature_field(std)
print(f"harmonic realization: {std.vertex_count} vertices per cell")
print(f"  mean |H| {np.mean(np.abs(f.mean)):.6f}, K in [{f.gauss.min():.4f}, {f.gauss.max():.4f}]")

minimal = mackay_minimal()
g = curvature_field(minimal)
print(f"minimal realization: max |H| {np.max(np.abs(g.mean)):.2e}")
print("  the three orbit representatives; the rest follow by symmetry:")
for row in minimal.positions[list(mackay_data()["seeds"])]:
    print("   ", np.round(row, 9))

print("\nGC_{k,0} subdivisions with the unit lattice")
print(" k  vertices    mean H    K_least    min len    max len   ratio")
for r in mackay_gc_table():
    print(f"{r['k']:2d}  {r['vertices']:8d}  {r['H_mean']:.6f}  {r['K_least']:.6f}  "
          f"{r['length_min']:.6f}  {r['length_max']:.6f}  {r['ratio']:.4f}")
