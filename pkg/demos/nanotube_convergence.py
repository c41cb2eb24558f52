"""Nanotube curvature under repeated Goldberg-Coxeter subdivision.

Subdividing keeps the tube radius fixed while the mesh gets finer, so H
approaches the cylinder value -1/(2R) and K tends to zero.
"""
from trivalent.lattice import ChiralSpec, GCIndex, cnt_converge_sweep

spec = ChiralSpec(1.0, 6, 3)
rows = cnt_converge_sweep(spec, [GCIndex(2, 0)] * 5)
target = -1 / (2 * spec.radius)
print(f"CNT(1, (6, 3)): radius {spec.radius:.6f}, cylinder H {target:.6f}")
print(" n   (c1, c2)      H closed      H general     K closed")
for row in rows:
    print(f"{row['n']:2d}  ({row['c1']:3d},{row['c2']:3d})  {row['H_closed']:+.8f}  "
          f"{row['H_general']:+.8f}  {row['K_closed']:.3e}")
