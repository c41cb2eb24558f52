"""Curvature of polyhedra inscribed in a sphere.

For vertices on a sphere of radius r with radial normals both estimators
return H = -1/r and K = 1/r**2, whatever the graph.
"""
import numpy as np

from trivalent.curvature import curvature_field
from trivalent.fixtures import polyhedron

for r in (1.0, 2.5):
    for name in ("hexahedron", "dodecahedron", "truncated_icosahedron"):
        s = polyhedron(name, r)
        for method in ("weighted", "large_triangle"):
            f = curvature_field(s, method)
            print(f"{name:22s} r={r:<4} {method:15s} "
                  f"H={np.mean(f.mean):+.6f} K={np.mean(f.gauss):.6f} "
                  f"(expected {-1 / r:+.6f}, {1 / r ** 2:.6f})")
