"""Which vectors are Weyl compatible in a type D spacetime, and what that buys.

A vector u is Weyl compatible when the cyclic sum of u_i u_m C_jkl^m vanishes.
For a timelike unit u this is the same as a vanishing magnetic part, and for a
null u it makes u a repeated principal null direction.

Run: python3 demos/compatible_vectors.py
"""

import numpy as np

from weylkit import catalog, compute_geometry
from weylkit.classify import bel_debever, electric_magnetic
from weylkit.compat import vector_compat_residual

r = 4.0
f = 1 - 2 / r
G = compute_geometry(catalog("schwarzschild"), [0.0, r, 1.1, 0.3])

candidates = {
    "d/dt": [1, 0, 0, 0],
    "d/dr": [0, 1, 0, 0],
    "d/dt + d/dr": [1, 1, 0, 0],
    "d/dtheta + d/dphi": [0, 0, 1, 1],
    "d/dt + d/dtheta (mixed blades)": [1, 0, 1, 0],
}
print("Weyl-compatibility residual")
for name, v in candidates.items():
    print(f"  {name:32s} {vector_compat_residual(v, G, 'weyl'):.2e}")

print("\nTimelike observers: |H| tracks compatibility")
for name, v in [("static", [1.0, 0, 0, 0]), ("orbiting", [1.0, 0, 0, 0.1])]:
    v = np.array(v)
    u = v / np.sqrt(-(v @ G.g_at @ v))
    h = electric_magnetic(G, u).norms()[1]
    print(f"  {name:9s} |H| = {h:.2e}   compat = {vector_compat_residual(u, G, 'weyl'):.2e}")

print("\nNull vectors: Bel-Debever level")
for name, k in [("radial out", [1 / f, 1, 0, 0]), ("radial in", [1 / f, -1, 0, 0]),
                ("tangential", [1 / np.sqrt(f), 0, 1 / r, 0])]:
    bd = bel_debever(G, k)
    print(f"  {name:11s} level {bd.level:5s} compat {vector_compat_residual(k, G, 'weyl'):.2e}")
