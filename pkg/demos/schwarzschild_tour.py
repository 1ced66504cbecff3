"""Curvature, observer splitting and Petrov type outside a Schwarzschild black hole.

Run: python3 demos/schwarzschild_tour.py
"""

import numpy as np

from weylkit import catalog, compute_geometry
from weylkit.classify import electric_magnetic, orthonormal_frame, petrov_type, principal_null_directions
from weylkit.geometry import bianchi_residual, weyl_trace_residual

np.set_printoptions(precision=6, suppress=True)

spec = catalog("schwarzschild")  # M = 1
r = 4.0
G = compute_geometry(spec, [0.0, r, np.pi / 2, 0.0])

print("Gamma^r_tt =", G.gamma_at[1, 0, 0], "(expected M(1 - 2M/r)/r^2 =", (1 - 2 / r) / r ** 2, ")")
print("|Ric| =", np.linalg.norm(G.ricci_at), " vacuum, so Weyl = Riemann")
print("Bianchi residual", bianchi_residual(G), " Weyl trace residual", weyl_trace_residual(G))

# static observer: u = d/dt normalized
u = np.array([1 / np.sqrt(1 - 2 / r), 0, 0, 0])
pair = electric_magnetic(G, u)
print("\nE in the static frame (radial first), times r^3:")
print(pair.E_frame * r ** 3)
print("|H| relative:", pair.norms()[1])

rep = petrov_type(G)
print("\nPetrov type", rep.petrov_type, "eigenvalues", [round(z.real * r ** 3, 9) for z in rep.eigenvalues], "/ r^3")

# the two repeated principal null directions are radial, ingoing and outgoing
for d in principal_null_directions(G, orthonormal_frame(G, u)):
    print("PND spatial direction", np.round(d.direction, 9), "residual", d.residual)
