"""The Ricci tensor of a hypersurface in flat space is Weyl compatible.

The second fundamental form Omega of a hypersurface in a flat ambient space
satisfies the Codazzi equation, so it is Riemann compatible.  The Gauss
equation writes the Ricci tensor as a quadratic in Omega, and the
compatibility carries over.  A Lorentzian graph with perfect-fluid Ricci at
the origin then has a purely electric Weyl tensor for the fluid observer.

Run: python3 demos/hypersurface_ricci.py
"""

import numpy as np

from weylkit import catalog
from weylkit.classify import electric_magnetic
from weylkit.constructs import hypersurface_compat_suite, hypersurface_geometry
from weylkit.tensor import fro

for name, point in [("ellipsoid_embedding", [0.1, 0.2, -0.1, 0.05]),
                    ("hyperboloid_embedding", [0.2, 0.6, 1.0, 0.4])]:
    rep = hypersurface_compat_suite(catalog(name), point)
    print(f"{name}: Gauss {rep.gauss_residual:.1e}  Codazzi {rep.codazzi_residual:.1e}  "
          f"Ricci Weyl-compat {rep.ricci_weyl:.1e}  worst compat {rep.max_compat():.1e}")

hs = hypersurface_geometry(catalog("lorentz_graph_embedding"), [0.0, 0.0, 0.0, 0.0])
G = hs.geometry
print("\nLorentzian graph at the origin")
print("  Ricci diagonal:", np.round(np.diag(G.ricci_at), 6))
print("  |C| =", round(fro(G.weyl_lowered), 6))
pair = electric_magnetic(G, [1.0, 0.0, 0.0, 0.0])
print("  |E|, |H| relative:", ["%.2e" % x for x in pair.norms()])
