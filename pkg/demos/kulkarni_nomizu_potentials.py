"""Building curvature tensors from pairs of symmetric tensors.

The Kulkarni-Nomizu product of two commuting symmetric tensors a and b has
all the algebraic symmetries of a Riemann tensor, and both factors are
compatible with it.  It is traceless, so Weyl-like, exactly when a linear
condition on the eigenvalues holds.  Given b, solve_kn_potential searches for
an a satisfying it.

Run: python3 demos/kulkarni_nomizu_potentials.py
"""

import numpy as np

from weylkit.constructs import kn_compat_residuals, kn_trace_residual, kulkarni_nomizu, solve_kn_potential
from weylkit.errors import NoPotentialError
from weylkit.tensor import MetricAt

np.set_printoptions(precision=4, suppress=True)
eta = MetricAt.from_matrix(np.diag([-1.0, 1, 1, 1]))

for b in (np.diag([1.0, -1, 1, -1]), np.diag([-0.7, 0.7, 1.3, -1.3]), np.diag([1.0, -1, 0, 0]),
          np.diag([-1.0, 1, 1, 1]), np.diag([1.0, 2, 3, 4])):
    print("b_ab =", np.diag(b), " eigenvalues of g^-1 b:", np.linalg.eigvals(eta.g_inv.components @ b).real)
    try:
        pot = solve_kn_potential(b, eta)
    except NoPotentialError as exc:
        print("   no potential:", exc)
        continue
    K = kulkarni_nomizu(pot.a, b)
    print("   a =", np.diag(pot.a), " solutions:", pot.solution_dim)
    print("   trace residual %.1e  |K| %.3f  compat %s" % (
        kn_trace_residual(pot.a, b, eta), np.linalg.norm(K),
        tuple("%.1e" % x for x in kn_compat_residuals(pot.a, b, eta))))
