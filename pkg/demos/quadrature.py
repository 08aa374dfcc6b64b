"""Integrate x^3 - 2x^2 + 1 over [0, 4] from seven irregular samples.

INTEGRATE runs the RESTORE iteration on the weight side, so the estimate
after n steps is a weighted sum of the samples.  The limit is the exact
integral because the cubic lies in the spline space.
"""

import numpy as np

from mrsampling import BoxDomain, SamplingSet, assemble_pack, basis_weights, build_interval_basis, gp_mask, integrate

nodes = np.array([0.1, 0.9, 1.55, 1.6, 2.4, 3.2, 3.9])
basis = build_interval_basis(gp_mask(3, 3), 0, (0, 4))
pack = assemble_pack(basis, None, SamplingSet(nodes, BoxDomain.interval(0, 4)))

exact = 4.0**4 / 4 - 2 * 4.0**3 / 3 + 4.0
value, trace = integrate(pack, basis_weights(basis), nodes**3 - 2 * nodes**2 + 1, n_max=2000, tol=None, reference=exact)
print(f"exact integral {exact:.12f}")
for n, est, err in trace.checkpoints([0, 50, 100, 300, 1000, 2000]):
    print(f"iteration {n:5d}  estimate {est:.12f}  error {err:.2e}")
