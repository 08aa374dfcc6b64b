"""Tensor quadratic splines on [0, 3]^2 from 100 random samples, then from 10.

With four samples per degree of freedom the iteration converges in a few
hundred steps.  With ten samples for 25 unknowns the sampling operator
cannot be contractive and the divergence diagnostic fires before iterating.
"""

import numpy as np

from mrsampling import BoxDomain, DivergenceError, SamplingSet, assemble_pack, build_interval_basis, gp_mask, restore, tensor_basis

dom = BoxDomain.square(0, 3)
axis = build_interval_basis(gp_mask(2, 2), 0, (0, 3))
basis = tensor_basis(axis, axis)
rng = np.random.default_rng(0)
coeffs = rng.standard_normal(len(basis))

for count in (100, 10):
    sset = SamplingSet(dom.uniform(rng, count), dom)
    pack = assemble_pack(basis, None, sset)
    print(f"{count} nodes, covering radius {sset.delta:.3f}")
    try:
        fc, state = restore(pack, pack.Phi_s @ coeffs, n_max=10_000, tol=1e-12)
    except DivergenceError as exc:
        print(f"  divergence: {exc}")
        continue
    print(f"  {state.iteration} iterations, sup error {np.abs(fc - pack.Phi_c @ coeffs).max():.2e}")
