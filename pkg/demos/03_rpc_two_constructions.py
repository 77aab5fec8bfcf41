"""Ruelle probability cascades, built two independent ways.

The same random overlap structure arises from (a) the coalescent time
change q_ij = x^{-1}(e^{-tau_ij}) and (b) sampling atoms of the
hierarchical Poisson-Dirichlet cascade; their overlap laws must agree.
Also shows the degenerate families and the exact L1 calculus on
parameter functions.
"""

import numpy as np

from spinglass import (
    ParameterFunction,
    l1_distance,
    pd_cascade,
    right_cont_inverse,
    rng_from,
    rpc_overlaps,
    sample_from_directing,
    sample_pair_overlaps,
)

x = ParameterFunction.one_step(0.5, 0.5)

print("=" * 64)
print("1. The time change")
print("=" * 64)
print(f"x: value {x.values[0]} on [0, {x.breakpoints[0]}), then 1")
print(f"inverse at u = 0.3: {right_cont_inverse(x, 0.3)}   (below m: diverged pair)")
print(f"inverse at u = 0.8: {right_cont_inverse(x, 0.8)}   (above m: same cluster)")
q = rpc_overlaps(x, 6, rng_from(3, "demo3"))
print("a 6-replica overlap matrix from one coalescent run:")
print(np.array2string(q, precision=2))

print()
print("=" * 64)
print("2. The cascade, and the cross-construction match")
print("=" * 64)
n_tc, n_blocks, n_inner = 40000, 2000, 20
tc = np.array(
    [rpc_overlaps(x, 2, rng_from(3, "demo3-tc", i))[0, 1] for i in range(n_tc)]
)
ca = []
for b in range(n_blocks):
    rng = rng_from(3, "demo3-ca", b)
    mu = pd_cascade(x, 2000, rng)
    ca.append(sample_pair_overlaps(mu, n_inner, rng))
ca = np.concatenate(ca)
print(f"          P(q = 0)   P(q = 0.5)")
print(f"time change  {np.mean(tc == 0):.4f}      {np.mean(tc == 0.5):.4f}")
print(f"cascade      {np.mean(ca == 0):.4f}      {np.mean(ca == 0.5):.4f}")
print(f"(theory: 1 - m = 0.5 for the q* atom)")
mu = pd_cascade(x, 2000, rng_from(3, "demo3-mu"))
print(f"one cascade realization: {mu.n_atoms} atoms, "
      f"top weight {mu.weights.max():.3f}, truncation tail ~ {mu.truncation_tail:.1e}")
print("3 replicas sampled from it:")
print(np.array2string(sample_from_directing(mu, 3, rng_from(3, "demo3-s")), precision=2))

print()
print("=" * 64)
print("3. Degenerate families and the L1 calculus")
print("=" * 64)
ones = ParameterFunction.constant_one()
delta1 = ParameterFunction((1.0,), (0.0, 1.0))
print(f"x == 1        -> {rpc_overlaps(ones, 3, rng_from(3, 'demo3-d1'))[0].tolist()} (all ones)")
print(f"x = 0 on [0,1) -> {rpc_overlaps(delta1, 3, rng_from(3, 'demo3-d2'))[0].tolist()} (identity row)")
print(f"L1(one-step, x == 1) = {l1_distance(x, ones):.3f}  (= (1-m) q* = 0.25)")
print(f"E[q12] = 1 - int x   = {x.mean_overlap():.3f}")
