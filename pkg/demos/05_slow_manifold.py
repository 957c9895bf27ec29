"""Building the slow manifold order by order.

The balanced fast component is a graph U(W_slow) over the low slow modes:
U^1 = eps Linv(f_fast - B_fast(W, W)), and each iteration adds the
chain-rule correction through exact forward-mode jets.  The remainder R^n
measures how far the graph is from an invariant manifold; for small eps it
contracts by a large factor per order.  The identity
R^n = (1/eps) L (U^n - U^{n+1}) ties two independent evaluation routes
together and holds to roundoff.
"""

import numpy as np

from geobalance.experiments import default_forcing
from geobalance.lattice import DomainSpec, enforce_reality, random_state, \
    sobolev_norm
from geobalance.slowmanifold import (ManifoldApprox, contraction_scan,
                                     kappa_delta, remainder_diff,
                                     remainder_direct)

dom = DomainSpec()
kmax, mu = 4.0, 0.5
forcing = default_forcing(dom, kmax)
eps = 0.05
kappa, delta, n_cap = kappa_delta(eps, kmax, eta=2.0)
print(f"eps = {eps:g}: truncation kappa = {kappa:.3f}, "
      f"delta = eps^(1/4) = {delta:.3f}, iteration cap {n_cap}")

W = enforce_reality(random_state(dom, kappa * (1 - 1e-9), 11, scale=0.5,
                                 slow_only=True))
W = (1.0 / sobolev_norm(W, 2.0)) * W  # normalize to the unit H^2 ball

print()
print("remainder per order (direct route vs order-difference route)")
print("  n   ||U^n||      ||R^n||      two-route dev")
for n in range(4):
    a = ManifoldApprox(dom, kappa, eps, mu, forcing, order=n, n_cap=5)
    a1 = ManifoldApprox(dom, kappa, eps, mu, forcing, order=n + 1, n_cap=5)
    U = a(W)
    R = remainder_direct(a, W)
    dev = sobolev_norm(R - remainder_diff(a, a1, W)) \
        / max(1.0, sobolev_norm(R))
    print(f"  {n}   {sobolev_norm(U):.3e}   {sobolev_norm(R):.3e}   "
          f"{dev:.2e}")

print()
print("contraction threshold over an eps sweep")
rows, thresh = contraction_scan(W, forcing, mu, [0.4, 0.2, 0.1, 0.05],
                                kappa, n_hi=3)
for e, norms in rows:
    marks = " > ".join(f"{x:.2e}" for x in norms)
    print(f"  eps = {e:<5g} ||R^n|| : {marks}")
print(f"largest eps with strictly decreasing remainders: {thresh}")
