"""The advective nonlinearity two ways.

B(W, W~) is computed either by direct summation over closing triads
(exact, alias-free) or by a padded FFT pseudospectral product.  The two
agree to roundoff, and the quadratic energy identity Re<W, B(W~, W)> = 0
holds because advection only redistributes energy between modes.
"""

import time

import numpy as np

from geobalance.interactions import apply_B, pairing
from geobalance.lattice import DomainSpec, random_state, sobolev_norm

dom = DomainSpec()

for kmax in (3.0, 5.0):
    a = random_state(dom, kmax, 1)
    b = random_state(dom, kmax, 2)
    t0 = time.time()
    direct = apply_B(a, b, method="direct")
    t1 = time.time()
    grid = apply_B(a, b, method="grid")
    t2 = time.time()
    dev = sobolev_norm(direct - grid) / sobolev_norm(direct)
    print(f"kmax = {kmax:g}: {len(direct)} output modes")
    print(f"  direct {t1 - t0 :.3f}s, grid {t2 - t1:.3f}s, "
          f"relative deviation {dev:.2e}")

print()
w = random_state(dom, 4.0, 3)
wh = random_state(dom, 4.0, 4)
ip = pairing(apply_B(wh, w), w)
print(f"energy identity: Re<W, B(W~, W)> = {ip.real:.2e}  (zero to roundoff)")
