"""Triad interaction coefficients and the Galerkin convolution B(W, What).

The advective nonlinearity couples modes on triads j + k = l.  In the
eigenframe its coefficient factorizes as

    B[a,b,g; j,k,l] = i * (VX_j^a . k) * (X_k^b . conj(X_l^g)),

where VX_j^a is the incompressible advection velocity of the j-mode and
the second factor is the Hermitian projection of the advected eigenvector
onto the output branch.  Coefficients here exclude the box-volume factor
|M|; the L^2 pairing helper reinstates it, so energy identities read
exactly as in the continuous system.
"""

from __future__ import annotations

import numpy as np

from ._engine import A2I, exact_resonance, mode_table
from .lattice import SLOW, SpectralState, WaveVector
from .modes import advection_vector, eigenframe, frequencies

__all__ = [
    "coeff",
    "coeff_bounds",
    "pairing",
    "apply_B",
    "apply_B_slow",
    "apply_B_fast",
    "apply_Bomega",
    "dump_coeffs_csv",
]


def coeff(domain, j, alpha, k, beta, l, gamma) -> complex:
    """Single modal interaction coefficient; zero unless j + k = l.

    j, k, l are integer triples; alpha, beta, gamma branch labels.
    """
    j = tuple(int(x) for x in j)
    k = tuple(int(x) for x in k)
    l = tuple(int(x) for x in l)
    if tuple(a + b for a, b in zip(j, k)) != l:
        return 0.0j
    jv = WaveVector.from_ints(domain, j)
    kv = WaveVector.from_ints(domain, k)
    lv = WaveVector.from_ints(domain, l)
    if (alpha != SLOW and jv.l[2] == 0) or (beta != SLOW and kv.l[2] == 0) \
            or (gamma != SLOW and lv.l[2] == 0):
        return 0.0j
    if lv.is_zero:
        return 0.0j
    adv = advection_vector(jv, alpha)
    xb = eigenframe(kv).X(beta)
    xg = eigenframe(lv).X(gamma)
    return 1j * complex(np.dot(adv, kv.k)) * complex(np.dot(xb, np.conj(xg)))


def coeff_bounds(domain, j, k, l, case: str) -> float:
    """Explicit majorant of |M| * |coeff| for the two displayed families.

    case '00s': slow-slow -> fast, bound (3|M|/sqrt2) |k'||j'| / |j|.
    case 'rs0': fast-fast -> slow, bound sqrt5 |M| (|k'| + |j'||k3|/|j3|);
    zero when j3 = 0 since the coefficient itself vanishes.
    """
    jv = WaveVector.from_ints(domain, j)
    kv = WaveVector.from_ints(domain, k)
    vol = domain.volume
    if case == "00s":
        return 3.0 * vol / np.sqrt(2.0) * kv.kperp * jv.kperp / jv.kabs
    if case == "rs0":
        if jv.l[2] == 0:
            return 0.0
        return np.sqrt(5.0) * vol * (kv.kperp
                                     + jv.kperp * abs(kv.k3) / abs(jv.k3))
    raise ValueError(f"case must be '00s' or 'rs0', got {case!r}")


def pairing(a: SpectralState, b: SpectralState) -> complex:
    """L^2 pairing |M| * sum_m a_m conj(b_m) over the common lattice."""
    a._compat(b)
    acc = 0.0j
    for key in a:
        if key in b:
            acc += a[key] * b[key].conjugate()
    return a.domain.volume * acc


def _conv(w, what, table, method):
    if method == "direct":
        return table.conv_direct(w, what)
    if method == "grid":
        return table.conv_grid(w, what)
    if method == "auto":
        return (table.conv_direct(w, what) if table.nk <= 300
                else table.conv_grid(w, what))
    raise ValueError(f"unknown convolution method {method!r}")


def apply_B(W: SpectralState, What: SpectralState, frame_time=None,
            method: str = "auto") -> SpectralState:
    """Galerkin convolution, output truncated to the shared lattice.

    With ``frame_time = (t, eps)`` the inputs are treated as rotated-frame
    coefficients: each input mode picks up its phase exp(-i omega t/eps)
    and the output the inverse phase, which reproduces the per-triad
    factor exp(i (omega_l - omega_j - omega_k) t / eps) exactly.
    """
    W._compat(What)
    table = mode_table(W.domain, W.kmax)
    w = table.dense(W)
    what = table.dense(What)
    if frame_time is not None:
        t, eps = frame_time
        E = table.phase(t, eps)
        out = _conv(E * w, E * what, table, method) / E
    else:
        out = _conv(w, what, table, method)
    return table.state(out, W.frame, W.t)


def apply_B_slow(W, What, frame_time=None, method="auto") -> SpectralState:
    return apply_B(W, What, frame_time, method).branch(SLOW)


def apply_B_fast(W, What, frame_time=None, method="auto") -> SpectralState:
    return apply_B(W, What, frame_time, method).branch((1, -1))


def apply_Bomega(We: SpectralState, Whate: SpectralState,
                 frame_time=None) -> SpectralState:
    """Frequency-weighted fast-fast -> slow transfer operator.

    Output slow coefficient at l = j + k:

        (i/2) * sum' (b[r,s,0;j,k,l] + b[s,r,0;k,j,l]) / (omega_j^r +
        omega_k^s) * w_j^r what_k^s * exp(-i (omega_j^r + omega_k^s) t/eps)

    where the primed sum omits exactly resonant pairs (decided exactly on
    cube lattices).  Inputs must be purely fast.
    """
    We._compat(Whate)
    for st, name in ((We, "first"), (Whate, "second")):
        for key in st:
            if key[3] == SLOW:
                raise ValueError(f"apply_Bomega: {name} input has slow "
                                 f"content at {key!r}")
    dom = We.domain
    out = {}
    t_eps = frame_time if frame_time is not None else (0.0, 1.0)
    for (j1, j2, j3, r), wj in We.items():
        jv = WaveVector.from_ints(dom, (j1, j2, j3))
        wjr = frequencies(jv)[A2I[r]]
        for (k1, k2, k3, s), wk in Whate.items():
            l = (j1 + k1, j2 + k2, j3 + k3)
            if l == (0, 0, 0):
                continue
            lk = dom.wavevector(*l)
            if lk.kabs > We.kmax * (1 + 1e-12):
                continue
            if exact_resonance(dom, (j1, j2, j3), r, (k1, k2, k3), s):
                continue
            wks = frequencies(dom.wavevector(k1, k2, k3))[A2I[s]]
            wsum = wjr + wks
            csum = (coeff(dom, (j1, j2, j3), r, (k1, k2, k3), s, l, 0)
                    + coeff(dom, (k1, k2, k3), s, (j1, j2, j3), r, l, 0))
            if csum == 0.0:
                continue
            t, eps = t_eps
            ph = np.exp(-1j * wsum * t / eps) if frame_time is not None else 1.0
            key = (*l, 0)
            out[key] = out.get(key, 0.0j) + 0.5j * csum / wsum * wj * wk * ph
    return We.replace(coeffs=out)


def dump_coeffs_csv(domain, kmax: float, path) -> int:
    """Write all nonzero coefficients with |j|,|k|,|l| <= kmax as CSV.

    Columns: j1,j2,j3,alpha,k1,k2,k3,beta,l1,l2,l3,gamma,re,im.
    Returns the number of rows written.
    """
    table = mode_table(domain, kmax)
    if table._triads is None:
        table._build_triads()
    jj, kk, ll, cc = table._triads
    from ._engine import I2A
    n = table.nk
    rows = 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# interaction coefficients, |M| factor excluded\n")
        fh.write(f"# domain = {domain.L1:.17g} {domain.L2:.17g} "
                 f"{domain.L3:.17g}, kmax = {kmax:.17g}\n")
        fh.write("j1,j2,j3,alpha,k1,k2,k3,beta,l1,l2,l3,gamma,re,im\n")
        order = np.lexsort((ll, kk, jj))
        for m in order:
            ja, jn = divmod(int(jj[m]), n)
            ka, kn = divmod(int(kk[m]), n)
            la, ln = divmod(int(ll[m]), n)
            j = table.ints[jn]
            k = table.ints[kn]
            l = table.ints[ln]
            fh.write(f"{j[0]},{j[1]},{j[2]},{I2A[ja]},"
                     f"{k[0]},{k[1]},{k[2]},{I2A[ka]},"
                     f"{l[0]},{l[1]},{l[2]},{I2A[la]},"
                     f"{cc[m].real:.17g},{cc[m].imag:.17g}\n")
            rows += 1
    return rows
