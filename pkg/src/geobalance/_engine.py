"""Dense vectorized kernels shared by the convolution, dynamics and
manifold modules.

A :class:`ModeTable` freezes the mode enumeration for one (domain, cutoff)
pair and carries per-mode arrays: eigenvectors, advection vectors and
frequencies, all built from the closed forms in :mod:`geobalance.modes`.
Dense states are complex arrays of shape (3, nk): row 0 = slow branch,
row 1 = plus branch, row 2 = minus branch, columns in the fixed
lexicographic wavevector order.  Unavailable slots (fast rows at l3 = 0)
are structurally zero.

Two interchangeable convolution kernels are provided:

* ``conv_direct``: summation over a precomputed triad index table (the
  reference path; exact Galerkin convolution, built lazily).
* ``conv_grid``: pseudospectral product on a padded FFT grid, alias-free
  because the per-axis grid size is at least 3*lmax+1 (the fast path, and
  an independent physical-space oracle for the direct path).
"""

from __future__ import annotations

import math

import numpy as np

from .lattice import DomainSpec, SpectralState, wavevectors
from .modes import advection_vector, eigenframe, frequencies

# branch label <-> row index
I2A = (0, 1, -1)
A2I = {0: 0, 1: 1, -1: 2}


def _next_fast_len(n: int) -> int:
    """Smallest 5-smooth integer >= n (keeps FFTs fast without scipy)."""
    while True:
        m = n
        for p in (2, 3, 5):
            while m % p == 0:
                m //= p
        if m == 1:
            return n
        n += 1


class ModeTable:
    """Frozen per-mode arrays for one (domain, kmax) lattice."""

    def __init__(self, domain: DomainSpec, kmax: float, strict: bool = False):
        self.domain = domain
        self.kmax = float(kmax)
        self.strict = bool(strict)
        kvs = wavevectors(domain, kmax)
        if strict:
            kvs = [kv for kv in kvs if kv.kabs < kmax]
        self.nk = nk = len(kvs)
        self.ints = np.array([kv.l for kv in kvs], dtype=np.int64).reshape(nk, 3)
        self.kphys = np.array([kv.k for kv in kvs], dtype=float).reshape(nk, 3)
        self.kabs = np.sqrt((self.kphys ** 2).sum(axis=1))
        self.fast_ok = self.ints[:, 2] != 0

        self.X = np.zeros((3, nk, 3), dtype=complex)
        self.VX = np.zeros((3, nk, 3), dtype=complex)
        self.omega = np.zeros((3, nk), dtype=float)
        for n, kv in enumerate(kvs):
            fr = eigenframe(kv)
            self.X[0, n] = fr.X0
            self.VX[0, n] = advection_vector(kv, 0)
            if fr.has_fast:
                self.X[1, n] = fr.X_plus
                self.X[2, n] = fr.X_minus
                self.VX[1, n] = advection_vector(kv, 1)
                self.VX[2, n] = advection_vector(kv, -1)
                self.omega[1, n] = fr.omega_plus
                self.omega[2, n] = fr.omega_minus

        self.row = {tuple(l): n for n, l in enumerate(self.ints.tolist())}
        # dense integer-triple -> row lookup for vectorized convolutions
        self._span = span = int(np.abs(self.ints).max(initial=0))
        side = 2 * span + 1
        lut = np.full((side, side, side), -1, dtype=np.int64)
        for n, l in enumerate(self.ints):
            lut[l[0] + span, l[1] + span, l[2] + span] = n
        self._lut = lut
        self._triads = None
        self._grid = None

    # -- state <-> dense ---------------------------------------------------
    def key_slot(self, key):
        return A2I[key[3]], self.row[key[:3]]

    def dense(self, state: SpectralState) -> np.ndarray:
        w = np.zeros((3, self.nk), dtype=complex)
        for key, v in state.items():
            ai, n = self.key_slot(key)
            w[ai, n] = v
        return w

    def state(self, w: np.ndarray, frame="rotated", t=0.0) -> SpectralState:
        c = {}
        for ai in range(3):
            for n in np.nonzero(w[ai])[0]:
                l = self.ints[n]
                c[(int(l[0]), int(l[1]), int(l[2]), I2A[ai])] = w[ai, n]
        return SpectralState(self.domain, self.kmax, c, frame, t)

    def rows_of(self, ints) -> np.ndarray:
        """Rows for an (m,3) int array; -1 where outside the table."""
        s = self._span
        ok = (np.abs(ints) <= s).all(axis=1)
        out = np.full(len(ints), -1, dtype=np.int64)
        ii = ints[ok] + s
        out[ok] = self._lut[ii[:, 0], ii[:, 1], ii[:, 2]]
        return out

    def phase(self, t: float, eps: float) -> np.ndarray:
        """exp(-i omega t / eps), shape (3, nk); converts rotated -> lab."""
        return np.exp(-1j * self.omega * (t / eps))

    def sob_norm(self, w: np.ndarray, s: float = 0.0) -> float:
        wt = self.kabs ** (2.0 * s) if s else 1.0
        return math.sqrt(float((wt * (np.abs(w) ** 2).sum(axis=0)).sum()))

    # -- direct triad table ------------------------------------------------
    def _build_triads(self):
        jj, kk, ll, cc = [], [], [], []
        nk = self.nk
        for jn in range(nk):
            lint = self.ints[jn][None, :] + self.ints
            lrow = self.rows_of(lint)
            ok = lrow >= 0
            krow = np.nonzero(ok)[0]
            lrow = lrow[ok]
            if len(krow) == 0:
                continue
            # i * (VX_j . k) per j-branch, (X_k . conj(X_l)) per (k,l) branch
            adv = 1j * (self.VX[:, jn, :] @ self.kphys[krow].T)  # (3, m)
            for ai in range(3):
                if ai > 0 and not self.fast_ok[jn]:
                    continue
                for bi in range(3):
                    xb = self.X[bi, krow]  # (m, 3)
                    for gi in range(3):
                        c = adv[ai] * np.einsum(
                            "mc,mc->m", xb, np.conj(self.X[gi, lrow]))
                        nz = np.nonzero(c)[0]
                        if len(nz) == 0:
                            continue
                        jj.append(np.full(len(nz), ai * nk + jn))
                        kk.append(bi * nk + krow[nz])
                        ll.append(gi * nk + lrow[nz])
                        cc.append(c[nz])
        if jj:
            self._triads = (np.concatenate(jj), np.concatenate(kk),
                            np.concatenate(ll), np.concatenate(cc))
        else:
            z = np.zeros(0, dtype=np.int64)
            self._triads = (z, z, z, np.zeros(0, dtype=complex))

    def conv_direct(self, w: np.ndarray, what: np.ndarray) -> np.ndarray:
        """Galerkin convolution by direct triad summation."""
        if self._triads is None:
            self._build_triads()
        jj, kk, ll, cc = self._triads
        terms = cc * w.reshape(-1)[jj] * what.reshape(-1)[kk]
        out = (np.bincount(ll, weights=terms.real, minlength=3 * self.nk)
               + 1j * np.bincount(ll, weights=terms.imag, minlength=3 * self.nk))
        return out.reshape(3, self.nk)

    # -- pseudospectral grid path ------------------------------------------
    def _grid_setup(self):
        lmax = np.abs(self.ints).max(axis=0)
        dims = tuple(_next_fast_len(3 * int(m) + 1) for m in lmax)
        idx = tuple(np.mod(self.ints[:, d], dims[d]) for d in range(3))
        self._grid = (dims, idx)

    def _to_grid(self, coef: np.ndarray) -> np.ndarray:
        dims, idx = self._grid
        g = np.zeros(dims, dtype=complex)
        g[idx] = coef
        return np.fft.ifftn(g) * np.prod(dims)

    def _from_grid(self, g: np.ndarray) -> np.ndarray:
        dims, idx = self._grid
        return np.fft.fftn(g)[idx] / np.prod(dims)

    def conv_grid(self, w: np.ndarray, what: np.ndarray) -> np.ndarray:
        """Same convolution via physical-space products on a padded grid.

        Reconstructs the advecting velocity u from w and the advected
        3-component field from what, forms u . grad(What) pointwise, and
        projects back onto the eigenframe.
        """
        if self._grid is None:
            self._grid_setup()
        u = np.einsum("an,anc->cn", w, self.VX)
        F = np.einsum("an,anc->cn", what, self.X)
        ugrid = [self._to_grid(u[c]) for c in range(3)]
        adv = np.zeros((3, self.nk), dtype=complex)
        for c in range(3):
            acc = None
            for d in range(3):
                gd = self._to_grid(1j * self.kphys[:, d] * F[c])
                term = ugrid[d] * gd
                acc = term if acc is None else acc + term
            adv[c] = self._from_grid(acc)
        return np.einsum("cn,anc->an", adv, np.conj(self.X))


_tables: dict = {}


def mode_table(domain: DomainSpec, kmax: float, strict: bool = False) -> ModeTable:
    key = (domain, float(kmax), bool(strict))
    if key not in _tables:
        _tables[key] = ModeTable(domain, kmax, strict)
    return _tables[key]


def exact_resonance(domain: DomainSpec, j, r, k, s) -> bool:
    """Whether omega_j^r + omega_k^s = 0, decided exactly on cube lattices.

    j, k are integer triples with j3 != 0 and k3 != 0.  On a cube the cone
    condition is the integer identity |j|^2 k3^2 = |k|^2 j3^2 plus a sign
    check; anisotropic boxes fall back to a relative tolerance of 1e-12.
    """
    j = tuple(int(x) for x in j)
    k = tuple(int(x) for x in k)
    jp0 = j[0] == 0 and j[1] == 0
    kp0 = k[0] == 0 and k[1] == 0
    if jp0 and kp0:
        return r == -s
    if jp0 or kp0:
        return False  # |omega| = 1 on one side, > 1 on the other
    if domain.L1 == domain.L2 == domain.L3:
        nj2 = j[0] ** 2 + j[1] ** 2 + j[2] ** 2
        nk2 = k[0] ** 2 + k[1] ** 2 + k[2] ** 2
        if nj2 * k[2] ** 2 != nk2 * j[2] ** 2:
            return False
        return (r if j[2] > 0 else -r) == -(s if k[2] > 0 else -s)
    wj = frequencies(domain.wavevector(*j))[A2I[r]]
    wk = frequencies(domain.wavevector(*k))[A2I[s]]
    return abs(wj + wk) <= 1e-12 * max(abs(wj), abs(wk))
