"""Iterative slow-manifold construction U^n and its remainder.

The balanced fast component is built as a graph over the low-mode slow
variables: U^1 = eps * Linv(f_fast - B_fast(W, W)), and each further order
corrects with the chain-rule term

    U^{n+1} = eps * Linv( -(DU^n) G^n - B_fast(W+U^n, W+U^n)
                          - A U^n + f_fast ),

where G^n = -B_slow(W+U^n, W+U^n) - A W + f_slow is the slow tendency on
the graph.  The directional derivative (DU^n) G^n is propagated exactly by
forward-mode jet arithmetic through the recursion: a jet is an array of
coefficient vectors indexed by a bitmask over perturbation directions, and
each bilinear operation convolves the components pairwise (i & j == 0).
No finite differencing enters the construction, so the algebraic identity

    R^n = (1/eps) * L (U^n - U^{n+1})

between the direct remainder and the order difference holds to rounding.

Everything lives on the strictly truncated lattice |k| < kappa and in the
rotated frame; phases are taken at the evaluation state's own time stamp.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ._engine import ModeTable, mode_table
from .dynamics import ForcingSpec
from .lattice import DomainSpec, SpectralState

__all__ = [
    "ManifoldApprox",
    "kappa_delta",
    "u1",
    "g_of",
    "iterate",
    "remainder_direct",
    "remainder_diff",
    "contraction_scan",
]


def kappa_delta(eps: float, kmax: float, n_max: int = 4, eta: float = 1.0):
    """Truncation radius, step and iteration cap for a given eps.

    kappa = min(eps^(-1/4), kmax), delta = eps^(1/4),
    n_cap = min(floor(eta / delta), n_max).  Requires 0 < eps <= 1.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    delta = eps ** 0.25
    kappa = min(1.0 / delta, float(kmax))
    n_cap = min(int(np.floor(eta / delta)), int(n_max))
    return kappa, delta, n_cap


class _Ctx:
    """Dense scratch bound to one (table, eps, mu, forcing, time)."""

    def __init__(self, table: ModeTable, eps, mu, forcing: ForcingSpec, t):
        self.table = table
        self.eps = float(eps)
        self.mu = float(mu)
        self.t = float(t)
        self.E = table.phase(self.t, self.eps)  # rotated -> lab per mode
        # forcing is stored lab-frame; rotated coefficient = f_lab / E
        fd = np.zeros((3, table.nk), dtype=complex)
        amp = forcing.amplitude(self.t)
        for key, v in forcing.coeffs.items():
            n = table.row.get(key[:3])
            if n is not None:
                fd[_AI[key[3]], n] = amp * v
        fd /= self.E
        self.f_slow = np.zeros_like(fd)
        self.f_slow[0] = fd[0]
        self.f_fast = fd - self.f_slow
        iw = 1j * table.omega
        self.linv_fast = np.zeros_like(iw)
        np.divide(1.0, iw, out=self.linv_fast, where=table.omega != 0.0)
        self.diff = self.mu * table.kabs[None, :] ** 2

    def conv(self, a, b):
        """Rotated-frame convolution of two plain (3, nk) blocks."""
        return self.table.conv_direct(self.E * a, self.E * b) / self.E

    def jet_B(self, a, b):
        """Jet-valued bilinear B: pairwise over disjoint bitmasks."""
        m = a.shape[0]
        out = np.zeros_like(a)
        for i in range(m):
            ai = a[i]
            if not ai.any():
                continue
            for j in range(m):
                if i & j or not b[j].any():
                    continue
                out[i | j] += self.conv(ai, b[j])
        return out

    def with_const(self, const, m):
        """Lift a constant (3, nk) block to a width-m jet (component 0)."""
        out = np.zeros((m,) + const.shape, dtype=complex)
        out[0] = const
        return out


_AI = {0: 0, 1: 1, -1: 2}


def _slow(j):
    out = np.zeros_like(j)
    out[..., 0, :] = j[..., 0, :]
    return out


def _fast(j):
    out = j.copy()
    out[..., 0, :] = 0.0
    return out


def _eval_u(ctx: _Ctx, n: int, J: np.ndarray) -> np.ndarray:
    """Order-n manifold on a jet of slow states; returns a fast jet."""
    if n == 0:
        return np.zeros_like(J)
    if n == 1:
        rhs = ctx.with_const(ctx.f_fast, J.shape[0]) - _fast(ctx.jet_B(J, J))
        return ctx.eps * ctx.linv_fast * rhs
    Um = _eval_u(ctx, n - 1, J)
    WU = J + Um
    BWU = ctx.jet_B(WU, WU)
    G = (-_slow(BWU) - ctx.diff * J
         + ctx.with_const(ctx.f_slow, J.shape[0]))
    # extend the jet by one direction (top bit) carrying G, so the
    # derivative block of the recursive call is exactly (DU^{n-1}) G
    Jx = np.concatenate([J, G], axis=0)
    DUG = _eval_u(ctx, n - 1, Jx)[J.shape[0]:]
    rhs = (-DUG - _fast(BWU) - ctx.diff * Um
           + ctx.with_const(ctx.f_fast, J.shape[0]))
    return ctx.eps * ctx.linv_fast * rhs


@dataclass(frozen=True)
class ManifoldApprox:
    """Order-n balanced graph evaluator over the slow low modes.

    The evaluator accepts any state, keeps its slow part below the
    truncation radius, and returns the fast-branch balance at the same
    frame and time.  ``order`` 0 is the trivial graph U == 0.
    """

    domain: DomainSpec
    kappa: float
    eps: float
    mu: float
    forcing: ForcingSpec
    order: int = 1
    n_cap: int = field(default=None)
    eta: float = 1.0
    n_max: int = 4

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"order must be >= 0, got {self.order}")
        if self.n_cap is None:
            _, _, cap = kappa_delta(min(self.eps, 1.0), self.kappa,
                                    self.n_max, self.eta)
            object.__setattr__(self, "n_cap", max(cap, 1))
        if self.order > self.n_cap:
            raise ValueError(
                f"order {self.order} exceeds iteration cap {self.n_cap}")

    @property
    def table(self) -> ModeTable:
        return mode_table(self.domain, self.kappa, strict=True)

    def _ctx(self, state: SpectralState) -> _Ctx:
        t = state.t if state.frame == "rotated" else 0.0
        return _Ctx(self.table, self.eps, self.mu, self.forcing, t)

    def _slow_dense(self, state: SpectralState) -> np.ndarray:
        table = self.table
        w = np.zeros((3, table.nk), dtype=complex)
        for key, v in state.items():
            if key[3] != 0:
                continue
            n = table.row.get(key[:3])
            if n is not None:
                w[0, n] = v
        return w

    def __call__(self, state: SpectralState) -> SpectralState:
        ctx = self._ctx(state)
        J = self._slow_dense(state)[None]
        out = _eval_u(ctx, self.order, J)[0]
        return self.table.state(out, state.frame, state.t)

    def jet(self, state: SpectralState, directions):
        """Evaluate U^n and its exact directional derivatives.

        directions is a sequence of slow states; returns (U, [D_i U]).
        """
        dirs = list(directions)
        d = len(dirs)
        ctx = self._ctx(state)
        J = np.zeros((1 << d, 3, self.table.nk), dtype=complex)
        J[0] = self._slow_dense(state)
        for i, dv in enumerate(dirs):
            J[1 << i] = self._slow_dense(dv)
        out = _eval_u(ctx, self.order, J)
        mk = lambda w: self.table.state(w, state.frame, state.t)
        return mk(out[0]), [mk(out[1 << i]) for i in range(d)]

    def remainder(self, state: SpectralState) -> SpectralState:
        return remainder_direct(self, state)


def u1(W0: SpectralState, forcing: ForcingSpec, eps: float,
       kappa: float = None, mu: float = 0.0) -> SpectralState:
    """First-order balance eps * Linv(f_fast - B_fast(W0, W0))."""
    if kappa is None:
        kappa = W0.kmax * (1 + 1e-9)  # keep the boundary shell
    return ManifoldApprox(W0.domain, kappa, eps, mu, forcing, order=1)(W0)


def g_of(W0: SpectralState, U: SpectralState, forcing: ForcingSpec,
         mu: float, kappa: float = None, eps: float = 1.0) -> SpectralState:
    """Slow tendency on the graph: -B_slow(W0+U, W0+U) - A W0 + f_slow."""
    if kappa is None:
        kappa = W0.kmax * (1 + 1e-9)
    table = mode_table(W0.domain, kappa, strict=True)
    ctx = _Ctx(table, eps, mu, forcing,
               W0.t if W0.frame == "rotated" else 0.0)
    w = np.zeros((3, table.nk), dtype=complex)
    for st in (W0, U):
        for key, v in st.items():
            n = table.row.get(key[:3])
            if n is not None:
                w[_AI[key[3]], n] += v
    w0 = np.zeros_like(w)
    for key, v in W0.items():
        if key[3] == 0:
            n = table.row.get(key[:3])
            if n is not None:
                w0[0, n] = v
    out = -_slow(ctx.conv(w, w)) - ctx.diff * w0 + ctx.f_slow
    return table.state(out, W0.frame, W0.t)


def iterate(approx: ManifoldApprox) -> ManifoldApprox:
    """Next-order approximation; errors past the iteration cap."""
    if approx.order + 1 > approx.n_cap:
        raise ValueError(
            f"iteration cap reached: order {approx.order + 1} > "
            f"n_cap {approx.n_cap}")
    return replace(approx, order=approx.order + 1)


def remainder_direct(approx: ManifoldApprox, state: SpectralState
                     ) -> SpectralState:
    """R^n = (DU^n) G^n + (1/eps) L U^n + B_fast(W+U^n, W+U^n)
    + A U^n - f_fast, all on the truncated lattice."""
    ctx = approx._ctx(state)
    table = approx.table
    J = approx._slow_dense(state)[None]
    Um = _eval_u(ctx, approx.order, J)
    WU = J + Um
    BWU = ctx.jet_B(WU, WU)
    G = -_slow(BWU) - ctx.diff * J + ctx.with_const(ctx.f_slow, 1)
    Jx = np.concatenate([J, G], axis=0)
    DUG = _eval_u(ctx, approx.order, Jx)[1:]
    iw_over_eps = (1j * table.omega) / approx.eps
    R = (DUG[0] + iw_over_eps * Um[0] + _fast(BWU)[0]
         + ctx.diff * Um[0] - ctx.f_fast)
    return table.state(R, state.frame, state.t)


def remainder_diff(approx_n: ManifoldApprox, approx_np1: ManifoldApprox,
                   state: SpectralState) -> SpectralState:
    """R^n by the order difference (1/eps) L (U^n - U^{n+1})."""
    for attr in ("domain", "kappa", "eps", "mu"):
        if getattr(approx_n, attr) != getattr(approx_np1, attr):
            raise ValueError(f"mismatched {attr} between orders")
    if approx_np1.order != approx_n.order + 1:
        raise ValueError("orders must be consecutive")
    dU = approx_n(state) - approx_np1(state)
    table = approx_n.table
    w = table.dense(dU)
    return table.state((1j * table.omega / approx_n.eps) * w,
                       state.frame, state.t)


def contraction_scan(state: SpectralState, forcing: ForcingSpec, mu: float,
                     eps_list, kappa: float, n_hi: int = 3):
    """Remainder norms ||R^n|| for n = 0..n_hi over a list of eps.

    Returns (rows, eps_threshold): rows of (eps, [norms]), and the largest
    eps in the list for which the norms decrease strictly (None if none).
    """
    rows = []
    thresh = None
    for eps in sorted(eps_list):
        norms = []
        for n in range(n_hi + 1):
            ap = ManifoldApprox(state.domain, kappa, eps, mu, forcing,
                                order=n, n_cap=n_hi + 1)
            table = ap.table
            norms.append(table.sob_norm(table.dense(
                remainder_direct(ap, state))))
        rows.append((eps, norms))
        if all(b < a for a, b in zip(norms, norms[1:])):
            thresh = eps
    return rows, thresh
