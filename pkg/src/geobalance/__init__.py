"""Spectral Galerkin toolkit for rotating stratified flow in a periodic
box: normal-mode decomposition, triad interaction analysis, stiff-phase
time integration, and the iterative slow-manifold construction."""

__version__ = "0.1.0"

from .lattice import (BRANCHES, DomainSpec, SpectralState, WaveVector,
                      check_reality, enforce_reality, gevrey_norm,
                      random_state, sobolev_norm, truncate, wavevectors)
from .modes import (EigenFrame, advection_vector, apply_Iomega, apply_L,
                    apply_Linv, eigenframe, frequencies, slow_fast_split)
from .interactions import (apply_B, apply_B_fast, apply_B_slow, apply_Bomega,
                           coeff, coeff_bounds, pairing)
from .resonance import AuditReport, TriadRecord, audit, classify, \
    enumerate_triads
from .dynamics import (DivergenceError, ForcingSpec, SolverConfig,
                       TrajectoryRecord, apply_A, energy_budget, integrate,
                       reconstruct_fields, tendency)
from .slowmanifold import (ManifoldApprox, g_of, iterate, kappa_delta,
                           remainder_diff, remainder_direct, u1)
from .experiments import (ScanReport, balance_scan, default_forcing,
                          gevrey_tail_check, manifold_scan, toy_model)

__all__ = [
    "__version__",
    "BRANCHES", "DomainSpec", "SpectralState", "WaveVector",
    "check_reality", "enforce_reality", "gevrey_norm", "random_state",
    "sobolev_norm", "truncate", "wavevectors",
    "EigenFrame", "advection_vector", "apply_Iomega", "apply_L",
    "apply_Linv", "eigenframe", "frequencies", "slow_fast_split",
    "apply_B", "apply_B_fast", "apply_B_slow", "apply_Bomega",
    "coeff", "coeff_bounds", "pairing",
    "AuditReport", "TriadRecord", "audit", "classify", "enumerate_triads",
    "DivergenceError", "ForcingSpec", "SolverConfig", "TrajectoryRecord",
    "apply_A", "energy_budget", "integrate", "reconstruct_fields",
    "tendency",
    "ManifoldApprox", "g_of", "iterate", "kappa_delta", "remainder_diff",
    "remainder_direct", "u1",
    "ScanReport", "balance_scan", "default_forcing", "gevrey_tail_check",
    "manifold_scan", "toy_model",
]
