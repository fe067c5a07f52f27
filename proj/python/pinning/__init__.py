"""Disordered pinning model: renewal laws, partition functions, free energy and critical points."""

from ._core import (
    BudgetExceeded,
    ConvergenceError,
    CriticalPoint,
    DiagnosticError,
    DisorderLaw,
    DisorderSample,
    DomainError,
    EnsembleEstimate,
    FreeEnergyEstimate,
    RenewalLaw,
    brute_force_constrained,
    brute_force_free,
    build_renewal,
    critical_point,
    deterministic_law,
    ensemble,
    free_energy,
    homogeneous_free_energy,
    intersection_law,
    log_psi,
    log_psi_c,
    log_z_constrained,
    log_z_free,
    psi_hat,
    psi_hat_c,
    renewal_residual,
    run_experiment,
    sample_disorder,
    two_point_law,
)

__all__ = [name for name in dir() if not name.startswith("_")]
