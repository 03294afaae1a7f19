"""Simulation of polarization-entanglement distribution over optical fibers."""

from ._core import (
    __version__,
    apply_chi_one_side,
    axis_biased_chi,
    bell_psi_minus,
    chsh_max,
    coherence_time_ps,
    concurrence,
    depolarizing_chi,
    detected_sigma_ps,
    effective_state,
    extremal_output_purity,
    fiber_preset,
    fiber_preset_names,
    fidelity,
    process_fidelity,
    propagation_delay_us,
    purity,
    reconstruct,
    run,
    sweep,
    werner,
)

__all__ = [
    "__version__",
    "apply_chi_one_side",
    "axis_biased_chi",
    "bell_psi_minus",
    "chsh_max",
    "coherence_time_ps",
    "concurrence",
    "depolarizing_chi",
    "detected_sigma_ps",
    "effective_state",
    "extremal_output_purity",
    "fiber_preset",
    "fiber_preset_names",
    "fidelity",
    "process_fidelity",
    "propagation_delay_us",
    "purity",
    "reconstruct",
    "run",
    "sweep",
    "werner",
]
