"""DVR Hamiltonians, measurement plans and VQE on a statevector simulator."""

from ._core import (
    Circuit,
    GridVariant,
    Hamiltonian,
    MeasurementPlan,
    TruncationSpec,
    __version__,
    assemble,
    classical_spectrum,
    decompose,
    excited_states,
    full_plan,
    greedy_search,
    hartree_to_wavenumber,
    minimize,
    reconstruct,
    run_circuit,
    run_config,
    truncate,
    truncation_error_bound,
)

__all__ = [
    "Circuit",
    "GridVariant",
    "Hamiltonian",
    "MeasurementPlan",
    "TruncationSpec",
    "__version__",
    "assemble",
    "classical_spectrum",
    "decompose",
    "excited_states",
    "full_plan",
    "greedy_search",
    "hartree_to_wavenumber",
    "minimize",
    "reconstruct",
    "run_circuit",
    "run_config",
    "truncate",
    "truncation_error_bound",
]
