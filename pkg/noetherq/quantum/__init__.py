from .checks import (
    EigenCheck,
    ExpectationTrack,
    conservation_defect,
    constraint_check,
    eigencheck_Q,
    tdse_residual,
    track_expectation,
    trial_states,
)
from .grid import Grid1D
from .operators import (
    GridOperator,
    OperatorAssembly,
    assemble_hamiltonian,
    assemble_Q,
    charge_assembly,
    hamiltonian_assembly,
)
from .propagation import propagate_cn
from .states import DampedOscillator, Wavefunction, analytic_dho_state, dho_builder

__all__ = [
    "DampedOscillator",
    "EigenCheck",
    "ExpectationTrack",
    "Grid1D",
    "GridOperator",
    "OperatorAssembly",
    "Wavefunction",
    "analytic_dho_state",
    "assemble_Q",
    "assemble_hamiltonian",
    "charge_assembly",
    "conservation_defect",
    "constraint_check",
    "dho_builder",
    "eigencheck_Q",
    "hamiltonian_assembly",
    "propagate_cn",
    "tdse_residual",
    "track_expectation",
    "trial_states",
]
