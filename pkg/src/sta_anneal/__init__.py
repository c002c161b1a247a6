"""Invariant-based annealing schedules for the transverse-field Ising model.

Design drives by inverse engineering (:mod:`~sta_anneal.schedules`,
:mod:`~sta_anneal.design`), check them on the mean-field Bloch sphere
(:mod:`~sta_anneal.bloch`) and with exact collective-spin dynamics
(:mod:`~sta_anneal.quantum`), and run the numerical studies in
:mod:`~sta_anneal.experiments`.
"""

from .bloch import BlochTrajectory, bloch_residual, evolve_bloch
from .design import (CouplingMatrix, design_general_ising, design_mean_field, design_rotating,
                     design_schedule, design_single_spin, mattis_angles, mattis_couplings)
from .errors import (DimensionOverflow, DivergentSchedule, NormDrift, RequiresLongitudinalField,
                     SingularDrive, SiteInconsistent, StaError)
from .experiments import (PerturbationSpec, mattis_run, perturbation_field, stability_run,
                          sweep_T, unstable_direction)
from .kernels import BACKEND
from .quantum import (CollectiveOperators, Observables, QuantumRun, coherent_plus_x_state,
                      collective_operators, evolve_full_hilbert, evolve_quantum, observables)
from .schedules import (AngleSet, DriveSample, DriveSchedule, ModelParams, Report, custom_angles,
                        ising_schedule, linear_drive, rotating_schedule, single_spin_schedule,
                        verify_boundaries)

__version__ = "0.1.0"

__all__ = [
    "AngleSet", "BACKEND", "BlochTrajectory", "CollectiveOperators", "CouplingMatrix",
    "DimensionOverflow", "DivergentSchedule", "DriveSample", "DriveSchedule", "ModelParams",
    "NormDrift", "Observables", "PerturbationSpec", "QuantumRun", "Report",
    "RequiresLongitudinalField", "SingularDrive", "SiteInconsistent", "StaError",
    "bloch_residual", "coherent_plus_x_state", "collective_operators", "custom_angles",
    "design_general_ising", "design_mean_field", "design_rotating", "design_schedule",
    "design_single_spin", "evolve_bloch", "evolve_full_hilbert", "evolve_quantum",
    "ising_schedule", "linear_drive", "mattis_angles", "mattis_couplings", "mattis_run",
    "observables", "perturbation_field", "rotating_schedule", "single_spin_schedule",
    "stability_run", "sweep_T", "unstable_direction", "verify_boundaries",
]
