"""Dissipative entanglement in non-equilibrium steady states of a two-qubit
collision model with tunable environmental memory: steady states, heat
currents, concurrence maps, critical-current bounds and a non-divisibility
measure of the reduced dynamics."""

from .analysis import (
    OptimizationResult,
    RegionSample,
    critical_heat_currents,
    detect_overhang,
    maximize_concurrence,
    memoryless_boundary,
    memoryless_boundary_couplings,
    sample_cq_region,
)
from .collision import (
    CollisionEngine,
    CollisionStepResult,
    CollisionTrajectory,
    build_interaction_unitaries,
    one_step_map,
    simulate,
)
from .divisibility import (
    BlochMap,
    DivisibilityReport,
    divisibility_map,
    non_divisibility,
    reduced_map,
    su4_basis,
)
from .generators import (
    GkslGenerator,
    build_memory_generator,
    build_memoryless_generator,
    evolve,
    fast_steady_state,
    steady_state,
    steady_state_for,
)
from .model import ModelParams, thermal_qubit, z_of_temperature
from .observables import (
    AnalyticSteadyState,
    SteadyStateReport,
    analytic_memoryless_steady_state,
    concurrence_wootters,
    concurrence_x_state,
    critical_entanglement_condition,
    heat_current_analytic,
    heat_current_dissipator,
)
from .qops import (
    kron,
    matrix_exp,
    nullspace_steady_state,
    partial_trace,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticSteadyState",
    "BlochMap",
    "CollisionEngine",
    "CollisionStepResult",
    "CollisionTrajectory",
    "DivisibilityReport",
    "GkslGenerator",
    "ModelParams",
    "OptimizationResult",
    "RegionSample",
    "SteadyStateReport",
    "analytic_memoryless_steady_state",
    "build_interaction_unitaries",
    "build_memory_generator",
    "build_memoryless_generator",
    "concurrence_wootters",
    "concurrence_x_state",
    "critical_entanglement_condition",
    "critical_heat_currents",
    "detect_overhang",
    "divisibility_map",
    "evolve",
    "fast_steady_state",
    "heat_current_analytic",
    "heat_current_dissipator",
    "kron",
    "matrix_exp",
    "maximize_concurrence",
    "memoryless_boundary",
    "memoryless_boundary_couplings",
    "non_divisibility",
    "nullspace_steady_state",
    "one_step_map",
    "partial_trace",
    "reduced_map",
    "sample_cq_region",
    "simulate",
    "steady_state",
    "steady_state_for",
    "su4_basis",
    "thermal_qubit",
    "z_of_temperature",
]
