"""Urban/rural migration SEIR model with quarantine: simulation, equilibria,
reproduction numbers, sensitivity sweeps, heat grids and intervention ranking."""
from .model import (
    BASELINE_INIT, BASELINE_PARAMS, DYNAMIC_N, IncidenceMode, ModelParameters, StateVector, rhs,
)
from .integrator import IntegrationSpec, RK4Fixed, RK45Adaptive, Trajectory, integrate
from .equilibria import disease_free_equilibrium, infected_equilibria, jacobian
from .reproduction import (
    DfeWeights, dfe_weights_from_equilibrium, effective_r0, next_generation, r0_closed_form,
    spectral_radius,
)

__all__ = [
    "BASELINE_INIT", "BASELINE_PARAMS", "DYNAMIC_N", "IncidenceMode", "ModelParameters", "StateVector", "rhs",
    "IntegrationSpec", "RK4Fixed", "RK45Adaptive", "Trajectory", "integrate",
    "disease_free_equilibrium", "infected_equilibria", "jacobian",
    "DfeWeights", "dfe_weights_from_equilibrium", "effective_r0", "next_generation", "r0_closed_form",
    "spectral_radius",
]

__version__ = "0.1.0"
