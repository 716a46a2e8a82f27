"""Time evolution: full master equation, diagonal chain, moment closure, pump protocol."""

from .chain import death_chain_matrix, evolve_diagonal
from .closure import MomentTrajectory, decay_rate_function, moment_closure_evolve
from .config import DriveEnvelope, SimulationConfig, Trajectory
from .master import dissipator_apply, evolve, liouvillian_rhs
from .protocol import calibrate_pulse, pump_and_ringdown, ringdown_grid, validate_pulse

__all__ = [
    "DriveEnvelope",
    "MomentTrajectory",
    "SimulationConfig",
    "Trajectory",
    "calibrate_pulse",
    "death_chain_matrix",
    "decay_rate_function",
    "dissipator_apply",
    "evolve",
    "evolve_diagonal",
    "liouvillian_rhs",
    "moment_closure_evolve",
    "pump_and_ringdown",
    "ringdown_grid",
    "validate_pulse",
]
