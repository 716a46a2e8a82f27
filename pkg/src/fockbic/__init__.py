"""Photon-number-dependent loss in Kerr resonators: Fock-state formation, squeezing and signatures."""

from .coupling import (
    Constant,
    FanoTwoResonator,
    FrequencyGrid,
    QuadraticLoss,
    Tabulated,
    TerminatedWaveguide,
    k_c,
    k_l,
    kappa_of_n,
    loss_imag,
    loss_real_numeric,
    q_factor,
    transition_frequency,
)
from .design import (
    ClassifyThresholds,
    DesignPoint,
    Regime,
    classify,
    detuning_for_fock,
    loss_curve,
    stable_photon_number,
)
from .dynamics import (
    DriveEnvelope,
    SimulationConfig,
    Trajectory,
    evolve,
    evolve_diagonal,
    moment_closure_evolve,
    pump_and_ringdown,
)
from .errors import (
    AccuracyError,
    ConfigError,
    DimensionError,
    FockbicError,
    IntegratorError,
    TruncationError,
    UndefinedObservableError,
    UnsupportedError,
    UnsupportedModelError,
)
from .fockspace import DensityMatrix, coherent_state, fock_state, poisson_state, truncation_dim, validate
from .observables import fidelity_fock, g2_zero, husimi, mean_var, photon_distribution, squeezing_db
from .pinem import PinemSpectrum, discriminate, pinem_spectrum

__version__ = "0.1.0"
