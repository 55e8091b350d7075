"""Stochastic electrodynamics in the linear regime: random fields, particle
dynamics, self-consistent response matrices and detailed-balance checks."""

from .balance import (BalanceResidual, RateReport, absorbed_power, detailed_balance_residual,
                      equilibrium_spectrum, integral_of_motion_balance, larmor_power,
                      radiative_correction, solve_vacuum_spectrum, transition_rates,
                      two_level_equilibrium_check)
from .dynamics import (BalanceReport, ParticleState, Trajectory, integrate, integrate_ensemble,
                       power_balance)
from .errors import (AmbiguityError, ConfigurationError, DegenerateSpectrumError,
                     DivergenceError, DomainError, EscapeError, InsufficientWindowError,
                     IntegrationError, LSEDError, QuadratureError, ResolutionError, SchemaError,
                     SingularResponseError, TruncationError)
from .field import (FieldRealization, FrequencyGrid, PhysicalConstants, SpectralModel,
                    autocovariance, build_relevant_amplitudes, sample_realization,
                    spectral_density, zero_point_density)
from .forces import ForceModel
from .oracle import BasisSpec, diagonalize
from .oscillator import OscillatorSpec, StationaryMoments, stationary_moments
from .solver import ResponseMatrix, SolverOptions, solve_selfconsistent
from .variational import PhaseVariation, phase_variation_scan

__version__ = "0.1.0"
