"""Time-sliced short-time propagators for the Schrodinger equation.

The package builds the order-N short-time action expansion of a potential,
assembles the resulting parametrix as a dense oscillatory integral operator
on a periodic grid, composes it over time subdivisions and measures its
convergence against a split-step reference solver.  A small time-frequency
toolbox (STFT, modulation norms, dilations) provides boundedness witnesses.
"""

from .action import ActionExpansion, TwoPointField, eval_S_N, eval_W_derivative, transport_residual
from .errors import (ConfigurationError, DegenerateFitError, DerivativeBudgetError, LatticeError,
                     OracleResolutionError, PathSliceError, ShapeError, SingularityError, SupportError,
                     TimeOrderError, WindowError)
from .grid import (ConvergenceReport, Grid, WaveFunction, fit_order, gaussian_packet, l2_distance, make_grid,
                   random_bandlimited_state)
from .oio import PropagatorStep, apply_short_time_propagator, build_step, free_propagate
from .parametrix import ResidualField, eval_g_N, parametrix_norm_scan, residual_field
from .potential import (CosinePotential, FourierSeriesPotential, HarmonicPotential, LinearPotential,
                        PotentialModel, TimeModulatedPotential, ZeroPotential, make_low_regularity_potential,
                        make_potential, verify_assumption_A)
from .reference import ReferenceConfig, reference_propagate
from .slicing import Subdivision, apply_time_sliced, convergence_study, make_subdivision, single_step_study
from .timefreq import (PhaseSpaceLattice, STFTData, dilate, dilation_constant, frozen_amplitude_norm,
                       modulation_norm, stft, wigner_ambiguity_check)

__version__ = "0.1.0"


def eval_potential_derivative(model: PotentialModel, k: int, alpha: int, t: float, x):
    """d_t^k d_x^alpha V(t, x) from the model's closed form."""
    return model.derivative(k, alpha, t, x)
