"""Extreme eigenvalues of random Laplacian matrices: models, solvers, limit laws."""

from .eigensolve import Spectrum, Tridiagonal, count_above, eigenvalues, top_k_eigenvalues, tridiagonalize
from .errors import (
    DomainError, InvalidArgumentError, InvalidDimensionError, LapspecError, NonConvergenceError,
    RootNotFoundError, SolverFailure, TrialFailure,
)
from .evt import CenteringConstants, constants, gumbel_cdf, sample_gaussian_topk
from .freeconv import SolverConfig, density_grid, gaussian_stieltjes, predict_location, solve_m
from .harness import ExperimentConfig, execute
from .rand_models import (
    DiagonalVector, OrthogonalReducer, SeedPath, SymmetricMatrix, build_reducer, laplacian_of,
    sample_goe, sample_surrogate,
)
from .stats import TestReport, ks_one_sample, ks_two_sample

__version__ = "0.1.0"
