"""Spectral decimation for a one-parameter family of self-similar Laplacians on [0, 1]."""
from .core import (
    MAX_LEVEL,
    FractalParams,
    LevelBudgetError,
    TransitionProfile,
    VertexGrid,
    apply_laplacian,
    build_grid,
    energy,
    make_params,
    restrict,
    stationary_weights,
    transition_profile,
)
from .decimation import (
    ConvergenceError,
    EigenvalueTree,
    LimitEigenvalue,
    build_tree,
    counting_function,
    cubic,
    eigenvalue_bounds,
    invert_cubic,
    limit_eigenvalue,
    lowest_child,
    spectral_dimension_fit,
    spectrum,
)
from .delta import DeltaWeights, approximate_delta, delta_weights, refine_weights
from .eigenfunctions import (
    Eigenfunction,
    UnsupportedParameterError,
    build_basis,
    convergence_bound,
    extend,
    full_basis,
    harmonic_extend,
    harmonic_fill,
    sup_norm_bound,
)
from .kernels import BACKEND
from .oracle import OracleResult, dense_eigensystem
from .wave import (
    ConvergenceReport,
    WaveConfig,
    WaveField,
    convergence_gap,
    solve_wave,
    solve_wave_general,
    wave_mass_bound,
)

__version__ = "0.1.0"
