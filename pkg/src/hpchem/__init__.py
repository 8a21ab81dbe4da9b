"""Spectral simulation and decay-rate verification for a damped
hyperbolic-parabolic chemotaxis system and its parabolic limit."""

from ._accel import HAVE_COMPILED, backend_name
from .analysis import (
    DecayFit,
    NormSeries,
    assemble_report,
    convolution_bound_check,
    expected_decay_exponents,
    fit_decay,
    functional_M,
    functional_N,
)
from .grid import (
    Grid,
    ScalarField,
    SpectralState,
    VectorField,
    divergence,
    grad,
    make_grid,
    norm,
    sobolev_norm,
)
from .kernels import (
    KernelSplit,
    damped_wave_eigen,
    gaussian_probe,
    measure_kernel_decay,
    propagate_heat,
    propagate_hyperbolic,
    refined_remainder_decay,
    split_kernel,
)
from .model import (
    BlowUpError,
    ModelParams,
    SourceSpec,
    StationaryState,
    build_matrices,
    cd_inverse,
    cd_transform,
    evaluate_sources,
    sk_check,
)
from .solver import (
    FieldInit,
    InitSpec,
    SolverConfig,
    Trajectory,
    duhamel_oracle,
    run,
    run_comparison,
    run_pks,
)

__version__ = "0.1.0"
