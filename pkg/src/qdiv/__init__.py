"""Tsallis entropy, the quantum q-divergence and projective-measurement channels."""

__version__ = "0.1.0"

from .channels import (
    MeasurementOutcome,
    PinchingMap,
    ProjectorFamily,
    concavity_lower_bound,
    is_expectation_for,
    measure,
    monotonicity_gap,
    monotonicity_trace_gap,
    pinch,
    pinched_trace_classical,
    pinched_trace_matrix,
    transition_probabilities,
)
from .divergences import (
    DivergenceValue,
    EntropicIndex,
    power_trace,
    pseudoadditivity_compose,
    q_divergence,
    q_divergence_form2,
    q_limit_check,
    q_log,
    tsallis_entropy,
    umegaki_divergence,
)
from .kernels import BACKEND
from .spectral import (
    DensityMatrix,
    SpectralDecomposition,
    matrix_log,
    matrix_power,
    spectral_decompose,
    support_contained,
    support_rank,
    tensor_product,
    validate_density,
)
from .tolerances import Tolerances, scaled_tolerances, tol
