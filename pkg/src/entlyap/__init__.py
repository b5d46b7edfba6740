"""Synthesis of maximally entangled states by entanglement-measure Lyapunov control."""

from .errors import (
    ConfigError,
    ContractViolationError,
    DimensionError,
    EntlyapError,
    NumericalIntegrityError,
    ParameterError,
)
from .linalg import (
    DensityMatrix,
    SchmidtDecomposition,
    bell_ket,
    computational_ket,
    ghz_ket,
    majorizes,
    matrix_exponential,
    matrix_function,
    partial_trace,
    schmidt_decompose,
    spectral_decompose,
    tensor_product,
    w_ket,
)
from .measures import (
    GFMeasure,
    GFValidationReport,
    LyapunovValue,
    MeasureKind,
    TildeDecomposition,
    concurrence_measure,
    concurrence_mixed,
    concurrence_pure,
    eg_pure,
    entropy_measure,
    entropy_of_entanglement,
    generalized_concurrence,
    gf_kind,
    gme_concurrence,
    lef_value,
    measure_max,
    mixed_concurrence_bound,
    renyi,
    renyi_measure,
    spin_flip,
    tilde_decompose,
    validate_gf_measure,
    wootters_concurrence,
)
from .dynamics import HamiltonianSet, PropagationConfig, TrajectoryRecord, evolve, interaction_operator, step
from .control import (
    ControlGains,
    ControllerSpec,
    FeedbackShape,
    control_mixed,
    control_pure,
    controller_spec,
    feedback_gc,
    feedback_gme,
    feedback_mixed,
    feedback_pure,
    linear_shape,
    perturb_initial,
)
from .harness import (
    BasinConfig,
    BasinPoint,
    ExperimentSpec,
    RunResult,
    TerminalClass,
    basin_scan,
    classify_terminal,
    detect_convergence,
    kernel_mems,
    make_experiment,
    mems_experiment,
    preset_hamiltonians,
    random_density_with_spectrum,
    run_trajectory,
    table1_initial,
    tripartite_experiment,
)

__version__ = "0.1.0"
