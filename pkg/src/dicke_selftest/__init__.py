"""Exact simulation and certification of the Dicke-state self-testing protocol."""
from .bounds import CertificationReport, BoundBreakdown, certify, delta1, swap_count, swap_count_oracle, total_bound
from .core import (
    DomainError,
    LocalObservable,
    PureState,
    SettingProduct,
    append_ancillas,
    apply_local,
    dicke_state,
    expectation,
    inner,
)
from .experiment import (
    ExperimentSpec,
    NoiseSpec,
    apply_noise,
    perturb_state,
    reference_experiment,
    rotate_measurement,
    sample_correlator,
)
from .isometry import (
    DegenerateInputError,
    IsometryOutput,
    apply_isometry_circuit,
    apply_isometry_formula,
    certify_measurement,
    ideal_theta,
    identity_residuals,
    state_distance,
)
from .statistics import (
    SettingDescriptor,
    StatisticsReport,
    ideal_value,
    required_settings,
    verify,
    zbasis_distribution_check,
)

__version__ = "0.1.0"
