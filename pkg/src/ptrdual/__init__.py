"""Two-mode Fock-space toolkit for beam splitters, parametric amplifiers and
the partial-transpose correspondence between them."""

__version__ = "0.1.0"

from ._accel import backend
from .duality import (
    check_duality,
    check_trace_identity,
    dense_duality_residual,
    duality_sweep,
    epr_probe_state,
    few_photon_table,
    partial_transpose_b,
    w_scalar,
)
from .errors import (
    ConfigError,
    CutoffError,
    CutoffMismatchError,
    EmptySliceError,
    NoSolutionError,
    ParameterError,
    UnreachableOutcomeError,
)
from .experiment import (
    ExperimentConfig,
    ExperimentTally,
    analyze,
    load_config,
    parse_config,
    run_experiment,
    simulate_shots,
    squeezing_db,
)
from .fock import Cutoff, FockOperator, LadderKind, TwoModeState, inner_product, ladder_matrix, tail_mass
from .gaussian import BS, PDC, apply, bs_element, dense_oracle, element, heisenberg_residual, pdc_element
from .interference import (
    PairCountDistribution,
    PathAmplitudes,
    classical_bs,
    classical_pdc,
    coincidence_bs,
    coincidence_pdc,
    duality_consistency,
    extended_bs_probability,
    pair_distribution,
    partial_coincidence,
    threshold_gain,
)
from .retrodiction import (
    MeasurementModel,
    PreparationEnsemble,
    fock_ensemble,
    fock_measurement,
    intermediate_prob_bayes,
    intermediate_prob_ptr,
    predictive_prob,
    retro_check,
    retrodicted_state,
)

__all__ = [name for name in dir() if not name.startswith("_")]
