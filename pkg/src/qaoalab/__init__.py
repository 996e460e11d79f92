"""Warm-start QAOA laboratory."""

from .errors import CapacityError, ConventionError, GraphFormatError
from .problems import (
    BINARY,
    ISING,
    MAXCUT,
    MIS,
    SK,
    SPIN,
    BitString,
    CostFunction,
    Graph,
    complete_graph,
    cycle_graph,
    decoupled_graph,
    density_of_states,
    flip_deltas,
    generate_regular_graph,
    prune_to_independent_set,
    random_sk_couplings,
    read_graph,
    read_strings,
    write_graph,
    write_strings,
)
from .statevector import (
    QaoaParams,
    apply_mixer,
    apply_phase,
    basis_state,
    expectation,
    iso_cost_state,
    qaoa_state,
    success_probability,
    uniform_state,
    warmstart_params_for_p,
)
from .localsim import (
    LocalEvaluator,
    edge_neighborhood,
    local_expectation,
    tree_fraction,
)
from .optimizer import (
    OptimizationResult,
    improvement_report,
    optimize,
    small_beta_optimize,
)
from .warmstart import (
    ThermalSpec,
    calibrate_beta,
    exact_boltzmann_sample,
    goemans_williamson,
    greedy_mis,
    metropolis_sample,
    string_batch,
    thermal_mean_cost,
)
from .analysis import (
    CompressionInputs,
    MagicAngleResult,
    MisHalfReport,
    NeighborhoodDistribution,
    PowerLawFit,
    SmallAngleReport,
    compression_epsilon,
    decoupled_oracle,
    fit_power_law,
    improvable_count_bound,
    local_ensemble,
    magic_angle_state,
    mis_p_half,
    sample_deviation,
    small_angle_condition,
    thermal_bound,
    thermal_tree_ensemble_exact,
    thermality_coefficient,
)

__version__ = "0.1.0"
