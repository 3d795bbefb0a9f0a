"""Binary quadratic models, pseudo-Boolean quadratization, annealing engines,
and a stochastic-growth benchmark solved by parametric policy iteration."""

__version__ = "0.1.0"

from .bqm import (
    BRUTE_FORCE_MAX_VARS,
    CapacityError,
    IsingModel,
    ParseError,
    ProblemGraph,
    QuboModel,
    SpectrumResult,
    brute_force,
    energy_of_bits,
    graph_of,
    ising_energy,
    ising_to_qubo,
    qubo_energy,
    qubo_to_ising,
    read_model,
    write_model,
)
from .engines import (
    IntegrationError,
    SampleRecord,
    SampleSet,
    SamplerRequest,
    TimingReport,
    final_probabilities,
    heuristic_anneal,
    initial_hamiltonian_spectrum,
    measure,
    schrodinger_anneal,
    sequential_greedy,
    timing_report,
)
from .pbf import (
    BinaryEncoding,
    EncodingRangeWarning,
    LogCoefficients,
    PenaltySpec,
    Poly,
    add_penalty,
    exactly_one_penalty,
    from_qubo,
    ln_1mx_grid_error,
    ln_1mx_poly,
    ln_x_grid_error,
    ln_x_poly,
    read_poly,
    to_qubo,
    write_poly,
)
from .quadratize import (
    AuxAllocation,
    AuxRecord,
    ReductionResult,
    deduction_reduce,
    default_gamma,
    elc_reduce,
    min_over_aux,
    ntr_reduce,
    ptr_reduce,
    quadratize_full,
    reduce_by_substitution,
    substitution_gadget,
)
from .schedules import (
    AnnealSchedule,
    GroupedSchedule,
    forward_schedule,
    grouped_cycle_schedule,
    read_schedule_csv,
    reverse_schedule,
    write_schedule_csv,
)
from .rbc import (
    DEFAULT_INIT,
    DEFAULT_PARAMS,
    CollocationGrid,
    ConsumptionPath,
    ConvergenceError,
    GammaConstants,
    PpiState,
    RbcParams,
    analytic_policy_update,
    build_gp_pbo,
    build_gv_pbo,
    classical_ppi,
    closed_form_step,
    collocation_grid,
    combinatorial_ppi,
    default_policy_encoding,
    default_valuation_encodings,
    fit_log_coefficients,
    gamma_constants,
    hybrid_ppi,
    make_heuristic_sampler,
    oracle_sampler,
    simulate_consumption,
    true_parameters,
    write_consumption_csv,
    write_iteration_csv,
)
from .merged import (
    AnnealOutcome,
    MergedProblem,
    build_merged_problem,
    default_merged_encodings,
    greedy_merged_sampler,
    heuristic_merged_sampler,
    losses,
    merged_schedule,
    multi_anneal_ppi,
    one_shot_ensemble,
    one_shot_ppi,
)
from .svgplot import Series, line_chart

__all__ = [
    "BRUTE_FORCE_MAX_VARS",
    "DEFAULT_INIT",
    "DEFAULT_PARAMS",
    "AnnealOutcome",
    "AnnealSchedule",
    "AuxAllocation",
    "AuxRecord",
    "BinaryEncoding",
    "CapacityError",
    "CollocationGrid",
    "ConsumptionPath",
    "ConvergenceError",
    "EncodingRangeWarning",
    "GammaConstants",
    "GroupedSchedule",
    "IntegrationError",
    "IsingModel",
    "LogCoefficients",
    "MergedProblem",
    "ParseError",
    "PenaltySpec",
    "Poly",
    "PpiState",
    "ProblemGraph",
    "QuboModel",
    "RbcParams",
    "ReductionResult",
    "SampleRecord",
    "SampleSet",
    "SamplerRequest",
    "Series",
    "SpectrumResult",
    "TimingReport",
    "add_penalty",
    "analytic_policy_update",
    "brute_force",
    "build_gp_pbo",
    "build_gv_pbo",
    "build_merged_problem",
    "classical_ppi",
    "closed_form_step",
    "collocation_grid",
    "combinatorial_ppi",
    "deduction_reduce",
    "default_gamma",
    "default_merged_encodings",
    "default_policy_encoding",
    "default_valuation_encodings",
    "elc_reduce",
    "energy_of_bits",
    "exactly_one_penalty",
    "final_probabilities",
    "fit_log_coefficients",
    "forward_schedule",
    "from_qubo",
    "gamma_constants",
    "graph_of",
    "greedy_merged_sampler",
    "grouped_cycle_schedule",
    "heuristic_anneal",
    "heuristic_merged_sampler",
    "hybrid_ppi",
    "initial_hamiltonian_spectrum",
    "ising_energy",
    "ising_to_qubo",
    "line_chart",
    "ln_1mx_grid_error",
    "ln_1mx_poly",
    "ln_x_grid_error",
    "ln_x_poly",
    "losses",
    "make_heuristic_sampler",
    "measure",
    "merged_schedule",
    "min_over_aux",
    "multi_anneal_ppi",
    "ntr_reduce",
    "one_shot_ensemble",
    "one_shot_ppi",
    "oracle_sampler",
    "ptr_reduce",
    "quadratize_full",
    "qubo_energy",
    "qubo_to_ising",
    "read_model",
    "read_poly",
    "read_schedule_csv",
    "reduce_by_substitution",
    "reverse_schedule",
    "schrodinger_anneal",
    "sequential_greedy",
    "simulate_consumption",
    "substitution_gadget",
    "timing_report",
    "to_qubo",
    "true_parameters",
    "write_consumption_csv",
    "write_iteration_csv",
    "write_model",
    "write_poly",
    "write_schedule_csv",
]
