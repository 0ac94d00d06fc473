"""Simulation and verification toolkit for transfer learning rate experiments."""

from .adaptive import (
    CostSchedule,
    CostTargets,
    SamplingTranscript,
    delta_hat,
    minimal_n_for_cost,
    optimal_sampling_costs,
    run_adaptive_sampling,
    unlabeled_requirement,
)
from .discrepancy import (
    ExponentReport,
    MembershipReport,
    beta_max,
    d_a,
    d_y,
    d_y_localized,
    exponent_sweep,
    gamma_min,
    pair_profile,
    gamma_rho_chain_check,
    rho_min,
    rho_prime_min,
    verify_family,
    verify_membership,
)
from .distributions import (
    Certified,
    Density1D,
    DiscreteJoint,
    SigmaFamily,
    ThresholdMarginal,
    ThresholdScenario,
    TransferPair,
    best_in_class,
    build_single_scale_family,
    build_two_scale_family,
    chi2_bound,
    discretize_pair,
    epsilon_schedule,
    example_scenario,
    excess_risk,
    kl_bernoulli,
    kl_product,
    load_scenario,
    rcs_violating_pair,
    sample_labeled,
    sample_unlabeled,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    true_risk,
    uniform_density,
    vg_packing,
)
from .hypotheses import (
    Hypothesis,
    HypothesisClass,
    LabeledSample,
    SupportPoint,
    UnlabeledSample,
    empirical_disagreement,
    empirical_risk,
    erm,
    finite_class,
    finite_hypothesis,
    full_cube_class,
    project_class,
    threshold_class,
    threshold_hypothesis,
)
from .procedures import (
    ConfidenceParams,
    confidence_width,
    confidence_width_anytime,
    confidence_width_weighted,
    near_optimal_mask,
    reverse_transfer_erm,
    select_source_or_target,
    transfer_erm,
)
from .ratelab import (
    ESTIMATORS,
    RateRow,
    RateTable,
    SlopeFit,
    TheoryRates,
    compare_to_theory,
    fit_slope,
    monte_carlo,
    sweep,
    theory_rates,
)
from .reweighting import (
    DensityFamily,
    delta_hat_weighted,
    multi_source_transfer_erm,
    reweighted_transfer_erm,
    weighted_disagreement_f2,
    weighted_erm,
    weighted_excess,
    weighted_risk,
)

__version__ = "0.1.0"
