"""credexp: Bayesian local surrogate explanations with credible intervals,
a closed-form query-budget estimate, and a variance-focused sampler."""

from .blackbox import (
    BitQueryCache,
    BlackBoxModel,
    ModelFault,
    linear_logit,
    load_csv_dataset,
    load_tree_ensemble,
    model_from_spec,
    sparse_linear,
    toy_surface,
    toy_surface_model,
    xor_nonlinear,
)
from .distributions import (
    ScaledInvChiSq,
    StudentT3,
    normal_two_tailed_multiplier,
    sample_scaled_inv_chisq,
    sample_student_t3,
    student_t_interval,
    student_t_pdf,
)
from .explain import build_perturbation_set, explain
from .kernels import ProximityKernel, exponential_weight, proximity_weights, shapley_weight
from .posterior import (
    PerturbationSet,
    PosteriorExplanation,
    PriorConfig,
    SufficientStats,
    credible_intervals,
    error_uncertainty,
    fit,
    predictive_variance,
    shap_additivity_residual,
)
from .ptg import PtgEstimate, PtgInputs, estimate_ptg, seed_then_estimate
from .sampling import SamplingConfig, SamplingTrace, bias_check, run_focused, run_random
from .space import (
    InstanceContext,
    bits_from_string,
    bits_to_string,
    coalition_size,
    context_from_config,
    sample_perturbations,
    to_original_space,
)

__version__ = "0.1.0"
