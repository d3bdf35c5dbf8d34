"""Surrogate-based global optimization over mixed hierarchical design spaces.

Gaussian-process surrogates with mixed-categorical and hierarchical
kernels, single- and bi-objective Bayesian optimization loops under
constraints, PLS-based hyperparameter reduction and linear embeddings,
analytic benchmark problems, and the metrics to validate all of it.
"""

from .space import (DesignSpace, Doe, MixedPoint, Variable, categorical_var,
                    continuous_var, integer_var, lhs_sample)
from .kernels import (CategoricalKernelParams, HierarchicalKernelParams,
                      KernelConfig, NumericalError, alg_distance, alg_embed,
                      assemble_correlation, categorical_corr, continuous_corr,
                      decreed_categorical_corr, default_config,
                      hypersphere_matrix, level_corr_matrix, phi_matrix)
from .gp import (FitOptions, GpModel, MixedGaussianProcess, Prediction, fit_gp,
                 likelihood_grad, log_likelihood, model_from_export)
from .pls import (AdaptivePlsConfig, EmbeddingSpec, PlsProjection,
                  adaptive_components, fit_pls, kpls_kernel_params,
                  make_embedding, press, wold_r)
from .acquisition import (AcquisitionConfig, constrained_feasible, ehvi,
                          expected_improvement, hypervolume, min_prob_improvement,
                          mo_acquisition, prob_improvement, regularized, wb2, wb2s)
from .metrics import FrontReference, data_profile, dominates, igd_plus, pareto_filter
from .optimize import (OptimizerConfig, ParetoArchive, RunHistory, nsga2_postprocess,
                       nsga2_search, run_ego, run_embedded, run_segomoe, run_sego)
from .problems import (Problem, available_problems, eval_cosine,
                       eval_hier_goldstein, eval_mb, eval_standard_mo, eval_toy,
                       get_problem)

__version__ = "0.1.0"
