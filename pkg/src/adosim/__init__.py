"""Adaptive design optimization on discrete-grid beliefs.

The package covers the full loop: finite distributions and information
measures (`dist`), likelihood families (`models`), joint beliefs with
Bayesian updating (`belief`), global utility functions (`utility`),
expected focal divergence and its decomposition under a population belief
(`efd`), stimulus-selection policies (`policy`), a seeded replication
harness (`sim`), and a config-driven CLI (`cli`).
"""

__version__ = "0.1.0"

from .belief import (FocusError, FocusKind, ImpossibleObservationError,
                     JointBelief, UpdateInfo)
from .dist import (DiscreteDist, InvalidDistributionError, SupportMismatchError,
                   cross_entropy, discretize_beta, discretize_normal, entropy,
                   kl_divergence, normalize, point_mass, product_dist, uniform)
from .efd import (EfdBreakdown, efd_decomposition, efd_surface,
                  expected_focal_divergence, response_distribution)
from .models import (IRT_DISCRIMINATION, ResponseModel, exp_likelihood,
                     exp_model, gaussian_model, irt_likelihood, irt_model,
                     make_model, pow_likelihood, pow_model, retention_prior)
from .policy import (DesignPolicy, PolicyConfigError, Selection, ado_select,
                     make_fixed_schedule, random_select)
from .utility import (UtilityKind, mi_utility, mi_utility_via_kl,
                      total_entropy_utility, ucb_utility, utility_profile,
                      utility_value)
from .config import ConfigError, ExperimentConfig, emit_config, parse_config
from .sim import (BatchResult, TrialRecord, replication_rng, run_batch,
                  run_replication, sample_ground_truth, summarize_records)
