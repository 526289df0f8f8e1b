"""Causal falling rule lists: subgroups with monotonically falling treatment
effects, found by annealing over mined rules and scored by a variational
evidence bound.

Typical flow: ingest a CSV into a Dataset, mine a candidate RulePool, anneal
over rule lists with a ModelScorer, then inspect the winning list's fitted
effects (and optionally cross-check them with the Gibbs sampler).
"""

__version__ = "0.1.0"

from .anneal import AnnealConfig, ModelScorer, ScoreCache, SearchResult, anneal
from .errors import (
    CfrlError,
    ConfigError,
    DegenerateBinningError,
    DimensionError,
    EmptyInputError,
    InputError,
    NumericalError,
    ParameterError,
    ParseError,
    SchemaError,
)
from .gibbs import GibbsTrace, gibbs_step, run_gibbs, trace_effect_summary
from .ingest import (
    BinarizationSpec,
    Dataset,
    IngestConfig,
    RawTable,
    assemble_dataset,
    binarize,
    ingest,
    load_csv,
    load_ingest_config,
    parse_ingest_config,
)
from .mining import DEFAULT_RULE, Rule, RulePool, mine_rules, rule_support
from .model import (
    Hyperparameters,
    LatentParams,
    PotentialOutcomes,
    SubgroupStats,
    log_joint,
    log_joint_grad,
    sample_prior,
    simulate_outcomes,
    treatment_effects,
)
from .recovery import (
    RecoveryConfig,
    RecoveryResult,
    candidate_pool,
    plant_instance,
    run_recovery_study,
)
from .rulelist import (
    MAX_RULES,
    RuleList,
    assign_subgroups,
    edit_distance,
    feasible_moves,
    propose_move,
    subgroup_counts,
)
from .vi import ElboTrace, VariationalPosterior, elbo, fit_vi, posterior_effect_summary
from .wage import generate_wage_study, wage_ingest_config

__all__ = [
    "__version__",
    "AnnealConfig", "ModelScorer", "ScoreCache", "SearchResult", "anneal",
    "CfrlError", "ConfigError", "DegenerateBinningError", "DimensionError",
    "EmptyInputError", "InputError", "NumericalError", "ParameterError",
    "ParseError", "SchemaError",
    "GibbsTrace", "gibbs_step", "run_gibbs", "trace_effect_summary",
    "BinarizationSpec", "Dataset", "IngestConfig", "RawTable",
    "assemble_dataset", "binarize", "ingest", "load_csv",
    "load_ingest_config", "parse_ingest_config",
    "DEFAULT_RULE", "Rule", "RulePool", "mine_rules", "rule_support",
    "Hyperparameters", "LatentParams", "PotentialOutcomes", "SubgroupStats",
    "log_joint", "log_joint_grad", "sample_prior", "simulate_outcomes",
    "treatment_effects",
    "RecoveryConfig", "RecoveryResult", "candidate_pool", "plant_instance",
    "run_recovery_study",
    "MAX_RULES", "RuleList", "assign_subgroups", "edit_distance",
    "feasible_moves", "propose_move", "subgroup_counts",
    "ElboTrace", "VariationalPosterior", "elbo", "fit_vi",
    "posterior_effect_summary",
    "generate_wage_study", "wage_ingest_config",
]
