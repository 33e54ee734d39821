"""Ranked, probabilistic grammar rules from dependency treebanks.

Pipeline: CoNLL-U parsing -> scope/response instance extraction ->
boolean feature space over the edge's syntactic neighborhood -> L1
logistic regression regularization path (features ranked by entry
order) -> independence-test annotation of every selected rule.
"""

from .config import ConfigError, ReportOptions, RunConfig, load_config, validate_config
from .featurize import (
    DesignMatrix,
    Feature,
    FeatureAtom,
    FeatureConfig,
    FeatureSpace,
    build_feature_space,
    enumerate_atoms,
    vectorize,
)
from .pipeline import Report, run
from .query import (
    AgreementResponse,
    EmptyScopeError,
    Instance,
    NodeRole,
    OrderResponse,
    Response,
    ScopeConstraint,
    ScopePattern,
    extract_instances,
    scope_counts,
)
from .regpath import (
    DegenerateLabelsError,
    PathConfig,
    PathResult,
    lambda_grid,
    nonzero_features,
    run_path,
)
from .rulestats import (
    DegenerateScopeError,
    RankComparison,
    RuleCounts,
    RuleRecord,
    compute_rule,
    coverage_precision,
    cramers_phi,
    fractional_ranks,
    g_test,
    spearman,
)
from .sparse_glm import (
    FitNumericalError,
    FitProblem,
    FitResult,
    SolverConfig,
    fit,
    kkt_violation,
    lambda_max,
    loss,
    predict_proba,
)
from .treebank import (
    ParseError,
    ParseOptions,
    Sentence,
    Token,
    Treebank,
    dependents_of,
    parse_conllu,
    parse_conllu_file,
)

__version__ = "0.1.0"
