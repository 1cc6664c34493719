"""proxymr: a two-generation Mendelian randomization laboratory.

Simulate parent-child genetic data from explicit structural causal models,
check instrument validity on the corresponding graphs, and measure what the
parental-proxy Wald ratio does and does not recover.
"""

__version__ = "0.1.0"

from .dag import (
    Dag,
    GraphError,
    IvReport,
    Node,
    Path,
    canonical_dag,
    check_instrument,
    d_separated,
    directed_paths,
    enumerate_paths,
    path_open,
)
from .estimators import (
    CORRECTIONS,
    ContrastMethod,
    DegenerateInstrument,
    EstimateReport,
    EstimatorError,
    EstimatorUnstable,
    WeakInstrument,
    assoc_diff,
    bootstrap_se,
    f_identity,
    f_mendelian,
    oracle_wald_child,
    partial_correlation,
    proxy_wald,
    stability_gaps,
    wald,
)
from .harness import (
    AllReplicatesFailed,
    ConfigError,
    ExperimentConfig,
    RunReport,
    build_estimate_report,
    run_experiment,
)
from .scenarios import (
    CATALOG,
    Expectation,
    Scenario,
    ScenarioReport,
    baseline_mendelian,
    catalog_json,
    concordance_config,
    default_config,
    default_generation,
    drifted_gene_exposure,
    evaluate_scenario,
    famine_reversal,
    get_scenario,
    induced_dag,
    outcome_stable,
    vaccine_exclusion,
)
from .simulate import (
    CHILD,
    PARENT,
    GenerationParams,
    MonotonicityError,
    ObservedTrioData,
    ScmConfig,
    TrioDataset,
    derive_seed,
    oracle_associations,
    oracle_effects,
    sample_trio,
)

__all__ = [
    "__version__",
    "Dag",
    "GraphError",
    "IvReport",
    "Node",
    "Path",
    "canonical_dag",
    "check_instrument",
    "d_separated",
    "directed_paths",
    "enumerate_paths",
    "path_open",
    "CORRECTIONS",
    "ContrastMethod",
    "DegenerateInstrument",
    "EstimateReport",
    "EstimatorError",
    "EstimatorUnstable",
    "WeakInstrument",
    "assoc_diff",
    "bootstrap_se",
    "f_identity",
    "f_mendelian",
    "oracle_wald_child",
    "partial_correlation",
    "proxy_wald",
    "stability_gaps",
    "wald",
    "AllReplicatesFailed",
    "ConfigError",
    "ExperimentConfig",
    "RunReport",
    "build_estimate_report",
    "run_experiment",
    "CATALOG",
    "Expectation",
    "Scenario",
    "ScenarioReport",
    "baseline_mendelian",
    "catalog_json",
    "concordance_config",
    "default_config",
    "default_generation",
    "drifted_gene_exposure",
    "evaluate_scenario",
    "famine_reversal",
    "get_scenario",
    "induced_dag",
    "outcome_stable",
    "vaccine_exclusion",
    "CHILD",
    "PARENT",
    "GenerationParams",
    "MonotonicityError",
    "ObservedTrioData",
    "ScmConfig",
    "TrioDataset",
    "derive_seed",
    "oracle_associations",
    "oracle_effects",
    "sample_trio",
]
