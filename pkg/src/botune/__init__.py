"""Bayesian hyper-parameter optimization with curve diagnosis and tuning rules.

A GP-surrogate/expected-improvement optimizer wrapped in a loop that watches
each training's loss and accuracy curves, diagnoses pathologies (overfitting,
underfitting, noisy or rising loss), and responds by shrinking the search
space or instructing the trainee to change its architecture.
"""

from .acquisition import AcquisitionConfig, expected_improvement, propose_next
from .config import ExperimentConfig, build_trainee, load_config
from .controller import (
    Checkpoint,
    CycleRecord,
    Observation,
    Summary,
    bo_step,
    continue_run,
    load_checkpoint,
    migrate_checkpoint,
    run,
    save_checkpoint,
    summarize,
)
from .diagnosis import (
    DiagnosisThresholds,
    EvalResult,
    History,
    Issue,
    IssueKind,
    diagnose,
    loss_slope,
    oscillation_score,
    tail_mean,
)
from .rules import (
    AppliedAction,
    ModelDirective,
    ModelSpec,
    RuleTable,
    default_rule_table,
    model_spec_for,
    tune,
)
from .space import (
    AddDimension,
    Assignment,
    Categorical,
    Dimension,
    IntegerRange,
    LowerUpperBound,
    RaiseLowerBound,
    RealLinear,
    RealLog,
    RemoveCategoricalMembers,
    SearchSpace,
    apply_mutation,
    contains,
    decode,
    encode,
    sample_random,
)
from .surrogate import (
    FitConfig,
    GpModel,
    KernelParams,
    fit,
    fit_with_params,
    kernel,
    log_marginal_likelihood,
    posterior,
)
from .trainees import (
    Capabilities,
    Dataset,
    ExternalTrainee,
    MlpTrainee,
    SyntheticConfig,
    SyntheticTrainee,
    TrainRequest,
    make_blobs,
    mlp_train,
    parse_idx,
    run_external_trainee,
    synthetic_curves,
)

__version__ = "0.1.0"
