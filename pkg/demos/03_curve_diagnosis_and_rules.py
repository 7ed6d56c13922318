"""
Diagnosing training curves and applying tuning rules
=====================================================

The curve simulator produces each pathology on demand; the diagnosis module
names it, and the rule table turns the verdict into concrete search-space
shrinks and model directives.
"""
from botune import (
    Dimension,
    IntegerRange,
    RealLinear,
    RealLog,
    SearchSpace,
    TrainRequest,
    diagnose,
    model_spec_for,
    synthetic_curves,
    tune,
)
from botune.rules import describe_action
from botune.trainees import roles_from_space

space = SearchSpace((
    Dimension("lr", RealLog(1e-5, 1e-1), role="learning_rate"),
    Dimension("batch", IntegerRange(1, 256), role="batch_size"),
    Dimension("units", IntegerRange(4, 64), role="unit_count"),
    Dimension("dropout", RealLinear(0.0, 0.6), role="dropout_rate"),
))
roles = roles_from_space(space)
model = model_spec_for(space)

scenarios = {
    "too-hot learning rate": {"lr": 1.0, "batch": 64, "units": 32, "dropout": 0.2},
    "tiny batches": {"lr": 0.05, "batch": 1, "units": 32, "dropout": 0.2},
    "oversized network": {"lr": 0.05, "batch": 128, "units": 64, "dropout": 0.02},
    "healthy run": {"lr": 0.05, "batch": 128, "units": 32, "dropout": 0.3},
}

for label, assignment in scenarios.items():
    history, result = synthetic_curves(
        TrainRequest(assignment, (), epochs=20, seed=0), roles
    )
    report = diagnose(history, result)
    print(f"{label}:")
    if not report:
        print("  no issues")
    for issue in report:
        print(f"  {issue.kind.value} (score {issue.score:.3f})")
    new_model, new_space, applied = tune(report, model, space)
    for action in applied:
        print(f"    -> {describe_action(action.action)}")
    if new_model != model:
        print(f"    -> model directives now {sorted(new_model.active_directives)}")
