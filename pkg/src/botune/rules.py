"""Issue-to-action tuning rules.

Each diagnosed issue maps to an ordered list of action templates; a template
is instantiated against the current search space (so bound targets are
computed from the bounds in force when the rule fires) and yields concrete
actions: space mutations and/or model directives.

Dimensions are bound by semantic role, not by name: "more neurons" raises the
lower bound of every unit_count dimension, "larger batches" acts on the
batch_size dimension, "smaller learning rate" on the learning_rate dimension.
A missing binding skips that issue with a warning instead of failing the run.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Union

from .diagnosis import DiagnosisReport, IssueKind
from .errors import RuleBindingError
from .space import (
    AddDimension,
    LowerUpperBound,
    RaiseLowerBound,
    RealLog,
    SearchSpace,
    SpaceMutation,
    apply_mutation,
    domain_midpoint,
)

log = logging.getLogger(__name__)

L2_REGULARIZATION = "l2_regularization"
BATCH_NORMALIZATION = "batch_normalization"

ROLE_UNIT_COUNT = "unit_count"
ROLE_BATCH_SIZE = "batch_size"
ROLE_LEARNING_RATE = "learning_rate"
ROLE_DROPOUT = "dropout_rate"
ROLE_L2_COEFFICIENT = "l2_coefficient"

L2_LAMBDA_DIMENSION = "l2_lambda"
L2_LAMBDA_DOMAIN = RealLog(1e-6, 1e-1)


@dataclass(frozen=True)
class LayerSpec:
    """Abstract layer: a kind plus the name of the dimension sizing it, if any."""

    kind: str
    size_dim: str | None = None


@dataclass(frozen=True)
class ModelSpec:
    layers: tuple[LayerSpec, ...]
    active_directives: frozenset[str] = frozenset()

    def with_directive(self, name: str) -> "ModelSpec":
        return replace(self, active_directives=self.active_directives | {name})


def model_spec_for(space: SearchSpace) -> ModelSpec:
    """Default architecture sketch: one sized layer per unit_count dimension."""
    layers = tuple(LayerSpec("dense", d.name) for d in space.by_role(ROLE_UNIT_COUNT))
    return ModelSpec(layers + (LayerSpec("output"),))


@dataclass(frozen=True)
class ModelDirective:
    name: str


Action = Union[SpaceMutation, ModelDirective]


@dataclass(frozen=True)
class AppliedAction:
    """One action that took effect, attributed to the issue that fired it."""

    issue: IssueKind
    action: Action


ActionTemplate = Callable[[SearchSpace], list]


def _single_role_dim(space: SearchSpace, role: str):
    dims = space.by_role(role)
    if not dims:
        raise RuleBindingError(f"no dimension tagged {role!r}")
    return dims[0]


def _regularize(space: SearchSpace) -> list:
    return [
        ModelDirective(L2_REGULARIZATION),
        AddDimension(L2_LAMBDA_DIMENSION, L2_LAMBDA_DOMAIN, ROLE_L2_COEFFICIENT),
    ]


def _batch_normalize(space: SearchSpace) -> list:
    return [ModelDirective(BATCH_NORMALIZATION)]


def _more_neurons(space: SearchSpace) -> list:
    dims = space.by_role(ROLE_UNIT_COUNT)
    if not dims:
        raise RuleBindingError(f"no dimension tagged {ROLE_UNIT_COUNT!r}")
    return [RaiseLowerBound(d.name, domain_midpoint(d.domain)) for d in dims]


def _larger_batches(space: SearchSpace) -> list:
    d = _single_role_dim(space, ROLE_BATCH_SIZE)
    return [RaiseLowerBound(d.name, domain_midpoint(d.domain))]


def _smaller_learning_rate(space: SearchSpace) -> list:
    d = _single_role_dim(space, ROLE_LEARNING_RATE)
    return [LowerUpperBound(d.name, domain_midpoint(d.domain))]


@dataclass(frozen=True)
class RuleTable:
    entries: dict

    def templates_for(self, kind: IssueKind) -> tuple[ActionTemplate, ...]:
        return self.entries[kind]


ACTION_TEMPLATES = {
    "regularize": _regularize,
    "batch_normalize": _batch_normalize,
    "more_neurons": _more_neurons,
    "larger_batches": _larger_batches,
    "smaller_learning_rate": _smaller_learning_rate,
}


def default_rule_table() -> RuleTable:
    return RuleTable(
        {
            IssueKind.OVERFITTING: (_regularize, _batch_normalize),
            IssueKind.UNDERFITTING: (_more_neurons,),
            IssueKind.FLUCTUATING_LOSS: (_larger_batches,),
            IssueKind.INCREASING_LOSS_TREND: (_smaller_learning_rate,),
        }
    )


def rule_table_from_names(overrides: dict) -> RuleTable:
    """Re-bind issues to the named built-in action templates.

    Issues absent from the mapping keep their defaults; only names from
    ACTION_TEMPLATES are accepted (no new action kinds).
    """
    entries = dict(default_rule_table().entries)
    for issue_name, template_names in overrides.items():
        kind = IssueKind(issue_name)
        try:
            entries[kind] = tuple(ACTION_TEMPLATES[n] for n in template_names)
        except KeyError as exc:
            raise ValueError(
                f"unknown action template {exc.args[0]!r}; "
                f"choose from {sorted(ACTION_TEMPLATES)}"
            ) from None
    return RuleTable(entries)


def tune(
    issues: DiagnosisReport,
    model: ModelSpec,
    space: SearchSpace,
    table: RuleTable | None = None,
) -> tuple[ModelSpec, SearchSpace, list[AppliedAction]]:
    """Apply each issue's actions in report order; returns what actually changed.

    Adding an already-present dimension or directive is a no-op, so the rule
    set is idempotent; an issue whose rule cannot bind is skipped whole.
    """
    table = table or default_rule_table()
    applied: list[AppliedAction] = []
    cur_m, cur_s = model, space
    for issue in issues:
        snapshot = (cur_m, cur_s, len(applied))
        try:
            for template in table.templates_for(issue.kind):
                for action in template(cur_s):
                    if isinstance(action, ModelDirective):
                        if action.name not in cur_m.active_directives:
                            cur_m = cur_m.with_directive(action.name)
                            applied.append(AppliedAction(issue.kind, action))
                    elif isinstance(action, AddDimension) and action.name in cur_s.names:
                        continue
                    else:
                        new_s = apply_mutation(cur_s, action)
                        if new_s != cur_s:
                            applied.append(AppliedAction(issue.kind, action))
                            cur_s = new_s
        except RuleBindingError as exc:
            cur_m, cur_s, kept = snapshot
            del applied[kept:]
            log.warning("skipping %s: %s", issue.kind.value, exc)
    return cur_m, cur_s, applied


def describe_action(action: Action) -> str:
    """Compact deterministic rendering for logs and CSV cells."""
    if isinstance(action, ModelDirective):
        return action.name
    if isinstance(action, AddDimension):
        return f"add:{action.name}"
    if isinstance(action, RaiseLowerBound):
        return f"raise_min:{action.name}={action.new_min!r}"
    if isinstance(action, LowerUpperBound):
        return f"lower_max:{action.name}={action.new_max!r}"
    return f"remove_labels:{action.name}={','.join(action.labels)}"
