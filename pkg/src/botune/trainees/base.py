"""Shared trainee-facing types: requests, capabilities, role resolution."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import RuleBindingError
from ..space import SearchSpace

PROTOCOL_VERSION = 1

OBJECTIVE_VAL_LOSS = "val_loss"
OBJECTIVE_NEG_VAL_ACC = "neg_val_acc"


@dataclass(frozen=True)
class TrainRequest:
    assignment: dict
    directives: tuple[str, ...] = ()
    epochs: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "directives", tuple(self.directives))
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


@dataclass(frozen=True)
class Capabilities:
    name: str
    directives: tuple[str, ...] = ()
    version: int = PROTOCOL_VERSION


def roles_from_space(space: SearchSpace) -> dict[str, list[str]]:
    """Map each semantic role to the dimension names carrying it."""
    out: dict[str, list[str]] = {}
    for d in space.dimensions:
        if d.role is not None:
            out.setdefault(d.role, []).append(d.name)
    return out


def role_value(roles: dict, assignment: dict, role: str, fallback: str | None = None):
    """Value of the single dimension tagged with the role.

    Dimensions added by tuning rules after the trainee was constructed are
    not in its role map; `fallback` names the conventional dimension to use
    then (e.g. "l2_lambda").
    """
    names = [n for n in roles.get(role, []) if n in assignment]
    if names:
        return assignment[names[0]]
    if fallback is not None and fallback in assignment:
        return assignment[fallback]
    raise RuleBindingError(f"assignment has no dimension tagged {role!r}")


def role_values(roles: dict, assignment: dict, role: str) -> list:
    names = [n for n in roles.get(role, []) if n in assignment]
    if not names:
        raise RuleBindingError(f"assignment has no dimension tagged {role!r}")
    return [assignment[n] for n in names]


def objective_from(kind: str, final_val_loss: float, final_val_acc: float) -> float:
    if kind == OBJECTIVE_VAL_LOSS:
        return float(final_val_loss)
    if kind == OBJECTIVE_NEG_VAL_ACC:
        return -float(final_val_acc)
    raise ValueError(f"unknown objective kind {kind!r}")
