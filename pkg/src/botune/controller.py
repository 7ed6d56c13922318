"""The optimization loop: randomize, train, diagnose, tune, then either
retrain (when the model changed) or take a Bayesian-optimization step.

State lives in a Checkpoint: the current space and model, every observation,
per-cycle records, and the RNG state. It is persisted after every cycle, so a
run interrupted at a cycle boundary resumes into the identical trajectory.
When tuning shrinks the space, old observations that fall outside stay in the
log but stop feeding the surrogate; when tuning adds a dimension, old
observations are padded at the new dimension's midpoint and flagged stale.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acquisition import propose_next
from .config import ExperimentConfig
from .diagnosis import EvalResult, History, diagnose
from .errors import (
    CheckpointCorrupt,
    EmptyHistory,
    IncompatibleSpaces,
    InsufficientHistory,
    NumericalFailure,
    TraineeError,
    UnsupportedVersion,
)
from .rules import (
    LayerSpec,
    ModelSpec,
    default_rule_table,
    describe_action,
    model_spec_for,
    rule_table_from_names,
    tune,
)
from .space import (
    Categorical,
    SearchSpace,
    contains,
    decode_value,
    encode,
    sample_random,
    space_from_dict,
    space_to_dict,
)
from .surrogate import fit
from .trainees import TrainRequest

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
_NO_DATA_PENALTY = 1e6

BRANCH_INITIAL = "initial"
BRANCH_RETRAIN = "retrain"
BRANCH_BO = "bo"
BRANCH_RANDOM = "random"


@dataclass(frozen=True)
class Observation:
    encoded: tuple[float, ...]
    assignment: dict
    objective: float
    cycle: int
    gp_eligible: bool = True
    stale: bool = False


@dataclass(frozen=True)
class CycleRecord:
    cycle: int
    assignment: dict
    objective: float
    issues: tuple[str, ...]
    actions: tuple[str, ...]
    branch: str
    failed: bool
    wall_clock_s: float
    history: History | None


@dataclass
class Checkpoint:
    space: SearchSpace
    model: ModelSpec
    config: dict
    rng_state: dict
    format_version: int = FORMAT_VERSION
    observations: list[Observation] = field(default_factory=list)
    records: list[CycleRecord] = field(default_factory=list)
    cycle: int = -1  # last completed cycle; -1 before the initial training
    best_y: float | None = None
    best_assignment: dict | None = None


@dataclass(frozen=True)
class Summary:
    mode: str
    seed: int
    best_objective: float
    best_assignment: dict
    records: tuple[CycleRecord, ...]

    @property
    def total_wall_clock_s(self) -> float:
        return sum(r.wall_clock_s for r in self.records)


# --- the loop -----------------------------------------------------------------


def run(cfg: ExperimentConfig, trainee, out_dir=None) -> Summary:
    """Execute a fresh experiment: one initial training plus cfg.cycles steps."""
    rng = np.random.default_rng(cfg.seed)
    ckpt = Checkpoint(
        space=cfg.space,
        model=model_spec_for(cfg.space),
        config=cfg.snapshot(),
        rng_state=rng.bit_generator.state,
    )
    params = sample_random(ckpt.space, rng)
    _train_into(ckpt, cfg, trainee, params, BRANCH_INITIAL, (), (), rng)
    ckpt.rng_state = rng.bit_generator.state
    _persist(ckpt, out_dir)
    return continue_run(ckpt, trainee, cfg.cycles, out_dir)


def continue_run(ckpt: Checkpoint, trainee, n_cycles: int, out_dir=None) -> Summary:
    """Advance an initialized checkpoint by n_cycles loop iterations."""
    from .config import config_from_snapshot

    cfg = config_from_snapshot(ckpt.config)
    rng = np.random.default_rng()
    rng.bit_generator.state = ckpt.rng_state
    table = rule_table_from_names(cfg.rules) if cfg.rules else default_rule_table()

    for _ in range(n_cycles):
        issues = ()
        actions = ()
        if cfg.mode == "tuner":
            issues = _diagnose_last(ckpt, cfg)
            new_model, new_space, applied = tune(issues, ckpt.model, ckpt.space, table)
            actions = tuple(describe_action(a.action) for a in applied)
            if new_space != ckpt.space:
                migrate_checkpoint(ckpt, ckpt.space, new_space)
        else:
            new_model = ckpt.model

        issue_names = tuple(i.kind.value for i in issues)
        if new_model != ckpt.model:
            # architecture changed: restart from a random point of the new space
            ckpt.model = new_model
            params = sample_random(ckpt.space, rng)
            _train_into(ckpt, cfg, trainee, params, BRANCH_RETRAIN, issue_names, actions, rng)
        elif cfg.mode == "random":
            params = sample_random(ckpt.space, rng)
            _train_into(ckpt, cfg, trainee, params, BRANCH_RANDOM, issue_names, actions, rng)
        else:
            bo_step(ckpt, ckpt.space, trainee, cfg, rng, issue_names, actions)
        ckpt.rng_state = rng.bit_generator.state
        _persist(ckpt, out_dir)
    return summarize(ckpt)


def bo_step(ckpt: Checkpoint, space: SearchSpace, trainee, cfg: ExperimentConfig,
            rng: np.random.Generator, issues=(), actions=()) -> Checkpoint:
    """One surrogate-guided step: fit, propose, train, record."""
    eligible = [o for o in ckpt.observations if o.gp_eligible]
    params = None
    if len(eligible) >= 2:
        try:
            model = fit([o.encoded for o in eligible], [o.objective for o in eligible])
            params = propose_next(model, space, rng, cfg.acquisition)
        except NumericalFailure as exc:
            log.warning("surrogate fit failed (%s); sampling at random", exc)
    if params is None:
        params = sample_random(space, rng)
    _train_into(ckpt, cfg, trainee, params, BRANCH_BO, issues, actions, rng)
    return ckpt


def summarize(ckpt: Checkpoint) -> Summary:
    cfg = ckpt.config["experiment"]
    best = min(ckpt.observations, key=lambda o: o.objective)
    return Summary(
        cfg.get("mode", "tuner"),
        int(cfg["seed"]),
        best.objective,
        dict(best.assignment),
        tuple(ckpt.records),
    )


def _diagnose_last(ckpt: Checkpoint, cfg: ExperimentConfig):
    last = ckpt.records[-1]
    if last.failed or last.history is None:
        return ()
    result = EvalResult(last.history.val_loss[-1], last.history.val_acc[-1], last.objective)
    try:
        return diagnose(last.history, result, cfg.thresholds)
    except (EmptyHistory, InsufficientHistory) as exc:
        log.warning("diagnosis skipped: %s", exc)
        return ()


def _train_into(ckpt, cfg, trainee, params, branch, issues, actions, rng):
    cycle = ckpt.cycle + 1
    request = TrainRequest(
        params,
        tuple(sorted(ckpt.model.active_directives)),
        cfg.epochs,
        int(rng.integers(2**31 - 1)),
    )
    start = time.perf_counter()
    try:
        history, result = trainee.train(request)
        objective = float(result.objective)
        failed = False
    except TraineeError as exc:
        log.warning("cycle %d training failed: %s", cycle, exc)
        history = None
        objective = _penalty(ckpt)
        failed = True
    elapsed = time.perf_counter() - start

    ckpt.observations.append(
        Observation(
            tuple(float(u) for u in encode(ckpt.space, params)),
            dict(params),
            objective,
            cycle,
        )
    )
    ckpt.records.append(
        CycleRecord(cycle, dict(params), objective, tuple(issues), tuple(actions),
                    branch, failed, elapsed, history)
    )
    ckpt.cycle = cycle
    _refresh_best(ckpt)


def _penalty(ckpt) -> float:
    objectives = [o.objective for o in ckpt.observations]
    return max(objectives) + 1.0 if objectives else _NO_DATA_PENALTY


def _refresh_best(ckpt: Checkpoint):
    eligible = [o for o in ckpt.observations if o.gp_eligible]
    if eligible:
        best = min(eligible, key=lambda o: o.objective)
        ckpt.best_y = best.objective
        ckpt.best_assignment = dict(best.assignment)
    else:
        ckpt.best_y = None
        ckpt.best_assignment = None


# --- checkpoint migration ----------------------------------------------------


def _domain_is_subset(new, old) -> bool:
    if type(new) is not type(old):
        return False
    if isinstance(new, Categorical):
        return set(new.labels) <= set(old.labels)
    return new.min >= old.min and new.max <= old.max


def migrate_checkpoint(ckpt: Checkpoint, old_space: SearchSpace,
                       new_space: SearchSpace) -> Checkpoint:
    """Re-home observations after a space mutation (in place).

    Observations that left the space stay logged but stop feeding the GP;
    added dimensions are padded at their midpoint (unit coordinate exactly
    0.5) and the observation marked stale. The incumbent best is recomputed
    over what remains eligible.
    """
    old_names = old_space.names
    if new_space.names[: len(old_names)] != old_names:
        raise IncompatibleSpaces(
            f"dimensions {old_names} are not a prefix of {new_space.names}"
        )
    for name in old_names:
        if not _domain_is_subset(new_space.dimension(name).domain,
                                 old_space.dimension(name).domain):
            raise IncompatibleSpaces(f"dimension {name!r} is not a shrink of the original")

    added = [d for d in new_space.dimensions if d.name not in old_names]
    migrated = []
    for obs in ckpt.observations:
        assignment = dict(obs.assignment)
        for dim in added:
            if dim.name not in assignment:
                assignment[dim.name] = decode_value(dim.domain, 0.5)
        stale = obs.stale or bool(added)
        if obs.gp_eligible and contains(new_space, assignment):
            encoded = encode(new_space, assignment)
            for dim in added:
                encoded[new_space.index(dim.name)] = 0.5
            migrated.append(
                Observation(tuple(float(u) for u in encoded), assignment,
                            obs.objective, obs.cycle, True, stale)
            )
        else:
            migrated.append(dataclasses.replace(obs, assignment=assignment,
                                                gp_eligible=False, stale=stale))
    ckpt.observations = migrated
    ckpt.space = new_space
    _refresh_best(ckpt)
    return ckpt


# --- persistence ---------------------------------------------------------------


def _history_to_dict(history: History | None):
    if history is None:
        return None
    return {
        "train_loss": list(history.train_loss),
        "val_loss": list(history.val_loss),
        "train_acc": list(history.train_acc),
        "val_acc": list(history.val_acc),
    }


def _history_from_dict(data) -> History | None:
    if data is None:
        return None
    return History(
        tuple(data["train_loss"]), tuple(data["val_loss"]),
        tuple(data["train_acc"]), tuple(data["val_acc"]),
    )


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    doc = {
        "format_version": ckpt.format_version,
        "space": space_to_dict(ckpt.space),
        "model": {
            "layers": [[l.kind, l.size_dim] for l in ckpt.model.layers],
            "directives": sorted(ckpt.model.active_directives),
        },
        "observations": [
            {
                "encoded": list(o.encoded),
                "assignment": o.assignment,
                "objective": o.objective,
                "cycle": o.cycle,
                "gp_eligible": o.gp_eligible,
                "stale": o.stale,
            }
            for o in ckpt.observations
        ],
        "records": [
            {
                "cycle": r.cycle,
                "assignment": r.assignment,
                "objective": r.objective,
                "issues": list(r.issues),
                "actions": list(r.actions),
                "branch": r.branch,
                "failed": r.failed,
                "wall_clock_s": r.wall_clock_s,
                "history": _history_to_dict(r.history),
            }
            for r in ckpt.records
        ],
        "rng_state": ckpt.rng_state,
        "cycle": ckpt.cycle,
        "best_y": ckpt.best_y,
        "best_assignment": ckpt.best_assignment,
        "config": ckpt.config,
    }
    target = Path(path)
    tmp = target.with_suffix(target.suffix + ".tmp")
    tmp.write_text(json.dumps(doc, indent=1))
    tmp.replace(target)


def load_checkpoint(path) -> Checkpoint:
    raw = Path(path).read_text()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CheckpointCorrupt(f"{path}: {exc.msg} at offset {exc.pos}") from None
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise CheckpointCorrupt(f"{path}: not a checkpoint document")
    version = doc["format_version"]
    if version > FORMAT_VERSION:
        raise UnsupportedVersion(f"checkpoint format {version} is newer than {FORMAT_VERSION}")
    try:
        return Checkpoint(
            space=space_from_dict(doc["space"]),
            model=ModelSpec(
                tuple(LayerSpec(k, s) for k, s in doc["model"]["layers"]),
                frozenset(doc["model"]["directives"]),
            ),
            config=doc["config"],
            rng_state=doc["rng_state"],
            format_version=version,
            observations=[
                Observation(
                    tuple(o["encoded"]), o["assignment"], o["objective"],
                    o["cycle"], o["gp_eligible"], o["stale"],
                )
                for o in doc["observations"]
            ],
            records=[
                CycleRecord(
                    r["cycle"], r["assignment"], r["objective"],
                    tuple(r["issues"]), tuple(r["actions"]), r["branch"],
                    r["failed"], r["wall_clock_s"], _history_from_dict(r["history"]),
                )
                for r in doc["records"]
            ],
            cycle=doc["cycle"],
            best_y=doc["best_y"],
            best_assignment=doc["best_assignment"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointCorrupt(f"{path}: malformed field ({exc})") from exc


# --- run-directory artifacts ----------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _assignment_columns(space: SearchSpace, assignment: dict) -> list[str]:
    return [_fmt(assignment[n]) if n in assignment else "" for n in space.names]


def write_cycles_csv(ckpt: Checkpoint, path) -> None:
    names = ckpt.space.names
    lines = ["cycle," + ",".join(names) + ",objective,issues,actions,wall_clock_s"]
    for r in ckpt.records:
        lines.append(",".join(
            [str(r.cycle)] + _assignment_columns(ckpt.space, r.assignment)
            + [_fmt(r.objective), ";".join(r.issues), ";".join(r.actions),
               f"{r.wall_clock_s:.6f}"]
        ))
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_csv(ckpt: Checkpoint, path) -> None:
    """Deterministic run summary: like the cycle log, minus wall clock."""
    names = ckpt.space.names
    lines = ["cycle," + ",".join(names) + ",objective,issues,actions,branch,best_objective"]
    best = None
    for r in ckpt.records:
        best = r.objective if best is None else min(best, r.objective)
        lines.append(",".join(
            [str(r.cycle)] + _assignment_columns(ckpt.space, r.assignment)
            + [_fmt(r.objective), ";".join(r.issues), ";".join(r.actions),
               r.branch, _fmt(best)]
        ))
    Path(path).write_text("\n".join(lines) + "\n")


def write_curves_csv(ckpt: Checkpoint, path) -> None:
    lines = ["cycle,epoch,train_loss,val_loss,train_acc,val_acc"]
    for r in ckpt.records:
        if r.history is None:
            continue
        h = r.history
        for e in range(h.epochs):
            lines.append(
                f"{r.cycle},{e},{_fmt(h.train_loss[e])},{_fmt(h.val_loss[e])},"
                f"{_fmt(h.train_acc[e])},{_fmt(h.val_acc[e])}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def _persist(ckpt: Checkpoint, out_dir) -> None:
    if out_dir is None:
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_cycles_csv(ckpt, out / "cycles.csv")
    write_summary_csv(ckpt, out / "summary.csv")
    write_curves_csv(ckpt, out / "curves.csv")
    save_checkpoint(ckpt, out / "checkpoint.json")
