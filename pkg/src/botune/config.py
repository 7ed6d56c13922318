"""Experiment configuration: TOML loading, validation, trainee construction.

The config file is a single TOML document with an [experiment] table, a
[trainee] table, one [space.<name>] table per dimension (document order is
the dimension order), and optional [diagnosis]/[acquisition] overrides.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .acquisition import AcquisitionConfig
from .diagnosis import DiagnosisThresholds
from .errors import ConfigError, InvalidInput, InvalidSpace
from .rules import rule_table_from_names
from .space import SearchSpace, space_from_dict, space_to_dict
from .trainees import (
    ExternalTrainee,
    MlpTrainee,
    OBJECTIVE_NEG_VAL_ACC,
    OBJECTIVE_VAL_LOSS,
    SyntheticConfig,
    SyntheticTrainee,
    make_blobs,
    roles_from_space,
)

MODES = ("tuner", "plain_bo", "random")
OBJECTIVES = (OBJECTIVE_VAL_LOSS, OBJECTIVE_NEG_VAL_ACC)
TRAINEE_KINDS = ("synthetic", "mlp", "external")


@dataclass(frozen=True)
class ExperimentConfig:
    space: SearchSpace
    cycles: int
    epochs: int
    seed: int
    mode: str = "tuner"
    objective: str = OBJECTIVE_VAL_LOSS
    thresholds: DiagnosisThresholds = field(default_factory=DiagnosisThresholds)
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    trainee: dict = field(default_factory=lambda: {"kind": "synthetic"})
    rules: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.space) == 0:
            raise ConfigError("search space is empty")
        if self.cycles < 0:
            raise ConfigError(f"cycles must be >= 0, got {self.cycles}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        kind = self.trainee.get("kind")
        if kind not in TRAINEE_KINDS:
            raise ConfigError(f"trainee kind must be one of {TRAINEE_KINDS}, got {kind!r}")
        if kind == "external" and not self.trainee.get("command"):
            raise ConfigError("external trainee needs a command")
        if self.rules:
            try:
                rule_table_from_names(self.rules)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None

    def snapshot(self) -> dict:
        """JSON-serializable form embedded in checkpoints."""
        return {
            "experiment": {
                "seed": self.seed,
                "cycles": self.cycles,
                "epochs": self.epochs,
                "mode": self.mode,
                "objective": self.objective,
            },
            "trainee": dict(self.trainee),
            "space": space_to_dict(self.space),
            "diagnosis": dataclasses.asdict(self.thresholds),
            "acquisition": dataclasses.asdict(self.acquisition),
            "rules": {k: list(v) for k, v in self.rules.items()},
        }


def config_from_snapshot(snapshot: dict, **overrides) -> ExperimentConfig:
    exp = dict(snapshot["experiment"])
    exp.update(overrides)
    try:
        return ExperimentConfig(
            space=space_from_dict(snapshot["space"]),
            cycles=int(exp["cycles"]),
            epochs=int(exp["epochs"]),
            seed=int(exp["seed"]),
            mode=exp.get("mode", "tuner"),
            objective=exp.get("objective", OBJECTIVE_VAL_LOSS),
            thresholds=DiagnosisThresholds(**snapshot.get("diagnosis", {})),
            acquisition=AcquisitionConfig(**snapshot.get("acquisition", {})),
            trainee=dict(snapshot.get("trainee", {"kind": "synthetic"})),
            rules=dict(snapshot.get("rules", {})),
        )
    except (KeyError, TypeError, ValueError, InvalidSpace, InvalidInput) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def _space_from_tables(tables: dict) -> list[dict]:
    entries = []
    for name, table in tables.items():
        if not isinstance(table, dict):
            raise ConfigError(f"space entry {name!r} must be a table")
        entries.append({"name": name, **table})
    return entries


def load_config(path, **overrides) -> ExperimentConfig:
    """Parse and validate a TOML experiment file; overrides patch [experiment]."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        with p.open("rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    if "space" not in doc or not doc["space"]:
        raise ConfigError("config defines no [space.<name>] tables")
    snapshot = {
        "experiment": doc.get("experiment", {}),
        "trainee": doc.get("trainee", {"kind": "synthetic"}),
        "space": _space_from_tables(doc["space"]),
        "diagnosis": doc.get("diagnosis", {}),
        "acquisition": doc.get("acquisition", {}),
        "rules": doc.get("rules", {}),
    }
    for key in ("seed", "cycles", "epochs"):
        if key not in snapshot["experiment"] and key not in overrides:
            raise ConfigError(f"[experiment] is missing {key!r}")
    return config_from_snapshot(snapshot, **overrides)


def build_trainee(cfg: ExperimentConfig):
    """Instantiate the trainee named by the config."""
    spec = cfg.trainee
    kind = spec["kind"]
    roles = roles_from_space(cfg.space)
    if kind == "synthetic":
        overrides = spec.get("constants", {})
        synth_cfg = SyntheticConfig(**overrides) if overrides else SyntheticConfig()
        return SyntheticTrainee(roles, synth_cfg, cfg.objective)
    if kind == "mlp":
        ds = spec.get("dataset", {})
        data = make_blobs(
            int(ds.get("n_per_class", 50)),
            int(ds.get("n_classes", 3)),
            int(ds.get("n_features", 8)),
            float(ds.get("spread", 1.0)),
            int(ds.get("seed", 0)),
        )
        return MlpTrainee(data, roles, cfg.objective)
    return ExternalTrainee(spec["command"], float(spec.get("timeout_s", 300.0)))
