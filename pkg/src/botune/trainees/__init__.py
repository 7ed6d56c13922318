from .base import (
    Capabilities,
    OBJECTIVE_NEG_VAL_ACC,
    OBJECTIVE_VAL_LOSS,
    PROTOCOL_VERSION,
    TrainRequest,
    objective_from,
    role_value,
    role_values,
    roles_from_space,
)
from .data import Dataset, dataset_from_idx, make_blobs, parse_idx
from .mlp import MlpTrainee, mlp_train
from .protocol import ExternalTrainee, run_external_trainee
from .synthetic import DEFAULT_SYNTHETIC, SyntheticConfig, SyntheticTrainee, synthetic_curves

__all__ = [
    "Capabilities",
    "Dataset",
    "DEFAULT_SYNTHETIC",
    "ExternalTrainee",
    "MlpTrainee",
    "OBJECTIVE_NEG_VAL_ACC",
    "OBJECTIVE_VAL_LOSS",
    "PROTOCOL_VERSION",
    "SyntheticConfig",
    "SyntheticTrainee",
    "TrainRequest",
    "dataset_from_idx",
    "make_blobs",
    "mlp_train",
    "objective_from",
    "parse_idx",
    "role_value",
    "role_values",
    "roles_from_space",
    "run_external_trainee",
    "synthetic_curves",
]
