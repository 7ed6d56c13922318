"""Expected-improvement acquisition and next-point proposal.

The objective is minimized internally, so improvement means landing below the
incumbent best. Proposal maximizes EI over a scrambled low-discrepancy sweep
of the unit cube plus Gaussian perturbations of the sweep's best point; all
points are snapped to realizable assignments before scoring so the argmax is
always something the trainee can actually run.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import qmc

from .errors import DimensionMismatch, InvalidInput
from .space import Assignment, SearchSpace, decode, snap_to_grid
from .surrogate import GpModel, best_observed, posterior_batch

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_REFINE_STEP = 0.05


@dataclass(frozen=True)
class AcquisitionConfig:
    candidate_count: int = 1024
    refine_steps: int = 32
    xi: float = 0.0  # exploration jitter; 0 keeps the plain EI integrand

    def __post_init__(self):
        if self.candidate_count < 1:
            raise InvalidInput("candidate_count must be >= 1")
        if self.refine_steps < 0:
            raise InvalidInput("refine_steps must be >= 0")
        if self.xi < 0:
            raise InvalidInput("xi must be >= 0")


def expected_improvement(mean: float, std: float, best_y: float, xi: float = 0.0) -> float:
    """Closed-form EI of a Gaussian belief over the objective at one point.

    With Δ = best_y − mean − xi and z = Δ/std this is Δ·Φ(z) + std·φ(z);
    at std = 0 it degenerates to max(Δ, 0).
    """
    if std < 0:
        raise InvalidInput(f"negative std {std}")
    delta = best_y - mean - xi
    if std == 0.0:
        return max(delta, 0.0)
    z = delta / std
    phi = math.exp(-0.5 * z * z) / _SQRT_2PI
    return max(0.0, delta * float(ndtr(z)) + std * phi)


def _ei_batch(means: np.ndarray, stds: np.ndarray, best_y: float, xi: float) -> np.ndarray:
    delta = best_y - means - xi
    out = np.maximum(delta, 0.0)
    pos = stds > 0
    z = delta[pos] / stds[pos]
    phi = np.exp(-0.5 * z * z) / _SQRT_2PI
    out[pos] = np.maximum(0.0, delta[pos] * ndtr(z) + stds[pos] * phi)
    return out


def propose_next(
    model: GpModel,
    space: SearchSpace,
    rng: np.random.Generator,
    cfg: AcquisitionConfig | None = None,
) -> Assignment:
    """Assignment maximizing EI over the candidate sweep.

    Deterministic given the rng state; ties go to the lower posterior mean,
    then to the earlier candidate.
    """
    cfg = cfg or AcquisitionConfig()
    d = len(space)
    if d == 0:
        raise DimensionMismatch("empty search space")
    if model.dim != d:
        raise DimensionMismatch(f"model dim {model.dim} vs space dim {d}")

    sobol = qmc.Sobol(d, scramble=True, seed=int(rng.integers(2**63)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # non-power-of-two draw counts
        candidates = sobol.random(cfg.candidate_count)
    candidates = snap_to_grid(space, candidates)

    best_y = best_observed(model)
    means, variances = posterior_batch(model, candidates)
    stds = np.sqrt(variances)
    ei = _ei_batch(means, stds, best_y, cfg.xi)

    incumbent = candidates[_argmax_with_ties(ei, means)]
    if cfg.refine_steps > 0:
        perturbed = incumbent[None, :] + rng.normal(0.0, _REFINE_STEP, (cfg.refine_steps, d))
        perturbed = snap_to_grid(space, np.clip(perturbed, 0.0, 1.0))
        p_means, p_vars = posterior_batch(model, perturbed)
        p_ei = _ei_batch(p_means, np.sqrt(p_vars), best_y, cfg.xi)
        candidates = np.vstack([candidates, perturbed])
        ei = np.concatenate([ei, p_ei])
        means = np.concatenate([means, p_means])

    return decode(space, candidates[_argmax_with_ties(ei, means)])


def _argmax_with_ties(ei: np.ndarray, means: np.ndarray) -> int:
    best = np.max(ei)
    tied = np.flatnonzero(ei == best)
    if len(tied) == 1:
        return int(tied[0])
    return int(tied[np.argmin(means[tied])])
