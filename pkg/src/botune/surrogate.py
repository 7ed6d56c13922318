"""Gaussian-process regression over unit-cube points.

Squared-exponential kernel with per-dimension length scales; constant zero
mean on standardized targets. Kernel hyper-parameters are chosen by
maximizing the log marginal likelihood with a derivative-free multi-start
coordinate search, so fitting is deterministic and needs no external solver.

All linear algebra goes through one lower-triangular Cholesky factor of
(K + noise·I + jitter·I); the jitter escalates through a fixed ladder before
the fit is declared a numerical failure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.stats import qmc

from .errors import DimensionMismatch, InsufficientData, NumericalFailure

_LOG_2PI = math.log(2.0 * math.pi)
_JITTER_LADDER = tuple(1e-10 * 10.0**k for k in range(7))
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

_STD_FLOOR = 1e-12  # survives constant-objective runs


@dataclass(frozen=True)
class KernelParams:
    """ARD squared-exponential parameters; all scales strictly positive."""

    length_scales: tuple[float, ...]
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        object.__setattr__(self, "length_scales", tuple(float(l) for l in self.length_scales))
        if any(l <= 0 for l in self.length_scales):
            raise ValueError(f"length scales must be positive: {self.length_scales}")
        if self.signal_variance <= 0:
            raise ValueError(f"signal variance must be positive: {self.signal_variance}")
        if self.noise_variance < 0:
            raise ValueError(f"noise variance must be non-negative: {self.noise_variance}")


@dataclass(frozen=True)
class FitConfig:
    """Search box and budget for the marginal-likelihood maximization."""

    n_starts: int = 8
    max_line_searches: int = 50
    golden_steps: int = 18
    sweep_tol: float = 1e-6
    length_scale_bounds: tuple[float, float] = (0.01, 10.0)
    signal_variance_bounds: tuple[float, float] = (0.1, 10.0)
    noise_variance_bounds: tuple[float, float] = (1e-8, 1e-1)


@dataclass(frozen=True)
class GpModel:
    inputs: np.ndarray          # (n, d) in [0, 1]^d
    targets: np.ndarray         # (n,) standardized
    params: KernelParams
    chol: np.ndarray            # lower-triangular factor of K + (noise+jitter)·I
    alpha: np.ndarray           # solve(K + (noise+jitter)·I, targets)
    target_mean: float
    target_std: float
    jitter: float

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]


def kernel(x1, x2, params: KernelParams) -> float:
    """SE-ARD covariance: sv · exp(−½ Σ ((x1_j − x2_j)/ℓ_j)²)."""
    a = np.asarray(x1, dtype=float)
    b = np.asarray(x2, dtype=float)
    ell = np.asarray(params.length_scales)
    if a.shape != ell.shape or b.shape != ell.shape:
        raise DimensionMismatch(
            f"points of shape {a.shape}/{b.shape} vs {len(ell)} length scales"
        )
    r2 = np.sum(((a - b) / ell) ** 2)
    return float(params.signal_variance * math.exp(-0.5 * r2))


def _kernel_matrix(xa: np.ndarray, xb: np.ndarray, params: KernelParams) -> np.ndarray:
    ell = np.asarray(params.length_scales)
    diff = xa[:, None, :] / ell - xb[None, :, :] / ell
    return params.signal_variance * np.exp(-0.5 * np.sum(diff**2, axis=-1))


def _factorize(k_matrix: np.ndarray, noise_variance: float) -> tuple[np.ndarray, float]:
    n = k_matrix.shape[0]
    for jitter in _JITTER_LADDER:
        try:
            lower = cholesky(k_matrix + (noise_variance + jitter) * np.eye(n), lower=True)
            return lower, jitter
        except np.linalg.LinAlgError:
            continue
        except Exception:
            continue
    raise NumericalFailure(
        f"Cholesky failed for n={n} even at jitter {_JITTER_LADDER[-1]:g}"
    )


def _lml_from_factor(lower: np.ndarray, y: np.ndarray) -> float:
    alpha = solve_triangular(
        lower.T, solve_triangular(lower, y, lower=True), lower=False
    )
    n = len(y)
    return float(-0.5 * y @ alpha - np.sum(np.log(np.diag(lower))) - 0.5 * n * _LOG_2PI)


def log_marginal_likelihood(inputs, targets, params: KernelParams) -> float:
    """LML of standardized targets under the given kernel, via the Cholesky path."""
    x = np.asarray(inputs, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim != 2 or x.shape[1] != len(params.length_scales):
        raise DimensionMismatch(f"inputs shape {x.shape} vs {len(params.length_scales)} scales")
    if len(y) < 1:
        raise InsufficientData("need at least one observation")
    lower, _ = _factorize(_kernel_matrix(x, x, params), params.noise_variance)
    return _lml_from_factor(lower, y)


def _golden_section(f, lo: float, hi: float, steps: int) -> tuple[float, float]:
    # maximize f on [lo, hi]; returns (argmax, max)
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(steps):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _optimize_params(x: np.ndarray, y: np.ndarray, cfg: FitConfig) -> KernelParams:
    d = x.shape[1]
    n_coords = d + 2
    log_bounds = (
        [tuple(math.log10(b) for b in cfg.length_scale_bounds)] * d
        + [tuple(math.log10(b) for b in cfg.signal_variance_bounds)]
        + [tuple(math.log10(b) for b in cfg.noise_variance_bounds)]
    )

    def params_of(theta: np.ndarray) -> KernelParams:
        return KernelParams(
            tuple(10.0 ** theta[:d]), 10.0 ** theta[d], 10.0 ** theta[d + 1]
        )

    def objective(theta: np.ndarray) -> float:
        try:
            p = params_of(theta)
            lower, _ = _factorize(_kernel_matrix(x, x, p), p.noise_variance)
            return _lml_from_factor(lower, y)
        except NumericalFailure:
            return -np.inf

    # fixed unscrambled Sobol starts keep the fit a pure function of its inputs
    starts = qmc.Sobol(n_coords, scramble=False).random(cfg.n_starts)
    best_theta, best_val = None, -np.inf
    for start in starts:
        theta = np.array(
            [lo + u * (hi - lo) for u, (lo, hi) in zip(start, log_bounds)]
        )
        current = objective(theta)
        searches = 0
        while searches < cfg.max_line_searches:
            sweep_start = current
            for j in range(n_coords):
                if searches >= cfg.max_line_searches:
                    break
                lo, hi = log_bounds[j]

                def line(v, j=j):
                    t = theta.copy()
                    t[j] = v
                    return objective(t)

                arg, val = _golden_section(line, lo, hi, cfg.golden_steps)
                if val > current:
                    theta[j] = arg
                    current = val
                searches += 1
            if current - sweep_start < cfg.sweep_tol:
                break
        if current > best_val:
            best_val, best_theta = current, theta.copy()
    if best_theta is None:
        raise NumericalFailure("marginal likelihood not finite anywhere in the search box")
    return params_of(best_theta)


_DEFAULT_PARAMS_1PT = (0.5, 1.0, 1e-6)  # (ℓ per dim, sv, noise) when nothing to fit


def fit(inputs, raw_targets, fit_config: FitConfig | None = None) -> GpModel:
    """Standardize targets, pick kernel params by LML, factorize once.

    A single observation skips the optimization and uses fixed defaults.
    """
    cfg = fit_config or FitConfig()
    x = np.asarray(inputs, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y_raw = np.asarray(raw_targets, dtype=float)
    if len(y_raw) < 1 or x.shape[0] < 1:
        raise InsufficientData("need at least one observation")
    if x.shape[0] != len(y_raw):
        raise DimensionMismatch(f"{x.shape[0]} inputs vs {len(y_raw)} targets")

    mean = float(np.mean(y_raw))
    std = max(float(np.std(y_raw)), _STD_FLOOR)
    y = (y_raw - mean) / std

    if len(y) == 1:
        ell, sv, noise = _DEFAULT_PARAMS_1PT
        params = KernelParams((ell,) * x.shape[1], sv, noise)
    else:
        params = _optimize_params(x, y, cfg)

    lower, jitter = _factorize(_kernel_matrix(x, x, params), params.noise_variance)
    alpha = solve_triangular(lower.T, solve_triangular(lower, y, lower=True), lower=False)
    x = x.copy()
    y = y.copy()
    x.setflags(write=False)
    y.setflags(write=False)
    return GpModel(x, y, params, lower, alpha, mean, std, jitter)


def fit_with_params(inputs, raw_targets, params: KernelParams) -> GpModel:
    """Build a model at fixed kernel parameters (standardize + factorize only)."""
    x = np.asarray(inputs, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y_raw = np.asarray(raw_targets, dtype=float)
    if len(y_raw) < 1:
        raise InsufficientData("need at least one observation")
    mean = float(np.mean(y_raw))
    std = max(float(np.std(y_raw)), _STD_FLOOR)
    y = (y_raw - mean) / std
    lower, jitter = _factorize(_kernel_matrix(x, x, params), params.noise_variance)
    alpha = solve_triangular(lower.T, solve_triangular(lower, y, lower=True), lower=False)
    x = x.copy()
    x.setflags(write=False)
    y.setflags(write=False)
    return GpModel(x, y, params, lower, alpha, mean, std, jitter)


def posterior(model: GpModel, x) -> tuple[float, float]:
    """Predictive mean and variance at one point, in raw objective units."""
    mean, var = posterior_batch(model, np.asarray(x, dtype=float)[None, :])
    return float(mean[0]), float(var[0])


def posterior_batch(model: GpModel, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized predictive mean/variance over an (m, d) batch."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != model.dim:
        raise DimensionMismatch(f"query shape {pts.shape} vs model dim {model.dim}")
    k_star = _kernel_matrix(model.inputs, pts, model.params)  # (n, m)
    mean_std = k_star.T @ model.alpha
    v = solve_triangular(model.chol, k_star, lower=True)
    var_std = model.params.signal_variance - np.sum(v**2, axis=0)
    var_std = np.maximum(var_std, 0.0)
    return model.target_mean + model.target_std * mean_std, model.target_std**2 * var_std


def best_observed(model: GpModel) -> float:
    """Smallest raw target the model was fitted on (the incumbent for EI)."""
    return model.target_mean + model.target_std * float(np.min(model.targets))
