"""
Gaussian-process regression on a one-dimensional toy objective
===============================================================

Fits the SE-ARD surrogate to a handful of observations, then plots the
posterior mean, the 95% band, and the expected-improvement profile that
drives the next proposal.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from botune import expected_improvement, fit
from botune.surrogate import best_observed, posterior_batch


def objective(x):
    return np.sin(5 * x) * (1 - np.tanh(x**2)) + 0.4 * x


rng = np.random.default_rng(4)
x_obs = rng.random(6)
y_obs = objective(x_obs)

model = fit(x_obs[:, None], y_obs)
print("fitted kernel:", model.params)

grid = np.linspace(0, 1, 400)[:, None]
mean, var = posterior_batch(model, grid)
std = np.sqrt(var)
best = best_observed(model)
ei = [expected_improvement(m, s, best) for m, s in zip(mean, std)]

fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 5), sharex=True,
                                  height_ratios=[2, 1])
top.plot(grid, objective(grid), "k--", label="true objective")
top.plot(grid, mean, label="posterior mean")
top.fill_between(grid[:, 0], mean - 1.96 * std, mean + 1.96 * std, alpha=0.2)
top.plot(x_obs, y_obs, "ko", label="observations")
top.legend(loc="upper left")
bottom.plot(grid, ei, color="tab:green")
bottom.set_ylabel("expected improvement")
bottom.set_xlabel("x")
fig.tight_layout()
fig.savefig("demos_gp_posterior.png", dpi=110)
print("wrote demos_gp_posterior.png; EI peaks at x =", grid[int(np.argmax(ei))][0])
