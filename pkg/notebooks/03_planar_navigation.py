# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#       jupytext_version: 1.16.0
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Planar navigation
#
# Point mass with double-integrator dynamics steering around square
# obstacles to the goal. One closed-loop episode per method.

# %%
import matplotlib.pyplot as plt
import numpy as np

from tsallis_mpc import GaussianPolicy, MpcConfig, NoiseConfig, run_mpc_trial
from tsallis_mpc.systems import PlanarNavigation
from tsallis_mpc.transforms import Cem, EliteFraction, Mppi, Tsallis

# %%
model = PlanarNavigation(field_seed=0)


def config(transform, std, seed=0):
    return MpcConfig(horizon=96, n_steps=model.episode_length, iters=1, warmup_iters=8, n_samples=256,
                     n_state_samples=1, noise=NoiseConfig(model.sigma_eps), transform=transform,
                     policy=GaussianPolicy.isotropic(96, 2, std), trial_seed=seed)


methods = {
    "tsallis": (Tsallis(1.796, EliteFraction(0.07)), 18.667),
    "cem": (Cem(EliteFraction(0.098)), 7.78),
    "mppi": (Mppi(0.015), 18.0),
}
records = {name: run_mpc_trial(config(t, s), model) for name, (t, s) in methods.items()}
for name, rec in records.items():
    print(f"{name:8s} cost {rec.total_cost:10.1f} crashed {rec.crashed} reached at step {rec.steps_to_goal}")

# %%
fig, ax = plt.subplots(figsize=(6, 6))
for cx, cy, half in model.obstacles:
    ax.add_patch(plt.Rectangle((cx - half, cy - half), 2 * half, 2 * half, color="0.7"))
for name, rec in records.items():
    ax.plot(rec.states[:, 0], rec.states[:, 1], label=name)
ax.plot(*model.x0[:2], "ko")
ax.plot(*model.goal[:2], "k*", markersize=12)
ax.set_aspect("equal")
ax.legend()

# %% [markdown]
# Effective sample size per MPC step shows how concentrated each method's
# weights are.

# %%
fig, ax = plt.subplots(figsize=(6, 3))
for name, rec in records.items():
    ax.plot([d.effective_sample_size for d in rec.diagnostics], label=name)
ax.set_yscale("log")
ax.set_xlabel("MPC step")
ax.set_ylabel("ESS")
ax.legend()
