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
# # Policy classes
#
# The same Tsallis transform driving a unimodal Gaussian, a Gaussian mixture
# and a set of Stein particles on the planar task.

# %%
import matplotlib.pyplot as plt
import numpy as np

from tsallis_mpc import GaussianPolicy, GmmPolicy, MpcConfig, NoiseConfig, SteinPolicy, run_mpc_trial
from tsallis_mpc.systems import PlanarNavigation
from tsallis_mpc.transforms import EliteFraction, Tsallis

# %%
model = PlanarNavigation(field_seed=0)
T = 48
policies = {
    "gaussian": GaussianPolicy.isotropic(T, 2, 18.0),
    "gmm": GmmPolicy.isotropic(4, T, 2, 18.0, spread=10.0, rng=0),
    "stein": SteinPolicy.from_mean(8, T, 2, 12.0, spread=10.0, rng=0),
}
records = {}
for name, pol in policies.items():
    cfg = MpcConfig(horizon=T, n_steps=150, iters=1, warmup_iters=8, n_samples=256, n_state_samples=1,
                    noise=NoiseConfig(model.sigma_eps), transform=Tsallis(1.8, EliteFraction(0.1)), policy=pol)
    records[name] = run_mpc_trial(cfg, model)
    print(f"{name:8s} cost {records[name].total_cost:10.1f} crashed {records[name].crashed}")

# %%
fig, ax = plt.subplots(figsize=(6, 6))
for cx, cy, half in model.obstacles:
    ax.add_patch(plt.Rectangle((cx - half, cy - half), 2 * half, 2 * half, color="0.7"))
for name, rec in records.items():
    ax.plot(rec.states[:, 0], rec.states[:, 1], label=name)
ax.plot(*model.goal[:2], "k*", markersize=12)
ax.set_aspect("equal")
ax.legend()

# %% [markdown]
# Sampled plans from the initial mixture: each sequence comes from a single
# component, so the modes stay separate across the horizon.

# %%
gmm = policies["gmm"]
batch = gmm.sample(64, np.random.default_rng(1))
X = model.simulate(np.tile(model.x0, (64, 1)), batch.controls)
fig, ax = plt.subplots(figsize=(5, 5))
for k in range(64):
    ax.plot(X[k, :, 0], X[k, :, 1], color=f"C{batch.groups[k]}", alpha=0.5)
ax.set_aspect("equal")
