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
# # Quadcopter through a pole forest
#
# Rate-controlled quadrotor with a short horizon. Sampling starts around the
# hover thrust.

# %%
import matplotlib.pyplot as plt
import numpy as np

from tsallis_mpc import GaussianPolicy, MpcConfig, NoiseConfig, run_mpc_trial
from tsallis_mpc.systems import Quadcopter
from tsallis_mpc.transforms import EliteFraction, Tsallis

# %%
model = Quadcopter(field_seed=0)
T = 64
pol = GaussianPolicy.isotropic(T, 4, 3.0, mean=model.nominal_control)
cfg = MpcConfig(horizon=T, n_steps=200, iters=1, warmup_iters=16, n_samples=256, n_state_samples=1,
                noise=NoiseConfig(1.0), transform=Tsallis(1.8, EliteFraction(0.07)), policy=pol)
rec = run_mpc_trial(cfg, model)
print(f"cost {rec.total_cost:.1f}, crashed {rec.crashed}, final distance {model.goal_distance(rec.states[-1]):.2f}")

# %%
fig, (ax, bx) = plt.subplots(1, 2, figsize=(10, 4))
ax.scatter(model.obstacles[:, 0], model.obstacles[:, 1], s=30, color="0.6")
ax.plot(rec.states[:, 0], rec.states[:, 1])
ax.plot(*model.target[:2], "k*", markersize=12)
ax.set_aspect("equal")
bx.plot(rec.states[:, 2])
bx.set_xlabel("step")
bx.set_ylabel("altitude")
