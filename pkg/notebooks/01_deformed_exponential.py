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
# # Deformed exponential and cost transforms
#
# How the Tsallis weight moves between the exponential (MPPI) and the
# hard threshold (CEM) as the deformation parameter `r` changes, and what
# that does to risk aversion.

# %%
import matplotlib.pyplot as plt
import numpy as np

from tsallis_mpc.transforms import (Cem, EliteThreshold, Mppi, Tsallis, ara_coefficient, exp_r, likelihood)

# %%
x = np.linspace(-3, 1, 400)
fig, ax = plt.subplots(figsize=(6, 4))
for r in (0.5, 1.0, 1.5, 2.0, 4.0):
    ax.plot(x, exp_r(x, r), label=f"r = {r}")
ax.set_ylim(0, 4)
ax.set_xlabel("x")
ax.set_ylabel("exp_r(x)")
ax.legend()

# %% [markdown]
# Weights over normalized cost with threshold `gamma = 0.5`. Large `r` flattens
# toward the indicator, `r` near one sharpens toward an exponential.

# %%
J = np.linspace(0, 1, 500)
gamma = 0.5
fig, ax = plt.subplots(figsize=(6, 4))
for r in (1.05, 1.5, 2.0, 5.0, 1e3):
    ax.plot(J, likelihood(Tsallis(r, EliteThreshold(gamma)), J, gamma), label=f"tsallis r={r:g}")
ax.plot(J, likelihood(Cem(EliteThreshold(gamma)), J, gamma), "k--", label="cem")
ax.plot(J, likelihood(Mppi(10.0), J), "k:", label="mppi, 1/lambda = 10")
ax.set_xlabel("normalized cost J")
ax.set_ylabel("likelihood")
ax.legend(fontsize=8)

# %% [markdown]
# Absolute risk aversion of the shape function. It is negative
# (risk averse in cost) for `r > 2` and positive below.

# %%
J = np.linspace(0, 0.45, 100)
for r in (1.5, 2.0, 3.0, 6.0):
    t = Tsallis(r, EliteThreshold(gamma))
    a = [ara_coefficient(t, j, gamma) for j in J]
    print(f"r={r}: ARA at J=0 {a[0] + 0.0:+.3f}, at J=0.45 {a[-1] + 0.0:+.3f}")
