# ---
# jupyter:
#   jupytext:
#     cell_metadata_filter: -all
#     comment_magics: true
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#       jupytext_version: 1.11.2
#   kernelspec:
#     display_name: fresco
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Clustering a planted instance
#
# Two groups of noisy series around known centers, clustered with both
# objectives.

# %%
from fresco.center import constant_factor_center, refine_center
from fresco.fixtures import planted_instance
from fresco.frechet import distance
from fresco.median import SampleConfig, cost_1, k_median
from fresco.signatures import build_vertex_permutation, simplify

# %%
inputs, centers, radius = planted_instance(
    k=2, ell=3, n=20, m=8, radius=0.5, separation=5.0, seed=7
)
centers

# %% [markdown]
# ## Signatures
#
# Each level of the vertex permutation is the signature for a range of scales.

# %%
perm = build_vertex_permutation(inputs[0])
list(zip(perm.thresholds, perm.sizes))

# %%
simplified = simplify(inputs[0], 3)
simplified, distance(inputs[0], simplified)

# %% [markdown]
# ## (k, l)-center

# %%
constant, (lo, hi) = constant_factor_center(inputs, 2, 3)
constant.cost, (lo, hi)

# %%
refined = refine_center(inputs, 2, 3, epsilon=0.25)
refined.cost, radius

# %% [markdown]
# ## (k, l)-median

# %%
median = k_median(inputs, 2, 3, SampleConfig(epsilon=0.5, seed=7))
median.cost, cost_1(inputs, centers)[0]
