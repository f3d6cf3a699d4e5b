# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Cover entropy, products and invariance
#
# A cover is pulled back along `alpha_n` on `X_{-n}`. Members that reach
# outside `X_{-n}` are kept as they are so the family still covers. `N(U, n)`
# is the smallest subcover of the join over times `0..n-1`.

# %%
import math

from partial_entropy import gallery
from partial_entropy.cover_entropy import FiniteCover
from partial_entropy.entropy import SweepConfig, hbar
from partial_entropy.cover_entropy import (
    N_of, ball_cover, cover_count_bounds, h_cover, join, pull_back)

cy = gallery.cycle_y()
U = FiniteCover.of([[0], [1]])
pb = pull_back(cy, U, 1)
print("main", pb.main.sets, "complement", pb.complement.sets)
print("N(U, 2) =", N_of(cy, U, 2))
print(join([FiniteCover.of([{0, 1}, {2, 3}]), FiniteCover.of([{0, 2}, {1, 3}])]).sets)

# %% [markdown]
# On the shift the ball partition at radius `1/4` refines itself like
# itineraries, and its growth rate matches the separated-set slope.

# %%
shift = gallery.cyclic_shift_model(2, 8)
cfg = SweepConfig(eps_grid=(0.25,), n_min=1, n_max=4)
fit = h_cover(shift, ball_cover(shift, 0.25), cfg)
print("cover counts", fit.counts, "slope", round(fit.slope, 4))
print("sep slope", round(hbar(shift, None, cfg).hbar, 4))
for n in (1, 2, 3):
    rep = cover_count_bounds(shift, ball_cover(shift, 0.25), n, eps=0.2)
    print(n, "sep", rep.sep_eps, "<= N", rep.N, "<= span", rep.span_delta)

# %% [markdown]
# ## Products and disjoint unions

# %%
from partial_entropy.core import disjoint_union
from partial_entropy.entropy import decomposition_experiment, product_experiment

a = gallery.cyclic_shift_model(2, 6)
rep = product_experiment(a, a, SweepConfig(eps_grid=(0.5,), n_min=1, n_max=4))
print(f"h(a)={rep.hbar_a:.4f} h(a x a)={rep.hbar_ab:.4f} gap={rep.gap:.4f}")

u = disjoint_union([gallery.cyclic_shift_model(2, 6), gallery.cyclic_shift_model(3, 5)],
                   ["two", "three"])
pieces = [[p for p in u.points if p[0] == t] for t in ("two", "three")]
dec = decomposition_experiment(u, pieces, SweepConfig(eps_grid=(1.0, 0.5, 0.25), n_min=1,
                                                      n_max=4))
print("pieces", [round(h, 4) for h in dec.hbar_pieces], "whole", round(dec.hbar_full, 4))

# %% [markdown]
# For partial factors the product of separated sets need not stay separated:
# a pair of points may lose the times where they differed. The product of
# spanning sets always spans.

# %%
import numpy as np

x = gallery.random_restriction(np.random.default_rng(0), max_points=5, window=2)
y = gallery.random_restriction(np.random.default_rng(4), max_points=5, window=2)
rep = product_experiment(x, y, SweepConfig(eps_grid=(2.0, 1.0, 0.5), n_min=1, n_max=3))
for row in rep.count_checks:
    n, eps, sa, sb, sab, pa, pb, pab = row[:8]
    if not row[10]:
        print(f"n={n} eps={eps}: sep {sa}*{sb} > {sab}, span {pab} <= {pa}*{pb}")

# %% [markdown]
# ## Changing the metric
#
# Uniformly equivalent metrics give the same entropy.

# %%
from partial_entropy.entropy import metric_invariance_experiment

mi = metric_invariance_experiment(gallery.cyclic_shift_model(2, 10),
                                  SweepConfig(n_min=2, n_max=6))
print({k: round(v, 4) for k, v in mi.estimates.items()}, "spread", mi.spread)
