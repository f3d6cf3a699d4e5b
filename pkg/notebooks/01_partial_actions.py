# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Partial actions of Z on finite sets
#
# A partial action stores, for each time `n` in a window `[-N, N]`, a domain
# `X_n` and a bijection `alpha_n : X_{-n} -> X_n`. The easiest way to get one
# is to take a permutation of a finite set and only look at a subset `Y`:
# `alpha_n` is then `f^n` wherever both ends stay in `Y`.

# %%
from partial_entropy import check_axioms, gallery
from partial_entropy.core import global_system, product, restrict_global

cycle = restrict_global(range(4), "discrete", lambda i: (i + 1) % 4, [0, 1], window=3)
for n in range(-3, 4):
    print(f"X_{n:+d} = {sorted(cycle.X(n))}")

# %% [markdown]
# Only `0 -> 1` survives at time one. Two steps lead out of `Y` and never come
# back inside the first three steps, so `X_2` is empty; `X_3` holds `0`
# because `f^3(1) = 0`.

# %%
report = check_axioms(cycle)
print(report.summary())

# %% [markdown]
# ## Breaking the axioms on purpose
#
# Rewire the global 4-cycle so that `alpha_1(1) = 1`. The checker names the
# failing composition instance `(n, m, x)`.

# %%
import numpy as np
from partial_entropy.core import FinitePartialSystem

four = global_system(range(4), "discrete", lambda i: (i + 1) % 4, 3)
maps = four.maps.copy()
maps[1 + four.window, 1] = 1
broken = FinitePartialSystem(four.points, four.metric, four.window, four.domain, maps)
bad = check_axioms(broken)
print(bad.summary())
print("(1, 1, 0) among composition witnesses:", (1, 1, 0) in bad.by_axiom("iii"))

# %% [markdown]
# ## Products
#
# Domains of a product are products of domains.

# %%
sq = product(cycle, cycle)
print("X_1 of the square:", sq.X(1))
print("axioms:", check_axioms(sq).passed)

# %% [markdown]
# ## Globalization
#
# Pairs `(r, x)` with `r` in `[-R, R]` are glued whenever `x` can be moved by
# `r - s` steps to `y`. For the restricted cycle with `R = 1` the classes are
# not yet closed under the shift; with `R = 3` they close up into the
# original 4-cycle.

# %%
from partial_entropy.globalization import globalize

for R in (1, 3):
    res = globalize(cycle, R)
    print(f"R={R}: {res.n_classes} classes, closed={res.closed}")
    for c in res.classes:
        print("   ", c)

# %%
for name in ("cycle_y", "swap_fixed", "no_return", "cylinder"):
    res = globalize(gallery.make(name) if name != "cylinder" else gallery.cylinder_restriction(L=8))
    print(f"{name:12s} classes={res.n_classes:4d} closed={res.closed!s:5s} "
          f"window_exact={res.window_exact}")
