# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Separated, spanning and cover counts
#
# Orbits of different points may be defined at different times. The index
# signature `I_n(x)` lists the times `i < n` at which `alpha_i(x)` exists, and
# `d_n(x, y)` takes the largest distance over the times shared by both orbits.

# %%
from partial_entropy import gallery
from partial_entropy.orbit import d_n, index_signature

cy = gallery.cycle_y()
print("I_2(0) =", sorted(index_signature(cy, 0, 2).members))
print("I_2(1) =", sorted(index_signature(cy, 1, 2).members))
print("d_2(0, 1) =", d_n(cy, 0, 1, 2))

# %% [markdown]
# All counts are computed on the graph joining points at `d_n`-distance below
# `eps`: separated sets are independent sets, covers are clique covers and
# spanning sets are dominating sets. Spanning sets must also match index
# signatures, so only same-signature edges count for them.

# %%
from partial_entropy import count_report

r = count_report(cy, None, 2, 0.5)
print((r.cov2_exact, r.span_exact, r.sep_exact, r.cov_exact), r.exact_flags)

# %% [markdown]
# ## When the spanning count overtakes the separated count
#
# With a large radius every pair is close, so one point is a maximal
# separated set. Points with different signatures still need their own
# spanning point, so `span` can exceed `sep` for genuinely partial actions.
# The weak notion (no signature condition) never does.

# %%
r = count_report(cy, None, 2, 2.0)
print("sep", r.sep_exact, "span", r.span_exact, "weak span", r.span_weak_exact)
print({k: v for k, v in r.chain.items()})

# %%
import collections
import numpy as np
from partial_entropy.counting import Counter

tally = collections.Counter()
for seed in range(40):
    rng = np.random.default_rng(seed)
    s = gallery.random_restriction(rng, max_points=10)
    c = Counter(s)
    for n in range(1, s.window + 2):
        for eps in (0.5, 1.0, 2.0):
            for link, holds in c.report(n, eps).chain.items():
                tally[link, holds] += 1
for (link, holds), k in sorted(tally.items()):
    print(f"{link:16s} holds={holds!s:5s} {k}")

# %% [markdown]
# ## Entropy of the full shift
#
# The cyclic-shift model keeps every word of length `L` with the left shift.
# At scale `eps = 1/4` the separated count doubles at every step, so the
# slope of `log sep` against `n` is `log 2`.

# %%
import math
from partial_entropy.entropy import SweepConfig, h_eps, hbar

shift = gallery.cyclic_shift_model(2, 10)
slope, fit = h_eps(shift, None, 0.25, SweepConfig(n_min=2, n_max=6))
print(fit.counts, f"slope={slope:.4f}", f"log 2={math.log(2):.4f}")

# %%
est = hbar(gallery.cyclic_shift_model(3, 7), None,
           SweepConfig(eps_grid=(0.5, 0.25), n_min=1, n_max=4))
for f in est.per_eps:
    print(f.eps, f.counts, round(f.slope, 4))
print("estimate", round(est.hbar, 4), "log 3", round(math.log(3), 4))

# %% [markdown]
# A translation that never comes back has bounded counts and zero entropy.

# %%
nr = gallery.no_return_system()
print(hbar(nr, None, SweepConfig(eps_grid=(4, 2, 1, 0.5), n_min=1, n_max=5)).hbar)
