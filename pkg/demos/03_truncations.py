"""Truncation operators and what they cost in revenue.

Run: python3 demos/03_truncations.py
"""
import numpy as np

from demyerson import ProductDist, ShadeParams, opt, surrogate, t_max_quantile, t_max_value, t_min
from demyerson.dist import DiscreteDist, dominates, uniform_discrete
from demyerson.xform import apply_all, cap_vector

u = uniform_discrete([1, 2])
print("t_min(uniform{1,2}, 0.3)        ->", np.round(t_min(u, 0.3).points(), 12).tolist())
print("t_max_value(uniform{1,2}, 1.5)  ->", t_max_value(u, 1.5).points())
print("t_max_quantile({1,2,8}, 0.2)    ->", t_max_quantile(DiscreteDist([1, 2, 8], [.6, .3, .1]), 0.2).points())

# Dropping the bottom eps of every bidder's quantiles keeps at least
# (1 - eps) of the optimal revenue.
rng = np.random.default_rng(0)
D = ProductDist([DiscreteDist(np.sort(rng.choice(np.arange(1, 30), 6, replace=False)) / 30,
                              rng.dirichlet(np.ones(6))) for _ in range(3)])
print(f"\nOpt(D) = {opt(D):.5f}")
for eps in (0.05, 0.2, 0.5):
    print(f"  eps={eps:<4}: Opt(t_min) = {opt(apply_all(D, t_min, eps)):.5f}  >= {(1 - eps) * opt(D):.5f}")

# Values in [0, 1]: capping at the eps^2/n tail point loses at most eps^2.
for eps in (0.1, 0.3):
    caps = cap_vector(D, eps, "bounded_01")
    capped = ProductDist([t_max_value(c, v) for c, v in zip(D, caps)])
    print(f"  caps for eps={eps}: {np.round(caps, 3)}, loss {opt(D) - opt(capped):.5f} <= {eps**2}")

# The surrogate pair used in the analysis, and its dominance chain.
Dp, Dtp = surrogate(D, caps, 0.1, ShadeParams(2000, D.n, 0.1))
print("\nD dominates D':", all(dominates(a, b) for a, b in zip(D, Dp)))
print("D' dominates its doubly shaded copy:", all(dominates(a, b) for a, b in zip(Dp, Dtp)))
