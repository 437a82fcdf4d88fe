"""Learning an auction from samples with the dominated empirical distribution.

The learner shades every empirical quantile downwards so that, with high
probability, the learned law is dominated by the true one.  Myerson's auction
for that pessimistic law then earns at least its own promised revenue.

Run: python3 demos/02_learning_from_samples.py
"""
import numpy as np

from demyerson import ProductDist, dominated_empirical_myerson, opt, rev_exact, rev_mc
from demyerson.dist import DiscreteDist, dominates
from demyerson.learn import dominated_empirical, empirical

vals = np.arange(1, 9) / 8
D = ProductDist([DiscreteDist(vals, np.full(8, 1 / 8)),
                 DiscreteDist(vals, np.linspace(2, 1, 8) / np.linspace(2, 1, 8).sum())])
best = opt(D)
print(f"Opt(D) = {best:.5f}\n")

print(f"{'m':>7} {'E dominated?':>13} {'Rev(learned)':>13} {'gap':>9}")
for m in (100, 1000, 10000, 100000):
    S = D.sample(seed=1, count=m)
    E_tilde = dominated_empirical(S, delta=0.05)
    ok = all(dominates(t, e) for t, e in zip(D, E_tilde))
    M = dominated_empirical_myerson(S, delta=0.05)
    r = rev_exact(M, D)
    print(f"{m:>7} {str(ok):>13} {r:>13.5f} {best - r:>9.5f}")

# The raw empirical law is not dominated: on a fresh sample it usually
# overstates some quantile.
S = D.sample(seed=2, count=1000)
print("\nraw empirical dominated by D:", all(dominates(t, e) for t, e in zip(D, empirical(S))))

# Monte Carlo evaluation gives the same answer with a Bernstein interval.
M = dominated_empirical_myerson(D.sample(seed=3, count=5000), delta=0.05)
mc = rev_mc(M, D, N=200_000, seed=4)
print(f"exact {rev_exact(M, D):.5f}, Monte Carlo {mc.estimate:.5f} +- {mc.halfwidth:.5f}")
