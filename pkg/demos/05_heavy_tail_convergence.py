"""Single-bidder pricing rules on a heavy-tailed regular law.

The law has cdf v/(v+2) up to 2 and (2v-3)/(2v-2) beyond, so price 2 earns
the optimum 1 while every very high price still earns about 0.5.  The plain
empirical price keeps chasing lucky high samples; guarding the sale
probability fixes that, and so does the dominated empirical learner, which
needs no knowledge of the family.

Run: python3 demos/05_heavy_tail_convergence.py  (about 10 seconds)
"""
from demyerson.dist import HeavyTailRegular
from demyerson.experiments import ALGOS, convergence, mean_ratios

d = HeavyTailRegular()
print(f"revenue at price 2: {d.revenue_at_price(2.0)}, sale probability {d.quantile(2.0)}")
print(f"revenue at quantile 1e-6: {d.value_at(1e-6) * 1e-6:.6f}\n")

grid = (100, 1000, 10000)
r = mean_ratios(convergence(m_grid=grid, trials=100, seed=0))
print(f"{'rule':>12}" + "".join(f"{m:>10}" for m in grid))
for a in ALGOS:
    print(f"{a:>12}" + "".join(f"{r[(m, a)]:>10.4f}" for m in grid))
