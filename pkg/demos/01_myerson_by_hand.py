"""Myerson's auction on a small instance, worked step by step.

Run: python3 demos/01_myerson_by_hand.py
"""
import numpy as np

from demyerson import DiscreteDist, ProductDist, build_myerson, iron, opt, revenue_curve, rev_exact, run
from demyerson.dist import point_mass, uniform_discrete
from demyerson.evaluation import virtual_surplus

# A single buyer with values 1, 2, 8.  The raw virtual values dip in the
# middle, so ironing has to flatten them before they can rank bids.
d = DiscreteDist([1, 2, 8], [0.6, 0.3, 0.1])
curve = iron(revenue_curve(d))
print("values (high to low):", curve.values)
print("raw virtual values:  ", np.round(curve.phi, 4) + 0.0)
print("ironed:              ", np.round(curve.phi_bar, 4))
print("revenue curve R(q) at breakpoints q =", curve.q, "->", curve.R)
print()

# Two bidders: one always values the item at 1, the other is 1 or 2.
D = ProductDist([point_mass(1.0), uniform_discrete([1, 2])])
M = build_myerson(D)
for bids in ([1, 2], [1, 1]):
    winners, pay = run(M, bids)
    print(f"bids {bids}: winners {sorted(winners)}, payments {pay.tolist()}")

# Expected revenue equals expected ironed virtual surplus.
print(f"\nRev(M_D, D) = {rev_exact(M, D):.6f}")
print(f"E[max(0, max phi_bar)] = {virtual_surplus(D):.6f}")
print(f"Opt(D) = {opt(D):.6f}")
