"""Expected revenue: exact enumeration, Monte Carlo with Bernstein intervals, Opt."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve import ironed_virtual_values
from .dist import DiscreteDist, ProductDist, as_product
from .mech import Feasibility, Mechanism, SingleItem, build_myerson, payments

ENUM_LIMIT = 10**7
CHUNK = 1 << 16
CI_ALPHA = 1e-3


class EnumerationBudgetError(RuntimeError):
    pass


class PaymentCapError(RuntimeError):
    pass


def _profile_count(d: ProductDist) -> int:
    if not d.is_discrete:
        raise TypeError("exact evaluation needs discrete coordinates; use rev_mc")
    return math.prod(c.size for c in d)


def iter_profiles(d: ProductDist, chunk: int = CHUNK):
    """Yield ``(values, probs)`` blocks covering every profile in mixed-radix order."""
    d = as_product(d)
    total = _profile_count(d)
    if total > ENUM_LIMIT:
        raise EnumerationBudgetError(
            f"{total} profiles exceed the enumeration budget of {ENUM_LIMIT}; use rev_mc")
    shape = tuple(c.size for c in d)
    for start in range(0, total, chunk):
        idx = np.unravel_index(np.arange(start, min(total, start + chunk)), shape)
        vals = np.column_stack([c.values[j] for c, j in zip(d, idx)])
        logp = sum(np.log(c.masses[j]) for c, j in zip(d, idx))
        yield vals, np.exp(logp)


def rev_exact(m: Mechanism, d) -> float:
    """Expected total payment, summed over all profiles with compensated summation."""
    d = as_product(d)
    if d.n != m.n:
        raise ValueError("mechanism and distribution disagree on the number of bidders")
    parts = []
    for vals, probs in iter_profiles(d):
        parts.extend(probs * payments(m, vals).sum(axis=1))
    return math.fsum(parts)


def virtual_surplus(d, feasibility: Feasibility | None = None) -> float:
    """Expected ironed virtual surplus of the Myerson allocation.

    Single item: ``E[max(0, max_i phi_bar_i)]``.  Matroids: expected weight of
    the greedy independent set over positive ironed virtual values.
    """
    d = as_product(d)
    feasibility = feasibility or SingleItem()
    pb = [ironed_virtual_values(c) for c in d]
    m = build_myerson(d, feasibility)
    parts = []
    shape = tuple(c.size for c in d)
    for start in range(0, _profile_count(d), CHUNK):
        idx = np.unravel_index(np.arange(start, min(_profile_count(d), start + CHUNK)), shape)
        lv = np.column_stack([p[j] for p, j in zip(pb, idx)])
        probs = np.exp(sum(np.log(c.masses[j]) for c, j in zip(d, idx)))
        if isinstance(feasibility, SingleItem):
            w = np.maximum(0.0, lv.max(axis=1))
        else:
            w = np.array([sum(row[i] for i in m.select(row)) for row in lv])
        parts.extend(probs * w)
    return math.fsum(parts)


def opt(d, feasibility: Feasibility | None = None, tol: float = 1e-9) -> float:
    """Optimal expected revenue; cross-checked against the virtual-surplus form."""
    d = as_product(d)
    feasibility = feasibility or SingleItem()
    rev = rev_exact(build_myerson(d, feasibility), d)
    vs = virtual_surplus(d, feasibility)
    if abs(rev - vs) > tol * max(1.0, abs(rev)):
        raise AssertionError(f"revenue {rev} differs from virtual surplus {vs}")
    return rev


def single_bidder_opt_bruteforce(d: DiscreteDist) -> tuple[float, float]:
    """Best posted price by exhaustive search; ties go to the lower price."""
    best_p, best_r = None, -1.0
    for v in d.values:
        r = float(v) * math.fsum(f for u, f in zip(d.values, d.masses) if u >= v)
        if r > best_r:
            best_p, best_r = float(v), r
    return best_p, best_r


def bernstein_halfwidth(n: int, var: float, bound: float, alpha: float = CI_ALPHA) -> float:
    """Two-sided Bernstein halfwidth for the mean of ``n`` draws in ``[0, bound]``.

    Solves ``t^2 / (2 (n var + bound t / 3)) = ln(2/alpha)`` for the sum deviation ``t``.
    """
    L = math.log(2.0 / alpha)
    a = L * (2.0 / 3.0) * bound
    t = (a + math.sqrt(a * a + 8.0 * L * n * var)) / 2.0
    return t / n


@dataclass(frozen=True)
class MCResult:
    estimate: float
    halfwidth: float
    n: int

    def to_json(self):
        return {"method": "mc", "value": self.estimate, "halfwidth": self.halfwidth, "N": self.n}


def rev_mc(m: Mechanism, d, N: int, seed: int, payment_cap: float | None = None,
           trial: int = 0) -> MCResult:
    d = as_product(d)
    if N < 1:
        raise ValueError("N must be positive")
    cap = d.support_max() * (1 if m.single_item else m.n) if payment_cap is None else float(payment_cap)
    if not math.isfinite(cap):
        raise ValueError("unbounded distribution: pass an explicit payment_cap")
    total = payments(m, d.sample(seed, N, trial)).sum(axis=1)
    if np.any(total > cap):
        raise PaymentCapError(f"observed payment {total.max()} exceeds cap {cap}")
    var = float(np.var(total))
    return MCResult(float(np.mean(total)), bernstein_halfwidth(N, var, cap), N)
