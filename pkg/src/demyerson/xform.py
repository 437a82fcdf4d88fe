"""Truncation operators and the surrogate construction.

All operators act on discrete laws and only ever lower quantiles, so each
output is dominated by its input.
"""
from __future__ import annotations

import math

import numpy as np

from .dist import DiscreteDist, ProductDist, as_product
from .evaluation import opt
from .learn import ShadeParams, map_positive_quantiles, shade_dist
from .mech import Feasibility


def t_min(d: DiscreteDist, eps: float) -> DiscreteDist:
    """Cap every positive value's quantile at ``1 - eps``; the rest sits at 0."""
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    return map_positive_quantiles(d, lambda q: np.minimum(q, 1.0 - eps))


def t_max_value(d: DiscreteDist, cap: float) -> DiscreteDist:
    """Move all mass above ``cap`` onto ``cap``."""
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    if cap >= d.values[-1]:
        return d
    keep = d.values < cap
    vals = np.append(d.values[keep], cap)
    masses = np.append(d.masses[keep], 1.0 - d.masses[keep].sum())
    return DiscreteDist(vals, masses / masses.sum())


def t_max_quantile(d: DiscreteDist, eps: float) -> DiscreteDist:
    """Zero out quantiles below ``eps``; the top tail collapses onto one value."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    tail = d.tail_gt
    return DiscreteDist.from_tail(d.values, np.where(tail >= eps, tail, 0.0))


def tail_value(d: DiscreteDist, threshold: float) -> float:
    """``sup{v : Pr[X > v] >= threshold}`` for ``threshold > 0``.

    The quantile is a right-continuous step, so the supremum is the smallest
    support value whose quantile falls below the threshold.
    """
    if threshold <= 0:
        return math.inf
    below = np.flatnonzero(d.tail_gt < threshold)
    return float(d.values[below[0]])


# sale-probability parameter p per family; beta is the revenue bound
def family_p(family: str, eps: float, H: float | None = None, c: float = 8.0) -> float:
    if family == "bounded_1H":
        if H is None:
            raise ValueError("the [1, H] family needs H")
        return 1.0 / H
    if family == "bounded_01":
        return 1.0
    if family == "regular":
        return eps / 8.0
    if family == "mhr":
        return 1.0 / (c * math.log(2.0 / eps))
    raise ValueError(f"unknown family {family!r}")


def cap_vector(d, eps: float, family: str, beta: float | None = None,
               H: float | None = None, c: float = 8.0,
               feasibility: Feasibility | None = None) -> np.ndarray:
    """Per-bidder caps ``min(beta / p, sup{v : q_i(v) >= p eps^2 / n})``.

    ``beta`` defaults to 1 for the [0, 1] family and to the exact Opt otherwise.
    """
    d = as_product(d)
    p = family_p(family, eps, H, c)
    if beta is None:
        beta = 1.0 if family == "bounded_01" else opt(d, feasibility)
    thr = p * eps * eps / d.n
    return np.array([min(beta / p, tail_value(di, thr)) for di in d])


def surrogate(d, caps, eps: float, params: ShadeParams) -> tuple[ProductDist, ProductDist]:
    """Truncated law ``D'`` and its doubly shaded version."""
    d = as_product(d)
    caps = np.broadcast_to(np.asarray(caps, dtype=float), (d.n,))
    dp = ProductDist([t_min(t_max_value(di, ci), eps) for di, ci in zip(d, caps)])
    return dp, ProductDist([shade_dist(params, di, "d") for di in dp])


def apply_all(d, fn, *args) -> ProductDist:
    return ProductDist([fn(di, *args) for di in as_product(d)])

