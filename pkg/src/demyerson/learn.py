"""Learning mechanisms from samples.

The dominated empirical distribution lowers every positive value's empirical
quantile by a Bernstein-style confidence width and parks the removed mass at
value 0; Myerson's auction for it is the learned mechanism.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import DiscreteDist, ProductDist
from .mech import Feasibility, Mechanism, SingleItem, build_myerson


class SampleError(ValueError):
    pass


@dataclass(frozen=True)
class ShadeParams:
    m: int
    n: int
    delta: float

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def c(self) -> float:
        """Log factor ``ln(2 m n / delta)``."""
        return math.log(2.0 * self.m * self.n / self.delta)


def _shade(q, c: float, m: int, width: float, shift: float):
    q = np.asarray(q, dtype=float)
    if np.any((q < 0) | (q > 1)):
        raise ValueError("quantile must lie in [0, 1]")
    out = np.maximum(0.0, q - np.sqrt(width * q * (1.0 - q) * c / m) - shift * c / m)
    return float(out) if out.ndim == 0 else out


def shade_s(p: ShadeParams, q):
    """``max(0, q - sqrt(2 q (1-q) c / m) - 4 c / m)``."""
    return _shade(q, p.c, p.m, 2.0, 4.0)


def shade_d(p: ShadeParams, q):
    """Doubly shaded quantile ``max(0, q - sqrt(8 q (1-q) c / m) - 7 c / m)``."""
    return _shade(q, p.c, p.m, 8.0, 7.0)


SHADERS = {"s": shade_s, "d": shade_d}


def map_positive_quantiles(d: DiscreteDist, g) -> DiscreteDist:
    """Apply ``g`` to the quantile of every positive value; rest goes to 0.

    The new law has ``Pr[X > v] = g(Pr_d[X > v])`` for all ``v > 0`` (this
    covers ``0 < v < min support`` too) and an atom at 0 absorbing ``1 - g(Pr_d[X > 0])``.
    ``g`` must be nondecreasing with ``g(q) <= q``.
    """
    pos = d.values[d.values > 0]
    vals = np.concatenate([[0.0], pos])
    tails = np.concatenate([[d.quantile(0.0)], d.quantile(pos) if pos.size else []])
    new = np.asarray(g(tails), dtype=float).reshape(-1)
    if np.any(np.diff(new) > 1e-15):
        raise AssertionError("quantile map produced non-monotone quantiles")
    if pos.size:
        new[-1] = 0.0
    return DiscreteDist.from_tail(vals, new)


def shade_dist(p: ShadeParams, d: DiscreteDist, shader: str = "s") -> DiscreteDist:
    fn = SHADERS[shader]
    return map_positive_quantiles(d, lambda q: fn(p, q))


def as_sample_matrix(samples) -> np.ndarray:
    s = np.asarray(samples, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
        raise SampleError("samples must be an m x n matrix with m, n >= 1")
    if not np.all(np.isfinite(s)):
        raise SampleError("samples must be finite")
    if np.any(s < 0):
        raise SampleError("samples must be nonnegative")
    return s


def empirical_column(col) -> DiscreteDist:
    vals, counts = np.unique(np.asarray(col, dtype=float), return_counts=True)
    return DiscreteDist(vals, counts / counts.sum())


def empirical(samples) -> ProductDist:
    s = as_sample_matrix(samples)
    return ProductDist([empirical_column(s[:, i]) for i in range(s.shape[1])])


def dominated_empirical(samples, delta: float) -> ProductDist:
    s = as_sample_matrix(samples)
    p = ShadeParams(s.shape[0], s.shape[1], delta)
    return ProductDist([shade_dist(p, e, "s") for e in empirical(s)])


def dominated_empirical_myerson(samples, delta: float = 0.05,
                                feasibility: Feasibility | None = None) -> Mechanism:
    """Myerson's auction for the dominated empirical distribution."""
    return build_myerson(dominated_empirical(samples, delta), feasibility or SingleItem())


def _price_table(samples):
    s = as_sample_matrix(samples)
    if s.shape[1] != 1:
        raise SampleError("pricing rules take a single column of samples")
    e = empirical_column(s[:, 0])
    return e.values, e.tail_ge


def empirical_price(samples) -> float:
    """Best price against the empirical distribution; ties go to the lower price."""
    vals, sale = _price_table(samples)
    rev = vals * sale
    return float(vals[np.flatnonzero(rev == rev.max())[0]])


def guarded_price(samples, delta_g: float) -> float:
    """Best empirical price among those selling with probability ``>= delta_g``."""
    if not 0 < delta_g <= 1:
        raise ValueError("delta_g must lie in (0, 1]")
    vals, sale = _price_table(samples)
    ok = sale >= delta_g
    if not ok.any():
        return float(vals[0])
    rev = np.where(ok, vals * sale, -np.inf)
    return float(vals[np.flatnonzero(rev == rev.max())[0]])
