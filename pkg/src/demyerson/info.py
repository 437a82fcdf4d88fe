"""Symmetric KL divergence, the partition bound, and the revenue distinguisher."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .dist import ContinuousDist, DiscreteDist, Distribution, as_product
from .learn import as_sample_matrix
from .mech import Mechanism, payments


def _skl_term(p: float, q: float) -> float:
    return (p - q) * math.log(p / q)


def skl_discrete(P: DiscreteDist, Q: DiscreteDist) -> float:
    """``sum (p - q) ln(p / q)`` over the union of supports; ``inf`` if supports differ."""
    vals = np.union1d(P.values, Q.values)
    terms = []
    for v in vals:
        p, q = P.mass_at(v), Q.mass_at(v)
        if p == 0.0 or q == 0.0:
            return math.inf
        terms.append(_skl_term(p, q))
    return math.fsum(terms)


def skl_product(P, Q) -> float:
    """SKL of product laws, which is additive over coordinates."""
    P, Q = as_product(P), as_product(Q)
    if P.n != Q.n:
        raise ValueError("coordinate count mismatch")
    return math.fsum(skl(a, b)[0] for a, b in zip(P, Q))


def _atoms(d: Distribution) -> dict[float, float]:
    if isinstance(d, DiscreteDist):
        return dict(zip(d.values.tolist(), d.masses.tolist()))
    return dict(d.atoms())


def _density(d: Distribution, v) -> np.ndarray:
    if isinstance(d, DiscreteDist):
        return np.zeros_like(np.asarray(v, dtype=float))
    return np.asarray(d.pdf(v), dtype=float)


def _probe_points(lo: float, hi: float, count: int = 64) -> np.ndarray:
    if math.isinf(hi):
        return lo + np.geomspace(1e-9, 1e9, count) * max(1.0, abs(lo))
    return np.linspace(lo, hi, count + 2)[1:-1]


MASS_EPS = 1e-15


def _continuous_mass(d: Distribution, lo: float, hi: float) -> float:
    """Probability of ``(lo, hi]`` carried by the density part of ``d``."""
    if isinstance(d, DiscreteDist):
        return 0.0
    total = float(d.quantile(lo)) - (0.0 if math.isinf(hi) else float(d.quantile(hi)))
    return total - sum(f for v, f in _atoms(d).items() if lo < v <= hi)


def skl_numeric(P: Distribution, Q: Distribution, rtol: float = 1e-10) -> tuple[float, float]:
    """SKL of laws with densities and atoms; returns ``(value, error_estimate)``.

    The density part is integrated piecewise with adaptive quadrature between
    the smoothness breakpoints of both laws; atom terms are added exactly.
    """
    ap, aq = _atoms(P), _atoms(Q)
    terms, err = [], 0.0
    for v in sorted(set(ap) | set(aq)):
        p, q = ap.get(v, 0.0), aq.get(v, 0.0)
        if p == 0.0 or q == 0.0:
            return math.inf, 0.0
        terms.append(_skl_term(p, q))

    cuts = set()
    for d in (P, Q):
        if isinstance(d, ContinuousDist):
            cuts.update(d.pieces())
    cuts = sorted(cuts)

    def f(v):
        p, q = float(_density(P, v)), float(_density(Q, v))
        if p <= 0.0 or q <= 0.0:
            return 0.0
        return (p - q) * math.log(p / q)

    for lo, hi in zip(cuts[:-1], cuts[1:]):
        # compare continuous masses rather than probed densities, which can underflow
        cp, cq = _continuous_mass(P, lo, hi), _continuous_mass(Q, lo, hi)
        if (cp > MASS_EPS) != (cq > MASS_EPS):
            return math.inf, 0.0
        if cp <= MASS_EPS:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, e = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=rtol, limit=200)
            except integrate.IntegrationWarning as exc:
                raise ArithmeticError(f"quadrature failed on [{lo}, {hi}): {exc}") from exc
        terms.append(val)
        err += e
    return math.fsum(terms), err


def skl(P: Distribution, Q: Distribution) -> tuple[float, float]:
    """Dispatch to the exact or numeric form; returns ``(value, error_estimate)``."""
    if isinstance(P, DiscreteDist) and isinstance(Q, DiscreteDist):
        return skl_discrete(P, Q), 0.0
    return skl_numeric(P, Q)


def dptrick_bound(partition) -> float:
    """``sum P(region) * eps_region^2`` over ``(mass, eps)`` pairs."""
    total = []
    for mass, eps in partition:
        if not 0 <= eps < 1:
            raise ValueError(f"region eps must lie in [0, 1), got {eps}")
        total.append(mass * eps * eps)
    return math.fsum(total)


def _prob_ge(d: Distribution, v: float) -> float:
    if math.isinf(v):
        return 0.0
    return float(d.quantile(v)) + _atoms(d).get(v, 0.0)


@dataclass(frozen=True)
class Region:
    lo: float
    hi: float
    mass: float       # probability of [lo, hi) under P
    ratio_lo: float   # smallest dP/dQ seen on the region
    ratio_hi: float

    @property
    def eps(self) -> float:
        """Smallest ``e`` with ``1/(1+e) <= dP/dQ <= 1+e`` on the region."""
        return max(self.ratio_hi, 1.0 / self.ratio_lo) - 1.0


def measured_partition(P: Distribution, Q: Distribution, cuts, probes: int = 2048) -> list[Region]:
    """Density ratios of ``P`` to ``Q`` on the intervals ``[cuts[j], cuts[j+1])``.

    Atoms are compared by mass and densities on a probe grid, so the returned
    ``eps`` values are measurements rather than certified bounds for continuous
    laws (they are exact for discrete ones).
    """
    ap, aq = _atoms(P), _atoms(Q)
    out = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        ratios = [ap[v] / aq[v] for v in ap if lo <= v < hi and v in aq]
        if any((v in ap) != (v in aq) for v in set(ap) | set(aq) if lo <= v < hi):
            ratios.append(math.inf)
        if not (isinstance(P, DiscreteDist) and isinstance(Q, DiscreteDist)):
            x = _probe_points(lo, hi, probes)
            x = np.concatenate([[lo], x])
            fp, fq = _density(P, x), _density(Q, x)
            both = (fp > 0) & (fq > 0)
            if np.any((fp > 0) != (fq > 0)):
                ratios.append(math.inf)
            ratios.extend((fp[both] / fq[both]).tolist())
        mass = _prob_ge(P, lo) - _prob_ge(P, hi)
        r = ratios or [1.0]
        out.append(Region(lo, hi, mass, min(r), max(r)))
    return out


def measured_bound(P: Distribution, Q: Distribution, cuts) -> float:
    return dptrick_bound((r.mass, r.eps) for r in measured_partition(P, Q, cuts))


def sample_lb(skl_value: float, c0: float = 1.0) -> float:
    """Indistinguishability scale ``c0 / SKL`` (a scale estimate, not a certificate)."""
    if skl_value < 0:
        raise ValueError("divergence must be nonnegative")
    if skl_value == 0:
        return math.inf
    if math.isinf(skl_value):
        return 0.0
    return c0 / skl_value


@dataclass(frozen=True)
class Verdict:
    label: str
    estimate: float
    threshold: float


def distinguish(m: Mechanism, ref_rev: float, alpha: float, samples, cap: float) -> Verdict:
    """Label samples P-like iff the mechanism's average revenue on them is at least ``ref_rev - alpha``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    s = as_sample_matrix(samples)
    total = payments(m, s).sum(axis=1)
    if np.any(total > cap):
        raise ValueError(f"payment {total.max()} exceeds cap {cap}")
    est = float(np.mean(total))
    thr = ref_rev - alpha
    return Verdict("P-like" if est >= thr else "Q-like", est, thr)

