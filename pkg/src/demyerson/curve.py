"""Revenue curves in quantile space and their ironing.

For a discrete law with support ``v_1 > v_2 > ... > v_K`` the curve has
breakpoints ``(q_k, v_k q_k)`` with ``q_k = Pr[X >= v_k]``, joined linearly.
The slope into breakpoint ``k`` is the discrete virtual value of ``v_k``;
the upper concave envelope gives the ironed virtual values.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .dist import DiscreteDist


@dataclass(frozen=True)
class RevenueCurve:
    values: np.ndarray          # support values, descending
    q: np.ndarray               # 0 = q_0 < q_1 < ... < q_K = 1
    R: np.ndarray               # R_0 = 0, R_k = v_k q_k
    phi: np.ndarray             # raw virtual value per support value
    hull: np.ndarray | None = None      # indices into q/R of envelope vertices
    phi_bar: np.ndarray | None = None   # ironed virtual value per support value

    @property
    def is_ironed(self) -> bool:
        return self.hull is not None

    def envelope(self, q):
        """Ironed curve evaluated at ``q``."""
        c = self if self.is_ironed else iron(self)
        return np.interp(q, c.q[c.hull], c.R[c.hull])

    def raw(self, q):
        return np.interp(q, self.q, self.R)

    def envelope_slopes(self) -> np.ndarray:
        c = self if self.is_ironed else iron(self)
        h = c.hull
        return np.diff(c.R[h]) / np.diff(c.q[h])

    def to_csv(self) -> str:
        c = self if self.is_ironed else iron(self)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "R_raw", "R_ironed"])
        for qk, rk, rb in zip(c.q, c.R, c.envelope(c.q)):
            w.writerow([repr(float(qk)), repr(float(rk)), repr(float(rb))])
        return buf.getvalue()


def revenue_curve(d: DiscreteDist) -> RevenueCurve:
    vals = d.values[::-1]
    f = d.masses[::-1]
    q_ge = d.tail_ge[::-1]
    q_gt = d.tail_gt[::-1]
    q = np.concatenate([[0.0], q_ge])
    q[-1] = 1.0
    R = np.concatenate([[0.0], vals * q_ge])
    R[-1] = vals[-1]
    upper = np.concatenate([[vals[0]], vals[:-1]])
    phi = vals - (upper - vals) * q_gt / f
    return RevenueCurve(values=vals, q=q, R=R, phi=phi)


def upper_hull(x: np.ndarray, y: np.ndarray, rtol: float = 1e-13) -> np.ndarray:
    """Indices of the upper concave envelope of points sorted by ``x``.

    Monotone chain; nearly collinear middle points are dropped so that each
    envelope segment has a distinct slope.
    """
    hull: list[int] = []
    for k in range(len(x)):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            dx1, dy1 = x[a] - x[o], y[a] - y[o]
            dx2, dy2 = x[k] - x[o], y[k] - y[o]
            cross = dx1 * dy2 - dy1 * dx2
            if cross >= -rtol * (abs(dx1 * dy2) + abs(dy1 * dx2)):
                hull.pop()
            else:
                break
        hull.append(k)
    return np.asarray(hull, dtype=int)


def iron(curve: RevenueCurve) -> RevenueCurve:
    h = upper_hull(curve.q, curve.R)
    slopes = np.diff(curve.R[h]) / np.diff(curve.q[h])
    # breakpoint k (k >= 1) lies in the segment ending at the first hull vertex >= k
    seg = np.searchsorted(h, np.arange(1, curve.q.size), side="left") - 1
    return replace(curve, hull=h, phi_bar=slopes[seg])


def ironed_virtual_values(d: DiscreteDist) -> np.ndarray:
    """Ironed virtual values aligned with ``d.values`` (ascending)."""
    return iron(revenue_curve(d)).phi_bar[::-1].copy()


def virtual_values(d: DiscreteDist) -> np.ndarray:
    """Raw discrete virtual values aligned with ``d.values`` (ascending)."""
    return revenue_curve(d).phi[::-1].copy()


def _nondecreasing(x: np.ndarray, tol: float = 1e-12) -> bool:
    scale = max(1.0, float(np.max(np.abs(x)))) if x.size else 1.0
    return bool(np.all(np.diff(x) >= -tol * scale))


def is_regular(d: DiscreteDist) -> bool:
    return _nondecreasing(virtual_values(d))


def hazard_rates(d: DiscreteDist) -> np.ndarray:
    """``f(v) / Pr[X >= v]`` in ascending value order."""
    return d.masses / d.tail_ge


def is_mhr(d: DiscreteDist) -> bool:
    return _nondecreasing(hazard_rates(d))

