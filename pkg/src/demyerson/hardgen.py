"""Lower-bound hard instances and their condition checks.

Each instance is a triple ``(D^b, D^h, D^l)``: bidder 1 (or bidders 1..k for
k-unit) draws from the point mass ``D^b`` at ``v0`` and every other bidder from
``D^h`` or ``D^l``.  The two candidate laws agree below ``v2`` and have
virtual values on opposite sides of ``v0`` on the critical interval
``[v2, v1)``, so telling them apart from samples is what costs the learner.

``p`` and ``Delta`` are measured from the constructed laws (smallest
critical-interval mass and smallest virtual-value gap); the textbook values
are kept alongside as ``p_nominal`` and ``delta_nominal``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curve import ironed_virtual_values, is_regular, revenue_curve, virtual_values
from .dist import (ContinuousMhrLB, DiscreteDist, Distribution, ProductDist,
                   RegularLB, discretize, dist_to_json, point_mass)
from .info import dptrick_bound, measured_partition, skl

TOL = 1e-12


class ParameterError(ValueError):
    pass


def _table(d: DiscreteDist, phi: np.ndarray) -> Callable:
    lookup = dict(zip(d.values.tolist(), phi.tolist()))

    def f(v):
        return np.array([lookup[float(x)] for x in np.atleast_1d(v)])
    return f


@dataclass
class HardInstance:
    family: str
    n: int
    eps: float
    Db: DiscreteDist
    Dh: Distribution
    Dl: Distribution
    v0: float
    v1: float
    v2: float
    p_nominal: float
    delta_nominal: float
    phi_h: Callable
    phi_l: Callable
    cuts: list                      # partition intervals for the KL bound
    k: int = 1                      # bidders drawing from D^b; high-value budget scales with k
    H: float | None = None
    eps0: float | None = None
    b_slack: float = 0.0            # allowed relative excess in condition (b), see validate
    p: float = field(init=False)
    delta: float = field(init=False)

    def __post_init__(self):
        self.p = min(critical_mass(self.Dh, self.v2, self.v1), critical_mass(self.Dl, self.v2, self.v1))
        self.delta = measured_gap(self)
        if not self.delta > 0:
            raise ParameterError(f"virtual-value gap is {self.delta:.3g}; parameters out of range")

    @property
    def discrete(self) -> bool:
        return isinstance(self.Dh, DiscreteDist) and isinstance(self.Dl, DiscreteDist)

    def member(self, pattern: str) -> ProductDist:
        """Product in the family; ``pattern`` holds one 'h'/'l' letter per non-base bidder."""
        if len(pattern) != self.n - self.k:
            raise ValueError(f"pattern needs {self.n - self.k} letters")
        pick = {"h": self.Dh, "l": self.Dl}
        return ProductDist([self.Db] * self.k + [pick[c] for c in pattern])

    def to_json(self) -> dict:
        out = {"family": self.family, "n": self.n, "eps": self.eps, "k": self.k,
               "v0": self.v0, "v1": self.v1 if math.isfinite(self.v1) else "inf", "v2": self.v2,
               "p": self.p, "p_nominal": self.p_nominal,
               "delta": self.delta, "delta_nominal": self.delta_nominal,
               "Db": dist_to_json(self.Db), "Dh": dist_to_json(self.Dh), "Dl": dist_to_json(self.Dl)}
        if self.H is not None:
            out["H"] = self.H
        if self.eps0 is not None:
            out["eps0"] = self.eps0
        return out


def _prob_ge(d: Distribution, v: float) -> float:
    if math.isinf(v):
        return 0.0
    atom = d.mass_at(v) if isinstance(d, DiscreteDist) else dict(d.atoms()).get(v, 0.0)
    return float(d.quantile(v)) + atom


def critical_mass(d: Distribution, v2: float, v1: float) -> float:
    """``Pr[v2 <= X < v1]``."""
    return _prob_ge(d, v2) - _prob_ge(d, v1)


def _grid(d: Distribution, lo: float, hi: float, size: int = 4001) -> np.ndarray:
    """Evaluation points in ``[lo, hi)``: the support for discrete laws, a dense grid otherwise."""
    if isinstance(d, DiscreteDist):
        return d.values[(d.values >= lo) & (d.values < hi)]
    lo = max(lo, d.pieces()[0])
    if math.isinf(hi):
        return lo + np.concatenate([[0.0], np.geomspace(1e-9, 1e9, size)]) * max(1.0, lo)
    return np.linspace(lo, hi, size, endpoint=False)


def measured_gap(h: HardInstance) -> float:
    """Smallest of ``v0 - phi^l(v)`` and ``phi^h(v) - v0`` over ``[v2, v1)``."""
    gh = h.phi_h(_grid(h.Dh, h.v2, h.v1)) - h.v0
    gl = h.v0 - h.phi_l(_grid(h.Dl, h.v2, h.v1))
    return float(min(gh.min(), gl.min()))


def _discrete_tables(Dh: DiscreteDist, Dl: DiscreteDist, iron_low: bool = False):
    phl = ironed_virtual_values(Dl) if iron_low else virtual_values(Dl)
    return _table(Dh, virtual_values(Dh)), _table(Dl, phl)


def _check_eps(eps, hi=0.5):
    if not 0 < eps < hi:
        raise ParameterError(f"eps must lie in (0, {hi})")


def gen_bounded_1H(n: int, H: float, eps: float) -> HardInstance:
    if n < 2 or not H > 1:
        raise ParameterError("need n >= 2 and H > 1")
    _check_eps(eps)
    a = 1.0 + 1.0 / n - 1.0 / (n * H)
    v2 = (H + 1.0) / 2.0
    lo = 1.0 - 2.0 / (n * H)
    hi, ld = (1.0 + eps) / (n * H), (1.0 - eps) / (n * H)
    Dl = DiscreteDist([a, v2, H], [lo, ld, hi])
    Dh = DiscreteDist([a, v2, H], [lo, hi, ld])
    ph, pl = _discrete_tables(Dh, Dl)
    return HardInstance("bounded_1H", n, eps, point_mass(1.0), Dh, Dl, v0=1.0, v1=float(H), v2=v2,
                        p_nominal=2.0 / (n * H), delta_nominal=eps * H, phi_h=ph, phi_l=pl,
                        cuts=[0.0, v2, math.inf], H=float(H))


def gen_bounded_01(n: int, eps: float, H: float = 10.0) -> HardInstance:
    """The [1, H] instance with every value divided by ``H``."""
    b = gen_bounded_1H(n, H, eps)
    Dh, Dl = b.Dh.scaled(1.0 / H), b.Dl.scaled(1.0 / H)
    ph, pl = _discrete_tables(Dh, Dl)
    return HardInstance("bounded_01", n, eps, point_mass(1.0 / H), Dh, Dl, v0=1.0 / H, v1=1.0,
                        v2=b.v2 / H, p_nominal=b.p_nominal, delta_nominal=eps,
                        phi_h=ph, phi_l=pl, cuts=[0.0, b.v2 / H, math.inf], H=float(H))


def gen_regular(n: int, eps: float) -> HardInstance:
    if n < 2:
        raise ParameterError("need n >= 2")
    _check_eps(eps)
    Dh, Dl = RegularLB(n, eps, high=True), RegularLB(n)
    v2 = 1.0 + 1.0 / eps
    return HardInstance("regular", n, eps, point_mass(1.5), Dh, Dl, v0=1.5, v1=math.inf, v2=v2,
                        p_nominal=eps / n, delta_nominal=0.5,
                        phi_h=Dh.virtual_value, phi_l=Dl.virtual_value,
                        cuts=[Dl.lo, v2, math.inf])


def _resolve_eps0(n_log: float, eps, eps0):
    if (eps is None) == (eps0 is None):
        raise ParameterError("pass exactly one of eps and eps0")
    return (eps * n_log, eps) if eps0 is None else (eps0, eps0 / n_log)


def gen_mhr_discrete(n: int, eps: float | None = None, eps0: float | None = None) -> HardInstance:
    """Geometric body on ``{0, ..., log2 n + 1}`` with the top two masses tilted by ``eps0``."""
    L = int(round(math.log2(n))) if n >= 2 else 0
    if n < 2 or 2**L != n:
        raise ParameterError("n must be a power of two, at least 2")
    eps0, eps = _resolve_eps0(L, eps, eps0)
    _check_eps(eps0)
    vals = np.arange(L + 2, dtype=float)
    body = 2.0 ** -(np.arange(L) + 1.0)
    Dl = DiscreteDist(vals, np.concatenate([body, [1 / (2 * n), 1 / (2 * n)]]))
    Dh = DiscreteDist(vals, np.concatenate([body, [(1 + eps0) / (2 * n), (1 - eps0) / (2 * n)]]))
    ph, pl = _discrete_tables(Dh, Dl)
    return HardInstance("mhr_discrete", n, eps, point_mass(L - 1 + eps0), Dh, Dl, v0=L - 1 + eps0,
                        v1=L + 1.0, v2=float(L), p_nominal=1.0 / n, delta_nominal=eps0,
                        phi_h=ph, phi_l=pl, cuts=[0.0, float(L), math.inf], eps0=eps0)


def gen_mhr_continuous(n: int, eps: float | None = None, eps0: float | None = None) -> HardInstance:
    """Exponential pair with an atom at ``ln n``; the high law has a steeper hazard on ``[v2, v1)``."""
    if n < 2:
        raise ParameterError("need n >= 2")
    eps0, eps = _resolve_eps0(math.log(n), eps, eps0)
    _check_eps(eps0)
    Dh, Dl = ContinuousMhrLB(n, eps0, high=True), ContinuousMhrLB(n, eps0)
    r = math.sqrt(eps0)
    return HardInstance("mhr_continuous", n, eps, point_mass(math.log(n) - 1 + r), Dh, Dl,
                        v0=math.log(n) - 1 + r, v1=Dh.v1, v2=Dh.v2,
                        p_nominal=2 * r / n, delta_nominal=r,
                        phi_h=Dh.virtual_value, phi_l=Dl.virtual_value,
                        cuts=[0.0, Dh.v2, Dh.v1, math.inf], eps0=eps0, b_slack=r)


def gen_matroid_kunit(n: int, k: int, eps: float) -> HardInstance:
    """k-unit instance on ``[0, 1]``; the low law is compared through its ironed virtual values."""
    if k < 1 or n < 2 * k:
        raise ParameterError("need k >= 1 and n >= 2k")
    if not 0 < eps < k / 2:
        raise ParameterError("eps must lie in (0, k/2)")
    v3 = 0.5 + k / (8.0 * n)
    vals = [v3, 0.75, 1.0]
    base = 1.0 - k / (2.0 * n)
    Dl = DiscreteDist(vals, [base, (k - eps) / (4 * n), (k + eps) / (4 * n)])
    Dh = DiscreteDist(vals, [base, (k + eps) / (4 * n), (k - eps) / (4 * n)])
    ph, pl = _discrete_tables(Dh, Dl, iron_low=True)
    return HardInstance("kunit", n, eps, point_mass(0.5), Dh, Dl, v0=0.5, v1=1.0, v2=0.75,
                        p_nominal=(k - eps) / (4 * n), delta_nominal=eps / (2 * k),
                        phi_h=ph, phi_l=pl, cuts=[0.0, 0.75, math.inf], k=k)


@dataclass(frozen=True)
class TwoPointPair:
    eps: float
    D1: DiscreteDist
    D2: DiscreteDist

    @property
    def skl_closed(self) -> float:
        e = self.eps
        return 8 * e * math.log((1 + 4 * e) / (1 - 4 * e))


def gen_single_mhr_two_point(eps: float) -> TwoPointPair:
    """Support ``{1, 2}`` with masses ``(1 +- 4 eps)/2`` swapped between the two laws."""
    _check_eps(eps, 0.25)
    lo, hi = (1 + 4 * eps) / 2, (1 - 4 * eps) / 2
    return TwoPointPair(eps, DiscreteDist([1, 2], [lo, hi]), DiscreteDist([1, 2], [hi, lo]))


def bounded_1H_skl(n: int, H: float, eps: float) -> float:
    return 4 * eps / (n * H) * math.log((1 + eps) / (1 - eps))


@dataclass
class Check:
    passed: bool
    detail: str

    def __post_init__(self):
        self.passed = bool(self.passed)


@dataclass
class ValidationReport:
    family: str
    checks: dict            # letter -> Check; (i) is informational
    skl: float
    skl_bound: float
    regions: list

    @property
    def passed(self) -> bool:
        return all(c.passed for key, c in self.checks.items() if key != "i")

    def failed(self) -> list[str]:
        return [key for key, c in self.checks.items() if key != "i" and not c.passed]

    def to_json(self) -> dict:
        return {"family": self.family, "passed": self.passed,
                "checks": {key: {"passed": c.passed, "detail": c.detail} for key, c in self.checks.items()},
                "skl": self.skl, "skl_bound": self.skl_bound,
                "regions": [{"lo": r.lo, "hi": r.hi if math.isfinite(r.hi) else "inf",
                             "mass": r.mass, "eps": r.eps} for r in self.regions]}


def _density_ratio(h: HardInstance) -> np.ndarray:
    """``dD^l / dD^h`` on the critical interval."""
    if h.discrete:
        pts = _grid(h.Dh, h.v2, h.v1)
        return np.array([h.Dl.mass_at(v) / h.Dh.mass_at(v) for v in pts])
    pts = _grid(h.Dh, h.v2, h.v1)
    fh, fl = np.asarray(h.Dh.pdf(pts)), np.asarray(h.Dl.pdf(pts))
    ok = fh > 0
    return fl[ok] / fh[ok]


def _regular(h: HardInstance) -> bool:
    d = h.Dh
    if isinstance(d, DiscreteDist):
        return is_regular(d)
    lo, hi = d.pieces()[0], d.pieces()[-1]
    phi = np.asarray(h.phi_h(_grid(d, lo, hi)))
    atoms = [np.asarray(h.phi_h(np.array([v]))) for v, _ in d.atoms()]
    seq = np.concatenate([phi] + atoms)
    return bool(np.all(np.diff(seq) >= -TOL * max(1.0, np.abs(seq).max())))


def validate(h: HardInstance, delta: float | None = None, p: float | None = None) -> ValidationReport:
    """Check conditions (a)-(h) and compare the SKL with the partition bound (j).

    ``delta`` and ``p`` default to the instance's measured values; passing
    other values checks whether the conditions hold for them instead.
    """
    delta = h.delta if delta is None else delta
    p = h.p if p is None else p
    n, k = h.n, h.k
    c = {}
    c["a"] = Check(h.Db.size == 1 and abs(h.Db.values[0] - h.v0) <= TOL * max(1, h.v0),
                   f"D^b = {dist_to_json(h.Db)}, v0 = {h.v0}")

    high = max(_prob_ge(h.Dh, h.v2), _prob_ge(h.Dl, h.v2))
    budget = k * (1 + h.b_slack) / n
    c["b"] = Check(high <= budget * (1 + TOL), f"max Pr[v >= v2] = {high:.6g}, budget {budget:.6g}")

    crit = min(critical_mass(h.Dh, h.v2, h.v1), critical_mass(h.Dl, h.v2, h.v1))
    c["c"] = Check(crit >= p * (1 - TOL) and 0 < p <= k / n,
                   f"min Pr[v1 > v >= v2] = {crit:.6g}, p = {p:.6g} (nominal {h.p_nominal:.6g})")

    gh = h.phi_h(_grid(h.Dh, h.v2, h.v1))
    gl = h.phi_l(_grid(h.Dl, h.v2, h.v1))
    ok_d = delta > 0 and np.all(gl + delta <= h.v0 + TOL) and np.all(h.v0 <= gh - delta + TOL)
    c["d"] = Check(bool(ok_d), f"Delta = {delta:.6g} (measured {h.delta:.6g}, nominal {h.delta_nominal:.6g}); "
                               f"phi^l <= {gl.max():.6g}, phi^h >= {gh.min():.6g}, v0 = {h.v0:.6g}")

    bh = h.phi_h(_grid(h.Dh, -math.inf, h.v2))
    bl = h.phi_l(_grid(h.Dl, -math.inf, h.v2))
    top = max(bh.max(initial=-math.inf), bl.max(initial=-math.inf))
    c["e"] = Check(bool(top <= h.v0 + TOL * max(1, abs(h.v0))), f"max phi below v2 = {top:.6g}, v0 = {h.v0:.6g}")

    ratio = _density_ratio(h)
    band = (2**-0.5 * (1 - h.eps), 2**0.5 * (1 + h.eps))
    c["f"] = Check(bool(ratio.min() >= band[0] and ratio.max() <= band[1]),
                   f"dD^l/dD^h in [{ratio.min():.6g}, {ratio.max():.6g}], band [{band[0]:.6g}, {band[1]:.6g}]")

    c["g"] = Check(_regular(h), "D^h regular")

    if math.isinf(h.v1):
        ok_h = True
    else:
        ok_h = all(_prob_ge(d, h.v1) > 0 and float(d.quantile(h.v1)) == 0.0 for d in (h.Dh, h.Dl))
    c["h"] = Check(ok_h, f"v1 = {h.v1}")

    npd = n * p * delta
    c["i"] = Check(True, f"n p Delta = {npd:.6g}, n p Delta / eps = {npd / h.eps:.6g}")

    regions = measured_partition(h.Dh, h.Dl, h.cuts)
    value, err = skl(h.Dh, h.Dl)
    bound = dptrick_bound((r.mass, r.eps) for r in regions)
    c["j"] = Check(value <= bound + 10 * err + TOL, f"SKL = {value:.6g} <= bound {bound:.6g}")
    return ValidationReport(h.family, c, value, bound, regions)


def revenue_curve_csvs(h: HardInstance, grid=None) -> dict[str, str]:
    """Revenue curves of ``D^h`` and ``D^l`` (continuous laws are discretized first)."""
    out = {}
    for name, d in (("Dh", h.Dh), ("Dl", h.Dl)):
        dd = d if isinstance(d, DiscreteDist) else discretize(d, grid)
        out[name] = revenue_curve(dd).to_csv()
    return out


GENERATORS = {
    "bounded_1H": gen_bounded_1H,
    "bounded_01": gen_bounded_01,
    "regular": gen_regular,
    "mhr_discrete": gen_mhr_discrete,
    "mhr_continuous": gen_mhr_continuous,
    "kunit": gen_matroid_kunit,
}
