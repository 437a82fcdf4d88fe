"""Single-bidder value distributions and their quantile calculus.

Quantiles are strict throughout: ``quantile(D, v) = Pr[X > v]``.  The inverse
map ``value_at(D, q)`` returns ``inf{x : quantile(D, x) <= q}`` restricted to
the support, so it is a step function for discrete laws.
"""
from __future__ import annotations

import csv
import io
import math
from typing import Sequence

import numpy as np

MIN_MASS = 1e-15
MASS_TOL = 1e-12


class DistributionError(ValueError):
    pass


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent RNG stream for ``(seed, *key)``.

    Streams are derived with ``SeedSequence(seed, spawn_key=key)`` so that the
    draws of trial ``t`` / coordinate ``i`` never depend on how many other
    streams were created before it.
    """
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


class Distribution:
    """Common interface; subclasses implement the quantile pair."""

    def quantile(self, v):
        raise NotImplementedError

    def value_at(self, q):
        raise NotImplementedError

    def cdf(self, v):
        return 1.0 - np.asarray(self.quantile(v), dtype=float)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if count < 0:
            raise DistributionError("count must be nonnegative")
        if count == 0:
            return np.empty(0)
        return np.asarray(self.value_at(rng.random(count)), dtype=float)

    @property
    def is_discrete(self) -> bool:
        return False


def _check_q(q):
    q = np.asarray(q, dtype=float)
    if np.any((q < 0) | (q > 1)) or np.any(np.isnan(q)):
        raise DistributionError("quantile must lie in [0, 1]")
    return q


class DiscreteDist(Distribution):
    """Finitely supported law given by ascending values and their masses."""

    def __init__(self, values: Sequence[float], masses: Sequence[float]):
        values = np.asarray(values, dtype=float).ravel()
        masses = np.asarray(masses, dtype=float).ravel()
        if values.shape != masses.shape or values.size == 0:
            raise DistributionError("need a nonempty support with one mass per value")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DistributionError("values must be finite and nonnegative")
        if np.any(np.diff(values) <= 0):
            raise DistributionError("values must be strictly increasing")
        if np.any(masses < MIN_MASS) or np.any(masses > 1 + MASS_TOL):
            raise DistributionError("masses must lie in [1e-15, 1]")
        total = math.fsum(masses)
        if abs(total - 1.0) > MASS_TOL:
            raise DistributionError(f"masses sum to {total!r}, not 1")
        values.setflags(write=False)
        masses.setflags(write=False)
        self.values = values
        self.masses = masses
        # tail[k] = Pr[X >= values[k]]; tail[K] = 0
        tail = np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])
        tail[0] = 1.0
        tail.setflags(write=False)
        self._tail = tail

    @classmethod
    def from_points(cls, points) -> "DiscreteDist":
        """Build from ``(value, mass)`` pairs in any order; duplicates merge."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        vals, inv = np.unique(pts[:, 0], return_inverse=True)
        masses = np.zeros(vals.size)
        np.add.at(masses, inv, pts[:, 1])
        return cls(vals, masses)

    @classmethod
    def from_tail(cls, values, tail_gt) -> "DiscreteDist":
        """Build from strict quantiles ``tail_gt[k] = Pr[X > values[k]]``.

        ``values`` ascending; the quantile just below ``values[0]`` is 1.
        Support points whose implied mass is negligible are dropped.
        """
        values = np.asarray(values, dtype=float)
        tail_gt = np.asarray(tail_gt, dtype=float)
        above = np.concatenate([[1.0], tail_gt[:-1]])
        masses = above - tail_gt
        if np.any(masses < -1e-12):
            raise AssertionError("quantiles are not monotone")
        keep = masses > MIN_MASS
        masses = masses[keep]
        return cls(values[keep], masses / math.fsum(masses))

    @property
    def is_discrete(self) -> bool:
        return True

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def tail_ge(self) -> np.ndarray:
        """``Pr[X >= values[k]]`` for each support point."""
        return self._tail[:-1]

    @property
    def tail_gt(self) -> np.ndarray:
        """``Pr[X > values[k]]`` for each support point."""
        return self._tail[1:]

    def quantile(self, v):
        out = self._tail[np.searchsorted(self.values, v, side="right")]
        return float(out) if np.ndim(out) == 0 else out

    def value_at(self, q):
        q = _check_q(q)
        idx = np.searchsorted(-self.tail_gt, -q, side="left")
        out = self.values[np.minimum(idx, self.size - 1)]
        return float(out) if out.ndim == 0 else out

    def mass_at(self, v) -> float:
        i = np.searchsorted(self.values, v)
        if i < self.size and self.values[i] == v:
            return float(self.masses[i])
        return 0.0

    def mean(self) -> float:
        return math.fsum(self.values * self.masses)

    def points(self) -> list[list[float]]:
        return [[float(v), float(p)] for v, p in zip(self.values, self.masses)]

    def scaled(self, factor: float) -> "DiscreteDist":
        return DiscreteDist(self.values * factor, self.masses)

    def __eq__(self, other):
        if not isinstance(other, DiscreteDist):
            return NotImplemented
        return (self.size == other.size and np.array_equal(self.values, other.values)
                and np.allclose(self.masses, other.masses, rtol=0, atol=1e-12))

    def __hash__(self):
        return hash((self.values.tobytes(), np.round(self.masses, 12).tobytes()))

    def __repr__(self):
        body = ", ".join(f"{v:g}: {p:.6g}" for v, p in zip(self.values, self.masses))
        return f"DiscreteDist({{{body}}})"


def point_mass(v: float) -> DiscreteDist:
    return DiscreteDist([v], [1.0])


def uniform_discrete(values: Sequence[float]) -> DiscreteDist:
    values = np.asarray(values, dtype=float)
    return DiscreteDist.from_points(np.column_stack([values, np.full(values.size, 1.0 / values.size)]))


class ContinuousDist(Distribution):
    """Closed-form law with a density plus finitely many atoms.

    Subclasses provide ``quantile``, ``value_at``, ``pdf`` (density of the
    continuous part), ``atoms`` and ``pieces`` (interval endpoints on which the
    density is smooth; the last endpoint may be ``inf``).
    """

    kind = ""

    def pdf(self, v):
        raise NotImplementedError

    def atoms(self) -> list[tuple[float, float]]:
        return []

    def pieces(self) -> list[float]:
        raise NotImplementedError

    def virtual_value(self, v):
        """``v - Pr[X > v] / f(v)`` on the continuous part."""
        v = np.asarray(v, dtype=float)
        return v - np.asarray(self.quantile(v)) / np.asarray(self.pdf(v))

    def to_json(self) -> dict:
        raise NotImplementedError

    def discretize(self, quantiles=None) -> DiscreteDist:
        return discretize(self, quantiles)


class HeavyTailRegular(ContinuousDist):
    """``F(v) = v/(v+2)`` on ``[0, 2]`` and ``(2v-3)/(2v-2)`` above.

    Regular, optimal price 2 with sale probability 1/2 and revenue 1; the
    revenue curve tends to 1/2 as the price grows.
    """

    kind = "heavy_tail_regular"

    def quantile(self, v):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            low = 2.0 / (np.maximum(v, 0.0) + 2.0)
            high = 1.0 / (2.0 * v - 2.0)
        out = np.where(v <= 2.0, low, high)
        return float(out) if out.ndim == 0 else out

    def value_at(self, q):
        q = _check_q(q)
        with np.errstate(divide="ignore"):
            out = np.where(q >= 0.5, 2.0 / np.maximum(q, 0.5) - 2.0, 1.0 + 1.0 / (2.0 * q))
        return float(out) if out.ndim == 0 else out

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(v <= 2.0, 2.0 / (v + 2.0) ** 2, 2.0 / (2.0 * v - 2.0) ** 2)
        return np.where(v < 0, 0.0, out)

    def revenue_at_price(self, price):
        """Expected revenue ``p * Pr[X >= p]`` of a posted price."""
        price = np.asarray(price, dtype=float)
        return price * np.asarray(self.quantile(price))

    def revenue_at_quantile(self, q):
        q = np.asarray(q, dtype=float)
        return np.where(q >= 0.5, 2.0 - 2.0 * q, 0.5 + q)

    def pieces(self):
        return [0.0, 2.0, math.inf]

    def to_json(self):
        return {"kind": self.kind}


class RegularLB(ContinuousDist):
    """Regular lower-bound pair on ``[1 + 1/n, inf)``.

    ``high=False`` gives density ``1/(n(v-1)^2)``.  ``high=True`` switches to
    ``(1-eps)/(n(v-2)^2)`` from ``1 + 1/eps`` on, lifting the virtual value from
    1 to 2 there.
    """

    kind = "regular_lb"

    def __init__(self, n: int, eps: float | None = None, high: bool = False):
        if n < 1:
            raise DistributionError("n must be positive")
        if high and not (eps is not None and 0 < eps < 1):
            raise DistributionError("the high variant needs 0 < eps < 1")
        self.n = int(n)
        self.eps = eps
        self.high = bool(high)
        self.lo = 1.0 + 1.0 / self.n
        self.split = 1.0 + 1.0 / eps if (high and eps) else math.inf

    def quantile(self, v):
        v = np.asarray(v, dtype=float)
        n = self.n
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(v < self.lo, 1.0, 1.0 / (n * (v - 1.0)))
            if self.high:
                q = np.where(v >= self.split, (1.0 - self.eps) / (n * (v - 2.0)), q)
        return float(q) if q.ndim == 0 else q

    def value_at(self, q):
        q = _check_q(q)
        n = self.n
        with np.errstate(divide="ignore"):
            v = 1.0 + 1.0 / (n * q)
            if self.high:
                v = np.where(q < self.eps / n, 2.0 + (1.0 - self.eps) / (n * q), v)
        return float(v) if v.ndim == 0 else v

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        n = self.n
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(v < self.lo, 0.0, 1.0 / (n * (v - 1.0) ** 2))
            if self.high:
                f = np.where(v >= self.split, (1.0 - self.eps) / (n * (v - 2.0) ** 2), f)
        return f

    def virtual_value(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(v >= self.split, 2.0, 1.0)

    def pieces(self):
        if self.high:
            return [self.lo, self.split, math.inf]
        return [self.lo, math.inf]

    def to_json(self):
        out = {"kind": self.kind, "n": self.n}
        if self.high:
            out.update(eps=self.eps, variant="high")
        return out


class ContinuousMhrLB(ContinuousDist):
    """Exponential body with an atom at ``ln n`` (continuous MHR lower bound).

    The low variant is ``Exp(1)`` with the tail beyond ``ln n`` collapsed onto
    ``ln n``.  The high variant raises the hazard rate to ``1 + 3 sqrt(eps0)``
    on ``[ln(n/(1+sqrt(eps0))), ln n)``.
    """

    kind = "cmhr_lb"

    def __init__(self, n: int, eps0: float, high: bool = False):
        if n < 2 or not (0 < eps0 < 1):
            raise DistributionError("need n >= 2 and 0 < eps0 < 1")
        self.n = int(n)
        self.eps0 = float(eps0)
        self.high = bool(high)
        r = math.sqrt(eps0)
        self.rate = 3.0 * r
        self.v1 = math.log(n)
        self.v2 = math.log(n / (1.0 + r))
        if high:
            self.atom = math.exp(-(1.0 + self.rate) * self.v1 + self.rate * self.v2)
        else:
            self.atom = 1.0 / n

    def _ccdf_body(self, v):
        v = np.asarray(v, dtype=float)
        body = np.exp(-np.maximum(v, 0.0))
        if self.high:
            body = np.where(v >= self.v2, np.exp(-(1.0 + self.rate) * v + self.rate * self.v2), body)
        return body

    def quantile(self, v):
        v = np.asarray(v, dtype=float)
        q = np.where(v < 0, 1.0, np.where(v >= self.v1, 0.0, self._ccdf_body(v)))
        return float(q) if q.ndim == 0 else q

    def value_at(self, q):
        q = _check_q(q)
        with np.errstate(divide="ignore"):
            v = -np.log(q)
            if self.high:
                edge = math.exp(-self.v2)
                v = np.where(q <= edge, (self.rate * self.v2 - np.log(q)) / (1.0 + self.rate), v)
        v = np.where(q <= self.atom, self.v1, np.minimum(v, self.v1))
        return float(v) if v.ndim == 0 else v

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        f = np.exp(-np.maximum(v, 0.0))
        if self.high:
            f = np.where(v >= self.v2, (1.0 + self.rate) * self._ccdf_body(v), f)
        return np.where((v < 0) | (v >= self.v1), 0.0, f)

    def atoms(self):
        return [(self.v1, self.atom)]

    def virtual_value(self, v):
        v = np.asarray(v, dtype=float)
        body = v - 1.0
        if self.high:
            body = np.where(v >= self.v2, v - 1.0 / (1.0 + self.rate), body)
        return np.where(v >= self.v1, self.v1, body)

    def pieces(self):
        if self.high:
            return [0.0, self.v2, self.v1]
        return [0.0, self.v1]

    def to_json(self):
        out = {"kind": self.kind, "n": self.n, "eps0": self.eps0}
        if self.high:
            out["variant"] = "high"
        return out


class Exponential(ContinuousDist):
    kind = "exponential"

    def __init__(self, rate: float):
        if not rate > 0:
            raise DistributionError("rate must be positive")
        self.rate = float(rate)

    def quantile(self, v):
        v = np.asarray(v, dtype=float)
        q = np.exp(-self.rate * np.maximum(v, 0.0))
        return float(q) if q.ndim == 0 else q

    def value_at(self, q):
        q = _check_q(q)
        with np.errstate(divide="ignore"):
            v = -np.log(q) / self.rate
        return float(v) if v.ndim == 0 else v

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(v < 0, 0.0, self.rate * np.exp(-self.rate * np.maximum(v, 0.0)))

    def pieces(self):
        return [0.0, math.inf]

    def to_json(self):
        return {"kind": self.kind, "rate": self.rate}


def default_quantile_grid(size: int = 4096, smallest: float = 2.0**-20) -> np.ndarray:
    return np.geomspace(smallest, 1.0, size)


def discretize(dist: Distribution, quantiles=None) -> DiscreteDist:
    """Round a law down onto an explicit quantile grid.

    Each grid level ``q_j`` gets value ``value_at(q_j)`` and mass
    ``q_j - q_{j-1}``, so the revenue curve is exact at the grid points and the
    result is dominated by ``dist``.
    """
    if isinstance(dist, DiscreteDist):
        return dist
    qs = default_quantile_grid() if quantiles is None else np.asarray(quantiles, dtype=float)
    qs = np.unique(np.clip(qs, 0.0, 1.0))
    qs = qs[qs > 0]
    if qs[-1] != 1.0:
        qs = np.append(qs, 1.0)
    vals = np.asarray(dist.value_at(qs), dtype=float)
    masses = np.diff(np.concatenate([[0.0], qs]))
    return DiscreteDist.from_points(np.column_stack([vals, masses]))


class ProductDist:
    """Independent coordinates, one law per bidder."""

    def __init__(self, coords: Sequence[Distribution]):
        coords = list(coords)
        if not coords:
            raise DistributionError("a product needs at least one coordinate")
        self.coords = coords

    @property
    def n(self) -> int:
        return len(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)

    @property
    def is_discrete(self) -> bool:
        return all(c.is_discrete for c in self.coords)

    def sample(self, seed: int, count: int, trial: int = 0) -> np.ndarray:
        """``count`` profiles; column ``i`` uses stream ``(seed, trial, i)``."""
        cols = [c.sample(stream(seed, trial, i), count) for i, c in enumerate(self.coords)]
        return np.column_stack(cols) if count else np.empty((0, self.n))

    def support_max(self) -> float:
        if not self.is_discrete:
            return math.inf
        return max(float(c.values[-1]) for c in self.coords)

    def __repr__(self):
        return f"ProductDist({self.coords!r})"


def as_product(d) -> ProductDist:
    if isinstance(d, ProductDist):
        return d
    if isinstance(d, Distribution):
        return ProductDist([d])
    return ProductDist(d)


def quantile(d: Distribution, v):
    return d.quantile(v)


def value_at(d: Distribution, q):
    return d.value_at(q)


def sample(d: Distribution, seed, count: int) -> np.ndarray:
    rng = seed if isinstance(seed, np.random.Generator) else stream(seed)
    return d.sample(rng, count)


def _compare_grid(a: Distribution, b: Distribution, grid):
    if a.is_discrete and b.is_discrete:
        return np.union1d(a.values, b.values)
    if grid is None:
        raise DistributionError("continuous coordinates need an explicit evaluation grid")
    pts = [np.asarray(grid, dtype=float)]
    for d in (a, b):
        if d.is_discrete:
            pts.append(d.values)
    return np.unique(np.concatenate(pts))


def dominates(a, b, grid=None, tol: float = 1e-12) -> bool:
    """First-order stochastic dominance ``a >= b`` coordinate-wise.

    Discrete coordinates are compared on the union of supports, which is exact
    because both quantile functions are right-continuous steps there.
    """
    a, b = as_product(a), as_product(b)
    if a.n != b.n:
        raise DistributionError(f"coordinate count mismatch: {a.n} vs {b.n}")
    for da, db in zip(a, b):
        pts = _compare_grid(da, db, grid)
        if np.any(np.asarray(da.quantile(pts)) < np.asarray(db.quantile(pts)) - tol):
            return False
    return True


def dist_to_json(d: Distribution) -> dict:
    if isinstance(d, DiscreteDist):
        if d.size == 1:
            return {"kind": "point", "v": float(d.values[0])}
        return {"kind": "discrete", "points": d.points()}
    return d.to_json()


def dist_from_json(obj: dict) -> Distribution:
    """Build a distribution from its JSON object form."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise DistributionError("distribution object needs a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "discrete":
            return DiscreteDist.from_points(obj["points"])
        if kind == "point":
            return point_mass(float(obj["v"]))
        if kind == "heavy_tail_regular":
            return HeavyTailRegular()
        if kind == "regular_lb":
            return RegularLB(int(obj["n"]), obj.get("eps"), obj.get("variant") == "high")
        if kind == "cmhr_lb":
            return ContinuousMhrLB(int(obj["n"]), float(obj["eps0"]), obj.get("variant") == "high")
        if kind == "exponential":
            return Exponential(float(obj["rate"]))
    except (KeyError, TypeError) as exc:
        raise DistributionError(f"bad {kind!r} distribution: {exc}") from exc
    raise DistributionError(f"unknown distribution kind {kind!r}")


def product_from_json(obj) -> ProductDist:
    """Accepts a single distribution object, a list of them, or ``{"coords": [...]}``."""
    if isinstance(obj, dict) and "coords" in obj:
        obj = obj["coords"]
    if isinstance(obj, list):
        return ProductDist([dist_from_json(o) for o in obj])
    return ProductDist([dist_from_json(obj)])


def product_to_json(d: ProductDist) -> dict:
    return {"coords": [dist_to_json(c) for c in d]}


def read_samples_csv(text: str) -> np.ndarray:
    """Parse a headerless sample matrix; rejects ragged, negative or non-finite rows."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(x.strip() for x in r)]
    if not rows:
        raise DistributionError("sample file is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DistributionError("sample rows have different lengths")
    try:
        s = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise DistributionError(f"non-numeric sample entry: {exc}") from exc
    if not np.all(np.isfinite(s)) or np.any(s < 0):
        raise DistributionError("samples must be finite and nonnegative")
    return s


def write_samples_csv(s: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in np.atleast_2d(s):
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()
