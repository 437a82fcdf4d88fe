"""Myerson mechanisms for discrete product distributions.

A mechanism maps each bid to the bidder's ironed virtual value through a
nondecreasing step function, picks winners from those levels subject to a
feasibility structure, and charges every winner the smallest bid at which it
would still win.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .curve import ironed_virtual_values
from .dist import DiscreteDist, ProductDist, as_product

FORMAT_NAME = "demyerson-mechanism"
FORMAT_VERSION = 1


class MechanismError(ValueError):
    pass


class MechanismFormatError(MechanismError):
    """Unreadable mechanism file; ``offset`` is the byte position when known."""

    def __init__(self, msg: str, offset: int | None = None):
        super().__init__(msg if offset is None else f"{msg} (at offset {offset})")
        self.offset = offset


class UnsupportedVersionError(MechanismFormatError):
    pass


# ---------------------------------------------------------------------------
# feasibility


class Feasibility:
    """Base class.  ``independent(S)`` decides whether a winner set is allowed."""

    tag = ""

    def independent(self, winners: frozenset) -> bool:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise MechanismError(f"{type(self).__name__} cannot be serialized")

    def check(self, n: int) -> None:
        pass


class SingleItem(Feasibility):
    tag = "single"

    def independent(self, winners):
        return len(winners) <= 1

    def to_json(self):
        return {"type": self.tag}

    def __eq__(self, other):
        return isinstance(other, SingleItem)

    def __repr__(self):
        return "SingleItem()"


class Matroid(Feasibility):
    """Matroid given by an independence oracle over bidder index sets.

    Winners are chosen by the greedy algorithm on strictly positive levels,
    which is exact for matroids.
    """

    tag = "matroid"

    def __init__(self, independent: Callable[[frozenset], bool], name: str = "oracle"):
        self._oracle = independent
        self.name = name

    def independent(self, winners):
        return bool(self._oracle(frozenset(winners)))

    def verify(self, n: int) -> bool:
        """Exhaustively check downward closure and exchange (small ``n`` only)."""
        sets = [frozenset(c) for r in range(n + 1) for c in combinations(range(n), r)]
        ind = {s: self.independent(s) for s in sets}
        if not ind[frozenset()]:
            return False
        for s, ok in ind.items():
            if not ok:
                continue
            if any(not ind[s - {x}] for x in s):
                return False
        for a in sets:
            if not ind[a]:
                continue
            for b in sets:
                if ind[b] and len(b) > len(a):
                    if not any(ind[a | {x}] for x in b - a):
                        return False
        return True

    def __repr__(self):
        return f"Matroid({self.name})"


class KUnit(Matroid):
    tag = "k_unit"

    def __init__(self, k: int):
        if k < 1:
            raise MechanismError("k must be at least 1")
        self.k = int(k)
        super().__init__(lambda s: len(s) <= self.k, name=f"uniform rank {k}")

    def check(self, n):
        if self.k > n:
            raise MechanismError(f"k={self.k} exceeds the number of bidders {n}")

    def to_json(self):
        return {"type": self.tag, "k": self.k}

    def __eq__(self, other):
        return isinstance(other, KUnit) and other.k == self.k

    def __repr__(self):
        return f"KUnit({self.k})"


class PartitionMatroid(Matroid):
    """At most ``capacities[g]`` winners from each group ``groups[g]``."""

    tag = "partition"

    def __init__(self, groups: Sequence[Sequence[int]], capacities: Sequence[int]):
        if len(groups) != len(capacities):
            raise MechanismError("one capacity per group")
        self.groups = [tuple(int(i) for i in g) for g in groups]
        self.capacities = [int(c) for c in capacities]
        owner = {}
        for gi, g in enumerate(self.groups):
            for i in g:
                if i in owner:
                    raise MechanismError(f"bidder {i} is in two groups")
                owner[i] = gi
        self._owner = owner

        def oracle(s):
            counts = [0] * len(self.groups)
            for i in s:
                if i not in owner:
                    return False
                counts[owner[i]] += 1
            return all(c <= cap for c, cap in zip(counts, self.capacities))

        super().__init__(oracle, name="partition")

    def check(self, n):
        if set(self._owner) != set(range(n)):
            raise MechanismError("partition groups must cover every bidder exactly once")

    def to_json(self):
        return {"type": self.tag, "groups": [list(g) for g in self.groups],
                "capacities": list(self.capacities)}

    def __eq__(self, other):
        return (isinstance(other, PartitionMatroid) and other.groups == self.groups
                and other.capacities == self.capacities)


def feasibility_from_json(obj) -> Feasibility:
    if not isinstance(obj, dict) or "type" not in obj:
        raise MechanismFormatError("feasibility must be an object with a 'type'")
    t = obj["type"]
    if t == "single":
        return SingleItem()
    if t == "k_unit":
        return KUnit(int(obj["k"]))
    if t == "partition":
        return PartitionMatroid(obj["groups"], obj["capacities"])
    raise MechanismFormatError(f"unknown feasibility type {t!r}")


def parse_feasibility(text: str) -> Feasibility:
    """CLI spelling: ``single`` or ``k=K``."""
    text = text.strip()
    if text == "single":
        return SingleItem()
    if text.startswith("k="):
        return KUnit(int(text[2:]))
    raise MechanismError(f"unknown feasibility {text!r}; use 'single' or 'k=K'")


# ---------------------------------------------------------------------------
# mechanism


@dataclass(frozen=True, eq=False)
class Mechanism:
    """Per-bidder step tables ``(thresholds, levels)`` plus feasibility.

    ``thresholds[i]`` is ascending; a bid ``b`` maps to the level of the
    largest threshold ``<= b`` and to ``-inf`` below the first threshold.
    Ties between equal levels go to the lower bidder index.
    """

    thresholds: tuple
    levels: tuple
    feasibility: Feasibility

    def __post_init__(self):
        if len(self.thresholds) == 0:
            raise MechanismError("a mechanism needs at least one bidder")
        if len(self.thresholds) != len(self.levels):
            raise MechanismError("one level table per bidder")
        for t, lv in zip(self.thresholds, self.levels):
            if t.shape != lv.shape or t.size == 0:
                raise MechanismError("each bidder needs a nonempty step table")
            if np.any(np.diff(t) <= 0):
                raise MechanismError("thresholds must be strictly increasing")
            if np.any(np.diff(lv) < 0):
                raise MechanismError("levels must be nondecreasing in the bid")
        self.feasibility.check(len(self.thresholds))

    @classmethod
    def from_tables(cls, tables, feasibility: Feasibility | None = None) -> "Mechanism":
        th, lv = [], []
        for t, l in tables:
            t = np.array(t, dtype=float)
            l = np.array(l, dtype=float)
            t.setflags(write=False)
            l.setflags(write=False)
            th.append(t)
            lv.append(l)
        return cls(tuple(th), tuple(lv), feasibility or SingleItem())

    @property
    def n(self) -> int:
        return len(self.thresholds)

    @property
    def single_item(self) -> bool:
        return isinstance(self.feasibility, SingleItem)

    def level(self, i: int, bid: float) -> float:
        k = np.searchsorted(self.thresholds[i], bid, side="right") - 1
        return float(self.levels[i][k]) if k >= 0 else -np.inf

    def level_matrix(self, bids: np.ndarray) -> np.ndarray:
        bids = np.atleast_2d(np.asarray(bids, dtype=float))
        out = np.empty(bids.shape)
        for i in range(self.n):
            k = np.searchsorted(self.thresholds[i], bids[:, i], side="right") - 1
            out[:, i] = np.where(k >= 0, self.levels[i][np.maximum(k, 0)], -np.inf)
        return out

    def select(self, levels: Sequence[float]) -> frozenset:
        """Winner set for a vector of levels."""
        levels = np.asarray(levels, dtype=float)
        if self.single_item:
            ok = levels >= 0
            if not ok.any():
                return frozenset()
            best = np.max(levels[ok])
            return frozenset([int(np.flatnonzero(ok & (levels == best))[0])])
        order = sorted((i for i in range(self.n) if levels[i] > 0), key=lambda i: (-levels[i], i))
        chosen: set[int] = set()
        for i in order:
            if self.feasibility.independent(frozenset(chosen | {i})):
                chosen.add(i)
        return frozenset(chosen)

    def equals(self, other: "Mechanism") -> bool:
        return (self.n == other.n and self.feasibility == other.feasibility
                and all(np.array_equal(a, b) for a, b in zip(self.thresholds, other.thresholds))
                and all(np.array_equal(a, b) for a, b in zip(self.levels, other.levels)))


def build_myerson(d, feasibility: Feasibility | None = None) -> Mechanism:
    d = as_product(d)
    if not all(isinstance(c, DiscreteDist) for c in d):
        raise MechanismError("Myerson construction needs discrete coordinates; discretize first")
    return Mechanism.from_tables([(c.values, ironed_virtual_values(c)) for c in d], feasibility)


def _check_bids(bids, n):
    bids = np.asarray(bids, dtype=float)
    if bids.shape[-1] != n:
        raise MechanismError(f"expected {n} bids, got {bids.shape[-1]}")
    if not np.all(np.isfinite(bids)):
        raise MechanismError("bids must be finite")
    if np.any(bids < 0):
        raise MechanismError("bids must be nonnegative")
    return bids


def critical_bid(m: Mechanism, bids: np.ndarray, i: int) -> float:
    """Smallest breakpoint bid at which bidder ``i`` still wins, others fixed.

    Scans ``i``'s thresholds upward and re-runs winner selection for each.
    """
    levels = np.array([m.level(j, bids[j]) for j in range(m.n)])
    for t, lv in zip(m.thresholds[i], m.levels[i]):
        if t > bids[i]:
            break
        levels[i] = lv
        if i in m.select(levels):
            return float(t)
    raise MechanismError(f"bidder {i} does not win at its own bid")


def run(m: Mechanism, bids) -> tuple[frozenset, np.ndarray]:
    """Winners and threshold payments for one bid profile."""
    bids = _check_bids(bids, m.n)
    levels = np.array([m.level(j, bids[j]) for j in range(m.n)])
    winners = m.select(levels)
    pay = np.zeros(m.n)
    for i in winners:
        pay[i] = critical_bid(m, bids, i)
    return winners, pay


def _single_item_payments(m: Mechanism, bids: np.ndarray) -> np.ndarray:
    L = m.level_matrix(bids)
    P = bids.shape[0]
    pay = np.zeros((P, m.n))
    eligible = np.where(L >= 0, L, -np.inf)
    has = np.isfinite(eligible).any(axis=1)
    win = np.argmax(eligible, axis=1)
    for i in range(m.n):
        rows = np.flatnonzero(has & (win == i))
        if rows.size == 0:
            continue
        before = L[rows, :i].max(axis=1) if i > 0 else np.full(rows.size, -np.inf)
        after = L[rows, i + 1:].max(axis=1) if i < m.n - 1 else np.full(rows.size, -np.inf)
        after = np.maximum(after, 0.0)
        lv = m.levels[i]
        # must strictly beat lower indices and weakly beat higher ones and zero
        k = np.maximum(np.searchsorted(lv, before, side="right"),
                       np.searchsorted(lv, after, side="left"))
        pay[rows, i] = m.thresholds[i][k]
    return pay


def payments(m: Mechanism, bids) -> np.ndarray:
    """Payment matrix for a batch of bid profiles (rows)."""
    bids = _check_bids(np.atleast_2d(bids), m.n)
    if m.single_item:
        return _single_item_payments(m, bids)
    uniq, inv = np.unique(bids, axis=0, return_inverse=True)
    out = np.array([run(m, row)[1] for row in uniq]).reshape(len(uniq), m.n)
    return out[np.asarray(inv).ravel()]


def allocation(m: Mechanism, bids) -> np.ndarray:
    """0/1 allocation matrix for a batch of bid profiles."""
    bids = _check_bids(np.atleast_2d(bids), m.n)
    L = m.level_matrix(bids)
    out = np.zeros(bids.shape)
    for r in range(bids.shape[0]):
        for i in m.select(L[r]):
            out[r, i] = 1.0
    return out


def posted_price(m: Mechanism) -> float | None:
    """Price charged by a single-bidder mechanism, ``None`` if it never sells."""
    if m.n != 1:
        raise MechanismError("posted_price needs a single-bidder mechanism")
    lv = m.levels[0]
    cut = 0.0 if m.single_item else np.nextafter(0.0, 1.0)
    k = np.searchsorted(lv, cut, side="left")
    return float(m.thresholds[0][k]) if k < lv.size else None


def max_weight_independent_set(weights: Sequence[float], feasibility: Feasibility) -> tuple[frozenset, float]:
    """Exhaustive maximum over all independent sets of positive-weight bidders."""
    n = len(weights)
    best, best_w = frozenset(), 0.0
    for r in range(1, n + 1):
        for c in combinations(range(n), r):
            s = frozenset(c)
            if any(weights[i] <= 0 for i in s) or not feasibility.independent(s):
                continue
            w = sum(weights[i] for i in s)
            if w > best_w + 1e-12:
                best, best_w = s, w
    return best, best_w


# ---------------------------------------------------------------------------
# serialization


def to_json(m: Mechanism) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "feasibility": m.feasibility.to_json(),
        "bidders": [{"steps": [[float(t), float(l)] for t, l in zip(th, lv)]}
                    for th, lv in zip(m.thresholds, m.levels)],
        "tie": "lex",
    }


def serialize(m: Mechanism) -> bytes:
    return json.dumps(to_json(m), indent=1).encode()


def from_json(obj) -> Mechanism:
    if not isinstance(obj, dict):
        raise MechanismFormatError("mechanism file must hold a JSON object")
    version = obj.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported mechanism format version {version!r}")
    if obj.get("tie", "lex") != "lex":
        raise MechanismFormatError(f"unsupported tie rule {obj.get('tie')!r}")
    try:
        feas = feasibility_from_json(obj["feasibility"])
        tables = []
        for b in obj["bidders"]:
            steps = np.asarray(b["steps"], dtype=float).reshape(-1, 2)
            tables.append((steps[:, 0], steps[:, 1]))
        return Mechanism.from_tables(tables, feas)
    except MechanismFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MechanismFormatError(f"malformed mechanism: {exc}") from exc


def deserialize(data: bytes | str) -> Mechanism:
    if isinstance(data, bytes):
        try:
            data = data.decode()
        except UnicodeDecodeError as exc:
            raise MechanismFormatError("mechanism file is not UTF-8", exc.start) from exc
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MechanismFormatError(f"malformed JSON: {exc.msg}", exc.pos) from exc
    return from_json(obj)
