"""Convergence of single-bidder pricing rules and the additive-gap trend of the dominated learner."""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict

import numpy as np

from .dist import DiscreteDist, HeavyTailRegular, ProductDist, stream, uniform_discrete
from .evaluation import opt, rev_exact
from .learn import dominated_empirical_myerson, empirical_price, guarded_price
from .mech import posted_price

ALGOS = ("empirical", "guarded_m13", "guarded_1H", "dominated")
CONVERGENCE_COLUMNS = ("m", "trial", "algo", "price", "revenue", "ratio")
TREND_COLUMNS = ("m", "gap", "gap_sqrt_m")


def _prices(samples: np.ndarray, delta: float, H: float, guard_exponent: float) -> dict:
    m = samples.size
    dom = posted_price(dominated_empirical_myerson(samples, delta))
    return {
        "empirical": empirical_price(samples),
        "guarded_m13": guarded_price(samples, m ** -guard_exponent),
        "guarded_1H": guarded_price(samples, 1.0 / H),
        "dominated": math.inf if dom is None else dom,
    }


def convergence(m_grid=(100, 1000, 10000), trials: int = 200, seed: int = 0,
                delta: float = 0.05, H: float = 100.0, guard_exponent: float = 1.0 / 3.0) -> list[dict]:
    """Posted prices learned from heavy-tail samples, scored under the true law.

    Trial ``t`` at grid position ``j`` draws from stream ``(seed, t, j)``; all
    four rules see the same samples.  Opt is 1, so ratio equals revenue.
    """
    if trials < 1 or not m_grid or min(m_grid) < 1:
        raise ValueError("need trials >= 1 and positive sample sizes")
    d = HeavyTailRegular()
    rows = []
    for j, m in enumerate(m_grid):
        for t in range(trials):
            s = d.sample(stream(seed, t, j), int(m))
            for algo, price in _prices(s, delta, H, guard_exponent).items():
                rev = 0.0 if math.isinf(price) else float(d.revenue_at_price(price))
                rows.append({"m": int(m), "trial": t, "algo": algo, "price": float(price),
                             "revenue": rev, "ratio": rev / 1.0})
    return rows


def mean_ratios(rows) -> dict:
    """``{(m, algo): mean ratio}``."""
    acc = defaultdict(list)
    for r in rows:
        acc[(r["m"], r["algo"])].append(r["ratio"])
    return {key: math.fsum(v) / len(v) for key, v in acc.items()}


def default_trend_instance(K: int = 64) -> ProductDist:
    """Two bidders on the grid ``{1/K, ..., 1}``: one uniform, one with linearly decreasing mass."""
    vals = np.arange(1, K + 1) / K
    w = np.linspace(2.0, 1.0, K)
    return ProductDist([uniform_discrete(vals), DiscreteDist(vals, w / w.sum())])


def trend(m_grid=(2**8, 2**10, 2**12, 2**14), trials: int = 40, seed: int = 0,
          delta: float = 0.05, instance: ProductDist | None = None) -> list[dict]:
    """Average additive gap ``Opt(D) - Rev(learned mechanism, D)`` per sample size."""
    d = instance or default_trend_instance()
    best = opt(d)
    rows = []
    for j, m in enumerate(m_grid):
        gaps = [best - rev_exact(dominated_empirical_myerson(d.sample(seed, int(m), t * len(m_grid) + j),
                                                             delta), d)
                for t in range(trials)]
        g = math.fsum(gaps) / trials
        rows.append({"m": int(m), "gap": g, "gap_sqrt_m": g * math.sqrt(m)})
    return rows


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def convergence_gnuplot(csv_name: str) -> str:
    lines = [
        "set datafile separator ','",
        "set logscale x",
        "set xlabel 'samples m'",
        "set ylabel 'mean revenue / Opt'",
        "set key bottom right",
        "plot " + ", \\\n     ".join(
            f"'{csv_name}' using (strcol(3) eq '{a}' ? $1 : 1/0):6 smooth unique with linespoints title '{a}'"
            for a in ALGOS),
    ]
    return "\n".join(lines) + "\n"


def trend_gnuplot(csv_name: str) -> str:
    return "\n".join([
        "set datafile separator ','",
        "set logscale x 2",
        "set xlabel 'samples m'",
        "set ylabel 'gap * sqrt(m)'",
        f"plot '{csv_name}' using 1:3 every ::1 with linespoints title 'gap sqrt(m)'",
    ]) + "\n"
