import math

import numpy as np
import pytest

from conftest import random_discrete
from demyerson.dist import DiscreteDist, HeavyTailRegular, ProductDist, discretize, point_mass, uniform_discrete
from demyerson.evaluation import (EnumerationBudgetError, PaymentCapError, bernstein_halfwidth, iter_profiles,
                                  opt, rev_exact, rev_mc, single_bidder_opt_bruteforce, virtual_surplus)
from demyerson.learn import ShadeParams, shade_dist
from demyerson.mech import KUnit, Mechanism, build_myerson

PM_U = ProductDist([point_mass(1.0), uniform_discrete([1, 2])])


def test_exact_examples():
    assert rev_exact(build_myerson(PM_U), PM_U) == pytest.approx(1.5, abs=1e-15)
    post2 = Mechanism.from_tables([([2.0], [1.0])])
    assert rev_exact(post2, uniform_discrete([1, 2])) == 1.0
    pm = ProductDist([point_mass(2.0), point_mass(3.0)])
    assert rev_exact(build_myerson(pm), pm) == 3.0


def test_opt_examples():
    assert opt(PM_U) == pytest.approx(1.5)
    assert opt(uniform_discrete([1, 2])) == pytest.approx(1.0)
    assert opt(discretize(HeavyTailRegular(), [0.5, 1.0])) == pytest.approx(1.0)


def test_bruteforce_examples():
    assert single_bidder_opt_bruteforce(uniform_discrete([1, 2])) == (1.0, 1.0)
    assert single_bidder_opt_bruteforce(DiscreteDist([1, 2, 8], [0.6, 0.3, 0.1])) == (1.0, 1.0)
    assert single_bidder_opt_bruteforce(point_mass(2.5)) == (2.5, 2.5)


def test_opt_equals_bruteforce_for_single_bidder():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        d = random_discrete(rng, max_size=10, integer=bool(rng.random() < 0.5), zero=True)
        assert opt(d) == pytest.approx(single_bidder_opt_bruteforce(d)[1], rel=1e-12, abs=1e-12)


def _battery(count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, 4))
        d = ProductDist([random_discrete(rng, max_size=5, zero=True) for _ in range(n)])
        p = ShadeParams(int(rng.integers(20, 2000)), n, 0.1)
        yield d, ProductDist([shade_dist(p, c, "d") for c in d])


def test_strong_revenue_monotonicity():
    for d, low in _battery(300, 1):
        m = build_myerson(low)
        assert rev_exact(m, d) >= rev_exact(m, low) - 1e-9


def test_weak_revenue_monotonicity():
    for d, low in _battery(300, 2):
        assert opt(d) >= opt(low) - 1e-9


def test_matroid_opt_matches_virtual_surplus():
    rng = np.random.default_rng(3)
    d = ProductDist([random_discrete(rng, max_size=5) for _ in range(4)])
    for k in (1, 2, 3):
        assert opt(d, KUnit(k)) == pytest.approx(virtual_surplus(d, KUnit(k)), abs=1e-12)
    assert opt(d, KUnit(2)) >= opt(d, KUnit(1))


def test_bernstein_halfwidth_solves_the_tail_equation():
    for n, var, bound in ((100, 0.3, 2.0), (10**5, 0.0, 1.0), (7, 5.0, 10.0)):
        t = bernstein_halfwidth(n, var, bound) * n
        lhs = t * t / (2 * (n * var + bound * t / 3))
        assert lhs == pytest.approx(math.log(2 / 1e-3), rel=1e-12)


def test_mc_covers_exact_value():
    m = build_myerson(PM_U)
    hits = 0
    for seed in range(100):
        r = rev_mc(m, PM_U, 2000, seed)
        hits += abs(r.estimate - 1.5) <= r.halfwidth
    assert hits >= 99


def test_mc_large_sample():
    r = rev_mc(build_myerson(PM_U), PM_U, 10**5, 0)
    assert abs(r.estimate - 1.5) <= r.halfwidth
    assert r.halfwidth < 0.01


def test_mc_single_draw_and_point_mass():
    r = rev_mc(build_myerson(PM_U), PM_U, 1, 0)
    assert r.estimate in (1.0, 2.0)
    assert r.halfwidth >= 2.0
    pm = ProductDist([point_mass(2.0)])
    r = rev_mc(build_myerson(pm), pm, 1000, 0)
    assert r.estimate == 2.0
    assert r.halfwidth == pytest.approx(math.log(2e3) * (2 / 3) * 2.0 / 1000, rel=1e-12)


def test_mc_is_deterministic_per_seed():
    m = build_myerson(PM_U)
    assert rev_mc(m, PM_U, 500, 9) == rev_mc(m, PM_U, 500, 9)


def test_mc_errors():
    m = build_myerson(PM_U)
    with pytest.raises(PaymentCapError):
        rev_mc(m, PM_U, 100, 0, payment_cap=1.5)
    with pytest.raises(ValueError):
        rev_mc(m, PM_U, 0, 0)
    h = ProductDist([HeavyTailRegular()])
    m1 = build_myerson(uniform_discrete([1, 2]))
    with pytest.raises(ValueError):
        rev_mc(m1, h, 100, 0)
    r = rev_mc(m1, h, 1000, 0, payment_cap=2.0)
    assert 0 < r.estimate <= 2.0


def test_enumeration_budget():
    big = ProductDist([DiscreteDist(np.arange(1, 101), np.full(100, 0.01))] * 4)
    m = build_myerson(big)
    with pytest.raises(EnumerationBudgetError):
        rev_exact(m, big)
    with pytest.raises(TypeError):
        rev_exact(build_myerson(uniform_discrete([1, 2])), HeavyTailRegular())


def test_profile_probabilities_sum_to_one():
    rng = np.random.default_rng(6)
    d = ProductDist([random_discrete(rng, max_size=7) for _ in range(4)])
    blocks = list(iter_profiles(d, chunk=50))
    assert sum(v.shape[0] for v, _ in blocks) == math.prod(c.size for c in d)
    assert math.fsum(np.concatenate([p for _, p in blocks])) == pytest.approx(1.0, abs=1e-12)
