import math

import numpy as np
import pytest
from hypothesis import given

from conftest import discrete_dists, random_discrete
from demyerson.dist import DiscreteDist, Exponential, ProductDist, point_mass, uniform_discrete
from demyerson.evaluation import rev_exact
from demyerson.hardgen import bounded_1H_skl, gen_bounded_1H, gen_mhr_continuous, gen_regular
from demyerson.info import (distinguish, dptrick_bound, measured_bound, measured_partition, sample_lb, skl,
                            skl_discrete, skl_numeric, skl_product)
from demyerson.learn import SampleError, ShadeParams, shade_dist
from demyerson.mech import build_myerson


def two_point(eps):
    a, b = (1 + 4 * eps) / 2, (1 - 4 * eps) / 2
    return DiscreteDist([1, 2], [a, b]), DiscreteDist([1, 2], [b, a])


def test_skl_discrete_examples():
    u = uniform_discrete([1, 2])
    assert skl_discrete(u, u) == 0.0
    P, Q = two_point(0.05)
    assert skl_discrete(P, Q) == pytest.approx(0.4 * math.log(1.2 / 0.8), abs=1e-12)
    assert skl_discrete(P, Q) == pytest.approx(0.1621860432432657, abs=1e-9)
    assert skl_discrete(point_mass(1.0), point_mass(2.0)) == math.inf


@given(discrete_dists(), discrete_dists())
def test_skl_is_symmetric_and_nonnegative(P, Q):
    a, b = skl_discrete(P, Q), skl_discrete(Q, P)
    assert a == b or (math.isinf(a) and math.isinf(b)) or a == pytest.approx(b, rel=1e-12)
    assert a >= 0
    if a == 0:
        assert P == Q


def test_skl_additive_over_products():
    rng = np.random.default_rng(0)
    for _ in range(30):
        base = [random_discrete(rng, max_size=5) for _ in range(3)]
        other = [DiscreteDist(c.values, rng.dirichlet(np.ones(c.size)) * 0.9 + 0.1 / c.size) for c in base]
        total = sum(skl_discrete(a, b) for a, b in zip(base, other))
        assert skl_product(ProductDist(base), ProductDist(other)) == pytest.approx(total, rel=1e-12)


def test_numeric_identical_laws_vanish():
    value, err = skl_numeric(Exponential(1.3), Exponential(1.3))
    assert abs(value) <= 1e-12 + err


def test_numeric_matches_closed_form_for_exponentials():
    # SKL of rates a, b is (a - b)^2 / (a b)
    value, err = skl_numeric(Exponential(1.0), Exponential(2.0))
    assert value == pytest.approx(0.5, rel=1e-8)
    assert err < 1e-8


def test_numeric_with_different_supports_is_infinite():
    value, _ = skl(point_mass(1.0), Exponential(1.0))
    assert value == math.inf


def test_regular_pair_below_bound():
    h = gen_regular(4, 0.1)
    value, err = skl(h.Dh, h.Dl)
    assert 0 < value <= measured_bound(h.Dh, h.Dl, h.cuts) + 10 * err


def test_continuous_mhr_pair_below_bound():
    h = gen_mhr_continuous(10, eps0=0.004)
    value, err = skl(h.Dh, h.Dl)
    assert 0 < value < math.inf
    assert value <= measured_bound(h.Dh, h.Dl, h.cuts) + 10 * err


def test_dptrick_examples():
    assert dptrick_bound([(1.0, 0.0)]) == 0.0
    n, H, eps = 4, 10.0, 0.1
    assert dptrick_bound([(1 - 2 / (n * H), 0.0), (2 / (n * H), eps)]) == pytest.approx(2 * eps**2 / (n * H))
    with pytest.raises(ValueError):
        dptrick_bound([(0.5, 1.0)])
    with pytest.raises(ValueError):
        dptrick_bound([(0.5, -0.1)])


def test_measured_partition_on_bounded_pair():
    n, H, eps = 4, 10.0, 0.1
    h = gen_bounded_1H(n, H, eps)
    regions = measured_partition(h.Dh, h.Dl, h.cuts)
    assert regions[0].eps == 0.0
    assert regions[1].mass == pytest.approx(2 / (n * H))
    # the top atoms swap masses, so the ratio on that region is (1+eps)/(1-eps), not 1+eps
    assert regions[1].eps == pytest.approx(2 * eps / (1 - eps))
    exact = skl_discrete(h.Dh, h.Dl)
    assert exact == pytest.approx(bounded_1H_skl(n, H, eps), rel=1e-12)
    assert exact <= measured_bound(h.Dh, h.Dl, h.cuts)
    assert exact > dptrick_bound([(2 / (n * H), eps)])


def test_sample_lb():
    assert sample_lb(0.01) == pytest.approx(100)
    assert sample_lb(0.0) == math.inf
    assert sample_lb(math.inf) == 0.0
    assert sample_lb(0.5, c0=3.0) == 6.0
    with pytest.raises(ValueError):
        sample_lb(-1.0)


@pytest.mark.parametrize("eps", [0.01, 0.05, 0.1])
def test_sample_lb_series_for_bounded_pair(eps):
    n, H = 4, 10.0
    ratio = sample_lb(bounded_1H_skl(n, H, eps)) / (n * H / (8 * eps**2))
    assert abs(ratio - 1) <= eps**2


def test_shading_divergence_shrinks_with_more_samples():
    d = DiscreteDist([0.0, 0.5, 1.0], [0.25, 0.25, 0.5])
    vals = [skl_discrete(d, shade_dist(ShadeParams(2**k, 1, 0.1), d, "d")) for k in range(12, 17)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_distinguish():
    d = ProductDist([uniform_discrete([1, 2]), uniform_discrete([1, 3])])
    m = build_myerson(d)
    ref = rev_exact(m, d)
    hits = sum(distinguish(m, ref, 0.2, d.sample(seed, 400), cap=3.0).label == "P-like" for seed in range(30))
    assert hits >= 20
    v = distinguish(m, 100.0, 0.2, d.sample(0, 50), cap=3.0)
    assert v.label == "Q-like" and v.threshold == pytest.approx(99.8)
    with pytest.raises(SampleError):
        distinguish(m, ref, 0.2, np.zeros((0, 2)), cap=3.0)
    with pytest.raises(ValueError):
        distinguish(m, ref, 0.0, d.sample(0, 5), cap=3.0)
