import json
import math

import numpy as np
import pytest

from demyerson.curve import iron, is_mhr, revenue_curve
from demyerson.evaluation import opt, single_bidder_opt_bruteforce
from demyerson.hardgen import (GENERATORS, ParameterError, bounded_1H_skl, gen_bounded_01, gen_bounded_1H,
                               gen_matroid_kunit, gen_mhr_continuous, gen_mhr_discrete, gen_regular,
                               gen_single_mhr_two_point, revenue_curve_csvs, validate)
from demyerson.info import skl_discrete

GRIDS = {
    "bounded_1H": [dict(n=4, H=4, eps=0.2), dict(n=3, H=10, eps=0.1), dict(n=6, H=20, eps=0.3)],
    "bounded_01": [dict(n=4, eps=0.2), dict(n=3, eps=0.1), dict(n=8, eps=0.3)],
    "regular": [dict(n=4, eps=0.2), dict(n=3, eps=0.1), dict(n=8, eps=0.3)],
    "mhr_discrete": [dict(n=8, eps0=0.2), dict(n=4, eps0=0.1), dict(n=16, eps0=0.3)],
    "mhr_continuous": [dict(n=10, eps0=0.004), dict(n=20, eps0=0.001), dict(n=50, eps0=0.01)],
    "kunit": [dict(n=4, k=1, eps=0.2), dict(n=8, k=2, eps=0.2), dict(n=12, k=3, eps=0.1)],
}
CASES = [(fam, kw) for fam, grid in GRIDS.items() for kw in grid]


@pytest.mark.parametrize("fam,kw", CASES, ids=[f"{f}-{'-'.join(map(str, k.values()))}" for f, k in CASES])
def test_generators_pass_validation(fam, kw):
    h = GENERATORS[fam](**kw)
    report = validate(h)
    assert report.passed, report.failed()
    assert report.skl > 0
    json.dumps(report.to_json())
    json.dumps(h.to_json())


@pytest.mark.parametrize("fam,kw", [(f, g[0]) for f, g in GRIDS.items()])
def test_corrupted_parameters_are_caught(fam, kw):
    h = GENERATORS[fam](**kw)
    assert "d" in validate(h, delta=2 * h.delta).failed()
    assert "c" in validate(h, p=2 * h.p).failed()


def test_bounded_1H_virtual_values():
    h = gen_bounded_1H(4, 4, 0.2)
    assert h.phi_l(np.array([h.v2]))[0] == pytest.approx(2.5 - 1.5 * 1.2 / 0.8, abs=1e-12)
    assert h.phi_l(np.array([h.v2]))[0] == pytest.approx(0.25, abs=1e-12)
    assert h.phi_l(np.array([4.0]))[0] == 4.0
    assert (h.v0, h.v1, h.v2) == (1.0, 4.0, 2.5)


@pytest.mark.parametrize("n,H,eps", [(4, 4, 0.2), (3, 10, 0.1), (5, 50, 0.05)])
def test_bounded_1H_skl_closed_form(n, H, eps):
    h = gen_bounded_1H(n, H, eps)
    assert skl_discrete(h.Dh, h.Dl) == pytest.approx(4 * eps / (n * H) * math.log((1 + eps) / (1 - eps)),
                                                     rel=1e-12, abs=1e-12)
    assert bounded_1H_skl(n, H, eps) == pytest.approx(skl_discrete(h.Dh, h.Dl), rel=1e-12)


def test_bounded_01_is_scaled_copy():
    a, b = gen_bounded_1H(4, 10, 0.2), gen_bounded_01(4, 0.2)
    assert np.allclose(b.Dh.values, a.Dh.values / 10)
    assert np.array_equal(b.Dh.masses, a.Dh.masses)
    assert b.phi_l(np.array([b.v2]))[0] == pytest.approx(a.phi_l(np.array([a.v2]))[0] / 10)
    assert skl_discrete(b.Dh, b.Dl) == pytest.approx(skl_discrete(a.Dh, a.Dl), rel=1e-12)


def test_regular_pair():
    h = gen_regular(4, 0.2)
    assert h.Dl.quantile(1 + 1 / 4) == pytest.approx(1.0)
    assert h.phi_h(np.array([1.3, 5.9])).tolist() == [1.0, 1.0]
    assert h.phi_h(np.array([6.0, 100.0])).tolist() == [2.0, 2.0]
    assert (h.v0, h.v1, h.v2) == (1.5, math.inf, 6.0)
    assert h.p == pytest.approx(0.2 / 4)
    assert h.delta == pytest.approx(0.5)


def test_mhr_discrete_pair():
    h = gen_mhr_discrete(8, eps0=0.2)
    assert h.Dh.mass_at(3.0) == pytest.approx(0.075)
    assert h.phi_l(np.array([3.0]))[0] == pytest.approx(2.0)
    assert 2 + 1.5 * 0.2 <= h.phi_h(np.array([3.0]))[0] <= 2 + 2 * 0.2
    assert is_mhr(h.Dh) and is_mhr(h.Dl)
    with pytest.raises(ParameterError):
        gen_mhr_discrete(6, eps0=0.1)
    assert gen_mhr_discrete(8, eps=0.05).eps0 == pytest.approx(0.15)


def test_mhr_continuous_pair():
    h = gen_mhr_continuous(10, eps0=0.004)
    assert h.Dh.quantile(h.v2) == pytest.approx(math.exp(-h.v2), rel=1e-14)
    assert h.Dl.atoms() == [(math.log(10), 0.1)]
    (v, mass), = h.Dh.atoms()
    assert v == pytest.approx(math.log(10))
    assert mass == pytest.approx((1 - 3 * 0.004) / 10, rel=1e-3)
    value = validate(h).skl
    assert 0 < value < math.inf


def test_mhr_continuous_refuses_large_eps0():
    with pytest.raises(ParameterError):
        gen_mhr_continuous(10, eps0=0.1)


def test_two_point_pair():
    pair = gen_single_mhr_two_point(0.05)
    assert skl_discrete(pair.D1, pair.D2) == pytest.approx(8 * 0.05 * math.log(1.2 / 0.8), abs=1e-12)
    assert pair.skl_closed == pytest.approx(skl_discrete(pair.D1, pair.D2), abs=1e-12)
    assert single_bidder_opt_bruteforce(pair.D1)[0] == 1.0
    assert single_bidder_opt_bruteforce(pair.D2)[0] == 2.0
    with pytest.raises(ParameterError):
        gen_single_mhr_two_point(0.25)


@pytest.mark.parametrize("n,k,eps", [(4, 1, 0.2), (8, 2, 0.2), (12, 3, 0.1)])
def test_kunit_closed_forms(n, k, eps):
    h = gen_matroid_kunit(n, k, eps)
    m = 4 * n - k
    assert h.phi_l(np.array([0.75]))[0] == pytest.approx((m - 2 * eps) / (2 * (m - eps)), abs=1e-12)
    assert h.phi_h(np.array([0.75]))[0] == pytest.approx((k + 2 * eps) / (2 * (k + eps)), abs=1e-12)
    assert h.delta == pytest.approx(min(eps / (2 * (m - eps)), eps / (2 * (k + eps))), abs=1e-12)


def test_kunit_low_law_needs_ironing():
    h = gen_matroid_kunit(8, 2, 0.2)
    c = iron(revenue_curve(h.Dl))
    assert np.any(np.diff(c.phi) > 0)          # raw virtual values not monotone
    assert np.all(np.diff(c.phi_bar) <= 1e-15)
    assert gen_matroid_kunit(4, 1, 1e-6).phi_h(np.array([0.75]))[0] == pytest.approx(0.5, abs=1e-5)


def test_kunit_skl_scales_down_with_k():
    vals = [skl_discrete(h.Dh, h.Dl) for h in (gen_matroid_kunit(64, k, 0.2) for k in (1, 2, 4, 8))]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    # per-coordinate divergence of order eps^2 / (n k)
    for k, v in zip((1, 2, 4, 8), vals):
        assert 0.5 < v / (0.2**2 / (64 * k)) < 4


def test_generators_refuse_bad_parameters():
    for call in (lambda: gen_bounded_1H(1, 4, 0.2), lambda: gen_bounded_1H(4, 1, 0.2),
                 lambda: gen_bounded_1H(4, 4, 0.6), lambda: gen_regular(1, 0.2),
                 lambda: gen_matroid_kunit(3, 2, 0.2), lambda: gen_matroid_kunit(8, 1, 0.5),
                 lambda: gen_mhr_discrete(8), lambda: gen_mhr_discrete(8, eps=0.1, eps0=0.1)):
        with pytest.raises(ParameterError):
            call()


def test_bounded_family_opt_below_three():
    rng = np.random.default_rng(0)
    for n in (2, 3, 4, 5):
        for H in (4.0, 20.0):
            h = gen_bounded_1H(n, H, 0.2)
            patterns = {"h" * (n - 1), "l" * (n - 1)}
            patterns |= {"".join(rng.choice(["h", "l"], size=n - 1)) for _ in range(3)}
            for pat in patterns:
                assert opt(h.member(pat)) < 3


@pytest.mark.parametrize("fam,kw", [("bounded_1H", dict(n=4, H=4, eps=0.2)),
                                    ("mhr_discrete", dict(n=8, eps0=0.2)),
                                    ("kunit", dict(n=4, k=1, eps=0.2))])
def test_critical_slopes_straddle_v0(fam, kw):
    h = GENERATORS[fam](**kw)
    slope = {}
    for name, d in (("h", h.Dh), ("l", h.Dl)):
        c = iron(revenue_curve(d))
        j = int(np.flatnonzero(c.values == h.v2)[0])
        slope[name] = c.phi_bar[j]
    assert slope["l"] < h.v0 < slope["h"]


def test_curve_csvs():
    out = revenue_curve_csvs(gen_regular(4, 0.2))
    assert set(out) == {"Dh", "Dl"}
    assert out["Dh"].splitlines()[0] == "q,R_raw,R_ironed"
