"""Lower-bound instances: build them, check their conditions, measure divergences.

Run: python3 demos/04_hard_instances.py
"""
import math

from demyerson import gen_bounded_1H, gen_matroid_kunit, gen_mhr_continuous, gen_mhr_discrete, gen_regular, validate
from demyerson.hardgen import bounded_1H_skl, gen_single_mhr_two_point
from demyerson.info import sample_lb

instances = [gen_bounded_1H(4, 4, 0.2), gen_regular(4, 0.2), gen_mhr_discrete(8, eps0=0.2),
             gen_mhr_continuous(10, eps0=0.004), gen_matroid_kunit(8, 2, 0.2)]
for h in instances:
    r = validate(h)
    status = "ok" if r.passed else "FAILED " + ",".join(r.failed())
    print(f"{h.family:>15}: {status:<6} p={h.p:.4g}  Delta={h.delta:.4g}  "
          f"SKL={r.skl:.3e} <= bound {r.skl_bound:.3e}")
    print(f"{'':>17}{r.checks['i'].detail}")

# The [1, H] pair differs only in two swapped atoms, so its divergence has a
# closed form, and c0 / SKL sets the scale of samples needed to tell them apart.
print()
for H in (4, 16, 64):
    s = bounded_1H_skl(4, H, 0.1)
    print(f"[1,{H}] n=4 eps=0.1: SKL = {s:.3e}, samples needed ~ {sample_lb(s):,.0f} "
          f"(nH/(8 eps^2) = {4 * H / (8 * 0.01):,.0f})")

pair = gen_single_mhr_two_point(0.05)
print(f"\ntwo-point pair at eps=0.05: SKL = {pair.skl_closed:.6f} = 8 eps ln((1+4eps)/(1-4eps)) "
      f"= {8 * 0.05 * math.log(1.2 / 0.8):.6f}")
