"""Dominated empirical Myerson: learning revenue-optimal auctions from samples.

Submodules: ``dist`` (value laws), ``curve`` (revenue curves and ironing),
``mech`` (Myerson mechanisms), ``learn`` (shading and the dominated learner),
``evaluation`` (revenue and Opt), ``xform`` (truncations), ``info`` (KL tools),
``hardgen`` (lower-bound instances), ``experiments`` and ``cli``.
"""
from .curve import RevenueCurve, iron, ironed_virtual_values, is_mhr, is_regular, revenue_curve, virtual_values
from .dist import (ContinuousMhrLB, DiscreteDist, Exponential, HeavyTailRegular, ProductDist, RegularLB,
                   discretize, dominates, point_mass, quantile, sample, uniform_discrete, value_at)
from .evaluation import opt, rev_exact, rev_mc, single_bidder_opt_bruteforce
from .hardgen import (gen_bounded_01, gen_bounded_1H, gen_matroid_kunit, gen_mhr_continuous,
                      gen_mhr_discrete, gen_regular, gen_single_mhr_two_point, validate)
from .info import distinguish, dptrick_bound, sample_lb, skl_discrete, skl_numeric
from .learn import (ShadeParams, dominated_empirical_myerson, empirical, empirical_price, guarded_price,
                    shade_d, shade_dist, shade_s)
from .mech import KUnit, Matroid, Mechanism, PartitionMatroid, SingleItem, build_myerson, run
from .xform import surrogate, t_max_quantile, t_max_value, t_min

__version__ = "0.1.0"
