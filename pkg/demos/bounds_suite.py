"""Randomized check of the cross-section ratio inequalities.

Draws seeded random clusters and counts violations of every inequality
checked by :func:`clusterflux.check_bounds` and
:func:`clusterflux.removal_contribution`. The removal bounds in their stated
form are violated. The Cauchy-Schwarz form (``removal_sharp``) never is.

Run with ``python3 demos/bounds_suite.py [trials] [seed]``.
"""
import sys

from clusterflux import bounds_suite

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 200
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 42
suite = bounds_suite(trials, seed=seed)
print(f"{trials} random clusters, seed {seed}")
for key, count in suite["violations"].items():
    print(f"  {key:<24} {count}")
print("identical-pattern families (equality cases):")
for case in suite["identical_pattern_cases"]:
    print(f"  N={case['N']}: R_c = {case['R_c']:.6f}  equality R_max {case['equality_rmax']}"
          f"  all {case['equality_all']}  R_c {case['equality_rc']}")
