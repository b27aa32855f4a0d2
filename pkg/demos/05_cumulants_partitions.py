"""Noncrossing partitions, free cumulants, and two classical moment laws.

Free cumulants linearize free convolution the way classical cumulants
linearize classical convolution, and the change of basis runs over
noncrossing partitions. Two sanity anchors: the semicircle law has a
single nonzero cumulant, and the free Poisson law has all cumulants one.
"""

import numpy as np

from freedilation import (
    free_cumulants,
    moments_from_cumulants,
    noncrossing_partitions,
)

print("noncrossing partition counts (Catalan numbers):")
for k in range(1, 9):
    print(f"  |NC({k})| = {len(noncrossing_partitions(k))}")
print()

print("the five partitions of {1,2,3,4} with a crossing are exactly the")
print("set partitions missing from NC(4): 14 of 15 survive")
print()

# semicircle: moments 0, 1, 0, 2, 0, 5 (aerated Catalans) <-> kappa = e_2
semi = [0, 1, 0, 2, 0, 5, 0, 14]
kappas = free_cumulants(semi)
print("semicircle moments ", semi)
print("free cumulants     ", [round(k.real, 10) for k in kappas])
print()

# free Poisson with rate 1: all cumulants 1 <-> moments are Catalan numbers
kappas = [1.0] * 8
moments = moments_from_cumulants(kappas)
print("all-ones cumulants ->", [round(m.real, 10) for m in moments])
print("(the Catalan numbers again: the free Poisson law at rate 1)")
print()

rng = np.random.default_rng(0)
moments = list(rng.uniform(-1, 1, 8) * np.exp(2j * np.pi * rng.uniform(size=8)))
back = moments_from_cumulants(free_cumulants(moments))
print("random moment sequence round trip error:",
      f"{max(abs(a - b) for a, b in zip(moments, back)):.3e}")
