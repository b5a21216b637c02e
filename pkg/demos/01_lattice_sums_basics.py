"""Exact laws of lattice sums and the shape of the local Gaussian curve.

Builds a few summand laws, convolves them exactly, and compares the point
masses of S_n against the per-point normal term at growing n.  Run directly:

    python3 demos/01_lattice_sums_basics.py
"""

import math

import numpy as np

from llt_lab import bernoulli, maximal_span, moments, sum_law, uniform_range
from llt_lab.approx import delta_n, gaussian_local_term

print("=== summand laws ===")
for name, p in [("fair coin", bernoulli(0.5)), ("die", uniform_range(1, 6))]:
    m = moments(p)
    print(f"{name}: span {maximal_span(p)}, mean {m.mu:.4f}, variance {m.sigma2:.4f}")

print("\n=== exact masses of S_n vs the local Gaussian term (fair coin) ===")
p = bernoulli(0.5)
n = 40
law = sum_law(p, n)
mom = law.meta
print(f"{'k':>4} {'exact P(S_40=k)':>18} {'gaussian term':>16} {'gap':>12}")
for k in range(14, 27, 2):
    g = gaussian_local_term(k, mom.mu, mom.sigma2, 1.0)
    print(f"{k:>4} {law.prob(k):>18.10f} {g:>16.10f} {abs(law.prob(k) - g):>12.2e}")

print("\n=== scaled sup-error shrinks like 1/sqrt(n) ===")
print(f"{'n':>6} {'delta_n':>12} {'sqrt(n)*delta_n':>16}")
for n in (16, 64, 256, 1024):
    d = delta_n(p, n)
    print(f"{n:>6} {d:>12.6f} {math.sqrt(n) * d:>16.6f}")

print("\n=== the same quantity explodes on a mis-declared sub-lattice ===")
from llt_lab import LatticePmf

span2 = LatticePmf(0.0, 1.0, {0: 0.5, 2: 0.5})  # even support, declared span 1
for n in (64, 512, 2048):
    print(f"n={n:>5}: delta_n = {delta_n(span2, n):.4f}  (stays near 0.4)")
