"""The classical binomial local approximation with an explicit remainder.

Shows the exact binomial mass written as gaussian * e^E with |E| inside the
explicit bound, the factorial sandwich behind it, and how the skewness
correction buys an extra 1/sqrt(n) of accuracy.
"""

import math

from llt_lab import bernoulli, moments
from llt_lab.approx import (
    demoivre_bound,
    edgeworth3_sup_error,
    stirling_epsilon,
)

print("=== explicit remainder around the mean, n = 100, p = 1/2 ===")
print(f"{'k':>4} {'exact':>12} {'gaussian':>12} {'|E|':>10} {'bound':>10}")
for k in (44, 47, 50, 53, 56):
    r = demoivre_bound(100, 0.5, k, 0.5)
    print(f"{k:>4} {r.exact:>12.7f} {r.gaussian:>12.7f} {abs(r.E):>10.5f} {r.bound:>10.5f}")

print("\n=== factorial sandwich: 1/(12n+1) < eps_n < 1/(12n) ===")
for n in (2, 5, 10, 50):
    eps = stirling_epsilon(n)
    print(f"n={n:>3}: {1 / (12 * n + 1):.6f} < {eps:.6f} < {1 / (12 * n):.6f}")

print("\n=== one skewness term upgrades the rate (p = 0.3) ===")
p = bernoulli(0.3)
sigma = math.sqrt(moments(p).sigma2)
print(f"{'n':>6} {'sqrt(n)-scaled, no corr.':>26} {'n-scaled, with corr.':>22}")
n = 64
while n <= 1024:
    bn = sigma * math.sqrt(n)
    plain = math.sqrt(n) * bn * edgeworth3_sup_error(p, n, with_correction=False)
    corr = n * bn * edgeworth3_sup_error(p, n, with_correction=True)
    print(f"{n:>6} {plain:>26.4f} {corr:>22.4f}")
    n *= 2
print("left column approaches a constant; right column stays bounded")
