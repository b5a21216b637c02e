"""The Dickman function and the weighted Bernoulli model behind it.

Solves u r'(u) + r(u-1) = 0 on a delay-aligned grid, checks the analytic
branch and the integral constant, then watches n P(T_n = n) for the model
T_n = sum k Z_k, Z_k ~ Bernoulli(1/k), converge to e^{-gamma}.
"""

import math

import numpy as np

from llt_lab.asllt import dickman_llt_check, dickman_rho, dickman_strong_llt

rho = dickman_rho(u_max=20.0)
print("=== solution values ===")
for u in (0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0):
    note = ""
    if 1.0 <= u <= 2.0:
        note = f"  (analytic 1 - ln u = {1 - math.log(u):.9f})"
    print(f"rho({u:>4}) = {float(rho(u)):.9f}{note}")
print(f"integral over [0, 20]: {rho.integral():.7f}  vs e^gamma = "
      f"{math.exp(float(np.euler_gamma)):.7f}")

print("\n=== pointwise limit n P(T_n = n) -> e^{-gamma} ===")
target = math.exp(-float(np.euler_gamma))
print(f"target {target:.7f}")
for n in (50, 250, 1000, 2000):
    rep = dickman_llt_check(n, 1.0, rho)
    print(f"n={n:>5}: n P(T_n=n) = {rep.exact:.7f}   gap {rep.error:.2e}")

print("\n=== summed deviation from the discretised limit density ===")
for n in (100, 400, 1600):
    print(f"n={n:>5}: sum_k |P(T_n=k) - e^-gamma rho(k/n)/n| = "
          f"{dickman_strong_llt(n, rho):.5f}")
