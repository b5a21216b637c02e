"""The web of structural characteristics of an integer-valued law.

delta (unit-shift variation), theta (adjacent overlap), the quadratic
nearest-integer characteristics and the residue spread, with their
interlocking inequalities evaluated on concrete laws.
"""

import math

import numpy as np

from llt_lab import bernoulli, char_fn, moments, uniform_range
from llt_lab.characteristics import (
    delta_char,
    mukhin_D,
    mukhin_H,
    nu_char,
    theta_char,
)
from llt_lab.gen import random_pmf, seeded

print("=== characteristics of simple laws ===")
rows = [("fair coin", bernoulli(0.5)), ("uniform 0..5", uniform_range(0, 5))]
print(f"{'law':>14} {'delta':>8} {'theta':>8} {'D(.,1/2)':>10} {'H(.,1/2)':>10} {'nu(.,2)':>8}")
for name, p in rows:
    print(f"{name:>14} {delta_char(p):>8.4f} {theta_char(p):>8.4f} "
          f"{mukhin_D(p, 0.5):>10.5f} {mukhin_H(p, 0.5):>10.5f} {nu_char(p, 2):>8.4f}")

print("\n=== identity delta = 2(1 - theta) on random laws ===")
rng = seeded(2)
worst = 0.0
for _ in range(200):
    p = random_pmf(rng)
    worst = max(worst, abs(delta_char(p) - 2 * (1 - theta_char(p))))
print(f"max gap over 200 random pmfs: {worst:.2e}")

print("\n=== inequality chain at one random law ===")
p = random_pmf(seeded(9))
th = theta_char(p)
print(f"variance {moments(p).sigma2:.4f} >= theta/4 = {th / 4:.4f}")
for h in (2, 3, 5):
    nu = nu_char(p, h)
    Dh = mukhin_D(p, 1 / h)
    print(f"h={h}: nu/(2h^3) = {nu / (2 * h**3):.6f} <= D(X,1/h) = {Dh:.6f}"
          f" <= nu/4 = {nu / 4:.6f}")

print("\n=== characteristic function bounds ===")
for t in np.linspace(0.5, math.pi, 4):
    mod = abs(char_fn(p, float(t)))
    H = mukhin_H(p, float(t) / (2 * math.pi))
    print(f"t={t:.3f}: 1 - 2pi^2 H = {1 - 2 * math.pi**2 * H:+.4f} <= |cf| = {mod:.4f}"
          f" <= 1 - 4H = {1 - 4 * H:.4f}")
