"""Almost sure local estimators: one path each, plus their exact expectations.

Log-averaged hit counters along a single simulated trajectory converge to
local density values.  Convergence is logarithmic, so single paths wander;
the expectation mode replaces indicators by exact probabilities and shows
the deterministic part cleanly.
"""

import math

import numpy as np

from llt_lab import bernoulli, lazy_walk
from llt_lab.asllt import (
    TwoStateChain,
    asllt_dickman_path,
    asllt_expectation,
    asllt_path,
    asllt_target,
    chung_erdos_expectation,
    chung_erdos_path,
    dickman_rho,
    hit_mass_sequence,
    markov_asllt_expectation,
    markov_asllt_path,
)

N = 100_000
p = bernoulli(0.5)
rho = dickman_rho(u_max=4.0)
chain = TwoStateChain(0.4, 0.5)
lazy = lazy_walk()
masses = hit_mass_sequence(lazy, 0, N)

print("=== single-path traces (seed 0), dyadic checkpoints ===")
paths = {
    "iid coin, center": asllt_path(p, 0.0, N, 0),
    "dickman x=1": asllt_dickman_path(N, 0, rho),
    "mass-normalised level 0": chung_erdos_path(lazy, 0, N, 0, masses=masses),
    "two-state chain": markov_asllt_path(chain, 0.0, N, 0),
}
for name, pe in paths.items():
    tail = ", ".join(f"{n}:{v:.3f}" for n, v in pe.checkpoints[-4:])
    print(f"{name:>24}: target {pe.target:.4f}; trace ... {tail}")

print("\n=== expectation mode at N = 10^4 ===")
e = asllt_expectation(p, 0.0, 10_000)
print(f"iid coin:   {e:.5f} vs target {asllt_target(p, 0.0):.5f}")
m = markov_asllt_expectation(chain, 0.0, 10_000)
print(f"chain:      {m:.5f} vs target {1 / math.sqrt(2 * math.pi):.5f}")
for n in (100, 1000, 10_000):
    ce = chung_erdos_expectation(lazy, 0, n, masses=masses[:n])
    print(f"mass-normalised, N={n:>6}: {ce:.4f} -> 1")

print("\n=== spread of 20 seeds at three horizons (iid coin) ===")
vals = {n: [] for n in (1000, 10_000, 100_000)}
for s in range(20):
    pe = asllt_path(p, 0.0, N, s)
    for n in vals:
        vals[n].append(pe.value_at(n))
for n, v in vals.items():
    arr = np.array(v)
    print(f"N={n:>7}: median {np.median(arr):.4f}, IQR {np.percentile(arr, 75) - np.percentile(arr, 25):.4f}"
          f"  (target {paths['iid coin, center'].target:.4f})")
