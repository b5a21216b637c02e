"""Seeded generators of random lattice pmfs for randomized checks."""

from __future__ import annotations

import numpy as np

from .lattice import LatticePmf, char_fn, maximal_span, moments
from .rng import stream


def random_pmf(rng: np.random.Generator, max_atoms: int = 8, span: int = 1,
               window: int = 12) -> LatticePmf:
    """Random integer-lattice pmf with a few Dirichlet-weighted atoms."""
    k = int(rng.integers(2, max_atoms + 1))
    positions = rng.choice(np.arange(0, window) * span, size=k, replace=False)
    w = rng.dirichlet(np.ones(k))
    weights = {int(pos): float(m) for pos, m in zip(positions, w) if m > 0}
    total = sum(weights.values())
    weights = {p: m / total for p, m in weights.items()}
    return LatticePmf(0.0, 1.0, weights)


def random_adjacent_pmf(rng: np.random.Generator, max_atoms: int = 8) -> LatticePmf:
    """Random pmf guaranteed to carry mass on two adjacent integers."""
    while True:
        p = random_pmf(rng, max_atoms=max_atoms)
        w = p.dense
        if np.minimum(w[:-1], w[1:]).sum() > 1e-3:
            return p


def mixing_span1_pmf(rng: np.random.Generator, h_max: int = 5,
                     min_sigma: float = 0.5, cf_cap: float = 0.97) -> LatticePmf:
    """Span-1 pmf whose residue characteristic functions are uniformly mixing.

    Rejection-sampled so that max over h <= h_max, 0<r<h of |cf(2 pi r/h)| is
    below ``cf_cap`` and the standard deviation is at least ``min_sigma``;
    such laws show textbook local limit behaviour at desk-scale n.
    """
    while True:
        size = int(rng.integers(3, 7))
        start = int(rng.integers(0, 3))
        w = rng.dirichlet(np.ones(size)) * 0.7 + 0.3 / size
        w = w / w.sum()
        weights = {start + i: float(m) for i, m in enumerate(w)}
        p = LatticePmf(0.0, 1.0, weights)
        if maximal_span(p) != 1.0:
            continue
        mom = moments(p)
        if mom.sigma2 < min_sigma ** 2:
            continue
        ts = [2.0 * np.pi * r / h for h in range(2, h_max + 1) for r in range(1, h)]
        if max(abs(char_fn(p, t)) for t in ts) > cf_cap:
            continue
        return p


def seeded(seed: int) -> np.random.Generator:
    return stream(seed)
