"""Poisson approximation: disparity metrics, couplings and explicit bounds."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError
from .exact import SumLawTable, weighted_sum_law
from .lattice import LatticePmf

#: Poisson tails are truncated where the remaining mass drops below this
POISSON_TAIL = 1e-14
POISSON_K_CAP = 200


def poisson_pmf(lam: float, k_max: int | None = None) -> np.ndarray:
    """Poisson masses 0..K with tail below POISSON_TAIL (K capped at 200)."""
    if lam < 0:
        raise PreconditionError("Poisson mean must be nonnegative")
    out = [math.exp(-lam)]
    total = out[0]
    k = 0
    while (1.0 - total > POISSON_TAIL or (k_max is not None and k < k_max)) \
            and k < POISSON_K_CAP:
        k += 1
        out.append(out[-1] * lam / k)
        total += out[-1]
    return np.array(out)


def _as_array(law) -> np.ndarray:
    """Coerce a law on nonnegative integers to a dense mass vector from 0."""
    if isinstance(law, SumLawTable):
        if law.offset < 0:
            raise PreconditionError("law must live on nonnegative integers")
        out = np.zeros(law.offset + len(law.probs))
        out[law.offset:] = law.probs
        return out
    if isinstance(law, LatticePmf):
        if law.offset < 0 or law.v0 != 0.0 or law.D != 1.0:
            raise PreconditionError("law must live on nonnegative integers")
        out = np.zeros(law.offset + len(law.dense))
        out[law.offset:] = law.dense
        return out
    arr = np.asarray(law, dtype=np.float64)
    if arr.ndim != 1 or np.any(arr < -1e-15):
        raise PreconditionError("law must be a 1-d nonnegative mass vector")
    return arr


def _aligned(law_a, law_b) -> tuple[np.ndarray, np.ndarray]:
    a = _as_array(law_a)
    b = _as_array(law_b)
    n = max(len(a), len(b))
    return (np.pad(a, (0, n - len(a))), np.pad(b, (0, n - len(b))))


def tv_distance(law_a, law_b) -> float:
    """Half-sum disparity (1/2) sum_k |P{X=k} - P{Y=k}|."""
    a, b = _aligned(law_a, law_b)
    return 0.5 * float(np.abs(a - b).sum())


def d0_distance(law_a, law_b) -> float:
    """Pointwise disparity sup_k |P{X=k} - P{Y=k}|."""
    a, b = _aligned(law_a, law_b)
    return float(np.abs(a - b).max())


def cdf_sup_distance(law_a, law_b) -> float:
    """CDF-sup disparity sup_u |P{X<=u} - P{Y<=u}| on the integers."""
    a, b = _aligned(law_a, law_b)
    return float(np.abs(np.cumsum(a) - np.cumsum(b)).max())


def set_sup_distance(law_a, law_b, window: int) -> float:
    """sup_A |P{X in A} - P{Y in A}| over all subsets of 0..window-1.

    Brute-force enumeration; only sensible for small windows.  Mass beyond
    the window is treated as one extra point that may join A.
    """
    a, b = _aligned(law_a, law_b)
    if window > 20:
        raise PreconditionError("subset enumeration window capped at 20")
    if len(a) < window:
        a = np.pad(a, (0, window - len(a)))
        b = np.pad(b, (0, window - len(b)))
    head_a = list(a[:window]) + [max(0.0, 1.0 - a[:window].sum())]
    head_b = list(b[:window]) + [max(0.0, 1.0 - b[:window].sum())]
    worst = 0.0
    for mask in range(1 << (window + 1)):
        pa = sum(head_a[i] for i in range(window + 1) if mask >> i & 1)
        pb = sum(head_b[i] for i in range(window + 1) if mask >> i & 1)
        worst = max(worst, abs(pa - pb))
    return worst


def poisson_binomial_law(ps: Sequence[float]) -> SumLawTable:
    """Exact law of a sum of independent Bernoulli(p_i)."""
    return weighted_sum_law([1] * len(ps), list(ps))


def lecam_bound(ps: Sequence[float]) -> float:
    """Full-sum bound 2 sum p_i^2 for the Poisson approximation of a Bernoulli sum."""
    ps = [float(p) for p in ps]
    if any(not 0.0 < p < 1.0 for p in ps):
        raise PreconditionError("success probabilities must lie in (0,1)")
    return 2.0 * sum(p * p for p in ps)


def lecam_full_sum(ps: Sequence[float]) -> float:
    """Exact sum_k |P{S_n=k} - e^{-lam} lam^k/k!| with lam = sum p_i."""
    law = poisson_binomial_law(ps)
    lam = float(np.sum(ps))
    pois = poisson_pmf(lam, k_max=len(law.probs) - 1)
    return 2.0 * tv_distance(law, pois)


@dataclass(frozen=True)
class CouplingTable:
    """Per-index joint masses of the Bernoulli/Poisson maximal coupling.

    Row i carries (p_i, P{X=Y=1}, P{X=1,Y=0}, P{X=Y=0}, P{X=0,Y=y} for y>=2).
    """

    ps: tuple
    rows: tuple  # tuples (both_one, x_only, both_zero, y_tail_masses)

    def row_sum(self, i: int) -> float:
        both_one, x_only, both_zero, tail = self.rows[i]
        return both_one + x_only + both_zero + float(np.sum(tail))

    def lam(self) -> float:
        return float(np.sum(self.ps))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "p", "both_one", "x_one_y_zero", "both_zero", "y_tail_total"])
            for i, (b1, xo, b0, tail) in enumerate(self.rows):
                w.writerow([i, repr(self.ps[i]), repr(b1), repr(xo), repr(b0),
                            repr(float(np.sum(tail)))])


def coupling(ps: Sequence[float]) -> CouplingTable:
    """Maximal coupling of Bernoulli(p_i) with Poisson(p_i) margins.

    Feasibility is the exact row condition P{X=Y=0} >= 0 (it holds whenever
    p_i <= 0.8); an infeasible row raises and names its index.
    """
    rows = []
    for i, p in enumerate(ps):
        if not 0.0 < p < 1.0:
            raise PreconditionError(f"row {i}: p must lie in (0,1)")
        e = math.exp(-p)
        both_one = p * e
        x_only = p * (1.0 - e)
        both_zero = e - p * (1.0 - e)
        if both_zero < 0:
            raise PreconditionError(
                f"row {i}: infeasible p={p}: P(X=Y=0)={both_zero} < 0")
        tail = poisson_pmf(p)[2:]
        rows.append((both_one, x_only, both_zero, tail))
    return CouplingTable(ps=tuple(float(p) for p in ps), rows=tuple(rows))


def franken_bound(laws: Sequence) -> float:
    """(2/pi) sum_i (E X_i^2 + E X_i (X_i - 1)) for nonnegative integer laws."""
    total = 0.0
    for law in laws:
        arr = _as_array(law)
        k = np.arange(len(arr), dtype=np.float64)
        ex2 = float(np.dot(arr, k * k))
        exx = float(np.dot(arr, k * (k - 1.0)))
        total += ex2 + exx
    return (2.0 / math.pi) * total


def convolve_laws(laws: Sequence) -> np.ndarray:
    """Exact law of the independent sum of laws on nonnegative integers."""
    out = np.array([1.0])
    for law in laws:
        out = np.convolve(out, _as_array(law))
    return out


def gap_table_csv(path, law, lam: float) -> None:
    """CSV of (k, exactMass, poissonMass, absGap) against Poisson(lam)."""
    arr = _as_array(law)
    pois = poisson_pmf(lam, k_max=len(arr) - 1)
    a, b = _aligned(arr, pois)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "exactMass", "poissonMass", "absGap"])
        for k in range(len(a)):
            w.writerow([k, repr(float(a[k])), repr(float(b[k])), repr(abs(float(a[k] - b[k])))])
