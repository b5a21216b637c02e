"""Exact brute-force engine for laws of partial sums.

Everything here is a plain dense-array computation: n-fold convolutions by
repeated squaring, dynamic programming for weighted Bernoulli sums, joint
laws via independent increments, and exact sup-distances between a lattice
CDF and a reference curve.  Probabilities are floats; the only approximation
is float rounding (tracked at the 1e-12 * n scale) and an explicit underflow
floor whose dropped mass is reported, never hidden.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import ndtr

from .errors import DegenerateLawError, PreconditionError, ResourceLimitError
from .lattice import (
    MAX_WINDOW,
    UNDERFLOW_FLOOR,
    LatticePmf,
    MomentSummary,
    moments,
)

#: supports at or below this length convolve directly; larger ones use FFT
DIRECT_CONV_LIMIT = 4096


@dataclass(frozen=True)
class SumLawTable:
    """Exact pmf of a partial sum S_n on the lattice n*v0 + D*Z.

    ``offset`` is the smallest stored index, ``probs`` the dense mass vector.
    ``lost_mass`` accumulates underflow drops; ``beyond_mass`` is the mass
    pushed past an explicit support cap (only possible for laws on
    nonnegative indices, where it can never flow back into the window).
    """

    n: int
    v0: float
    D: float
    offset: int
    probs: np.ndarray
    meta: MomentSummary
    lost_mass: float = 0.0
    beyond_mass: float = 0.0

    @property
    def support(self) -> np.ndarray:
        return self.offset + np.flatnonzero(self.probs > 0)

    def points(self, indices=None) -> np.ndarray:
        k = self.support if indices is None else np.asarray(indices)
        return self.n * self.v0 + self.D * k

    def prob(self, index: int) -> float:
        """Mass at lattice index (0 outside the window)."""
        i = index - self.offset
        if 0 <= i < len(self.probs):
            return float(self.probs[i])
        return 0.0

    def total_mass(self) -> float:
        return float(self.probs.sum())

    def to_csv(self, path) -> None:
        """Rows (k, value_point, mass) over the stored window."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "value_point", "mass"])
            for i, mass in enumerate(self.probs):
                if mass > 0:
                    k = self.offset + i
                    writer.writerow([k, repr(self.n * self.v0 + self.D * k), repr(float(mass))])


def _convolve(a: np.ndarray, b: np.ndarray, method: str = "auto") -> np.ndarray:
    if method == "direct" or (method == "auto" and min(len(a), len(b)) <= 8):
        return np.convolve(a, b)
    if method == "auto" and max(len(a), len(b)) <= DIRECT_CONV_LIMIT:
        return np.convolve(a, b)
    out = fftconvolve(a, b)
    return np.maximum(out, 0.0)


def _floor_small(arr: np.ndarray) -> tuple[np.ndarray, float]:
    small = (arr > 0) & (arr < UNDERFLOW_FLOOR)
    if not small.any():
        return arr, 0.0
    lost = float(arr[small].sum())
    arr = arr.copy()
    arr[small] = 0.0
    return arr, lost


def sum_law(p: LatticePmf, n: int, max_index: Optional[int] = None,
            method: str = "auto") -> SumLawTable:
    """Exact law of S_n = X_1 + ... + X_n for i.i.d. X_j ~ p.

    Uses repeated squaring of convolutions.  ``max_index`` caps the stored
    index window; it is only allowed for laws supported on nonnegative
    indices, where overflow mass can never re-enter the window, so stored
    values stay exact.  ``method`` is "auto", "direct" or "fft".
    """
    if n < 1:
        raise PreconditionError("sum_law requires n >= 1")
    if max_index is not None and p.offset < 0:
        raise PreconditionError("support cap requires nonnegative support indices")

    def cap(arr: np.ndarray, off: int) -> tuple[np.ndarray, int, float]:
        if max_index is None:
            return arr, off, 0.0
        hi = max_index - off + 1
        if hi >= len(arr):
            return arr, off, 0.0
        if hi <= 0:
            raise PreconditionError("support cap below the smallest reachable index")
        overflow = float(arr[hi:].sum())
        return arr[:hi], off, overflow

    base = p.dense
    base_off = p.offset
    acc = None
    acc_off = 0
    lost = 0.0
    m = n
    while m > 0:
        if m & 1:
            if acc is None:
                acc, acc_off = base.copy(), base_off
            else:
                acc = _convolve(acc, base, method)
                acc_off += base_off
                acc, lost_i = _floor_small(acc)
                lost += lost_i
                acc, acc_off, _ = cap(acc, acc_off)
        m >>= 1
        if m > 0:
            if len(base) * 2 > MAX_WINDOW:
                raise ResourceLimitError("convolution window exceeds memory budget")
            base = _convolve(base, base, method)
            base_off *= 2
            base, lost_b = _floor_small(base)
            lost += lost_b
            base, base_off, _ = cap(base, base_off)
    # window masses are exact under a cap, so the pushed-out mass is the
    # conservation deficit (intermediate caps do not track descendants)
    beyond = max(0.0, 1.0 - float(acc.sum()) - lost) if max_index is not None else 0.0
    mom = moments(p)
    meta = MomentSummary(
        mu=None if mom.mu is None else n * mom.mu,
        sigma2=None if mom.sigma2 is None else n * mom.sigma2,
        mu3=None if mom.mu3 is None else n * mom.mu3,
    )
    return SumLawTable(n=n, v0=p.v0, D=p.D, offset=acc_off, probs=acc,
                       meta=meta, lost_mass=lost, beyond_mass=beyond)


def convolve_tables(a: SumLawTable, b: SumLawTable, method: str = "auto") -> SumLawTable:
    """Law of the independent sum of two partial sums over the same base lattice."""
    if (a.v0, a.D) != (b.v0, b.D):
        raise PreconditionError("tables must share the base lattice")
    probs = _convolve(a.probs, b.probs, method)
    probs, lost = _floor_small(probs)
    mu = None if a.meta.mu is None or b.meta.mu is None else a.meta.mu + b.meta.mu
    s2 = None if a.meta.sigma2 is None or b.meta.sigma2 is None else a.meta.sigma2 + b.meta.sigma2
    mu3 = None if a.meta.mu3 is None or b.meta.mu3 is None else a.meta.mu3 + b.meta.mu3
    return SumLawTable(n=a.n + b.n, v0=a.v0, D=a.D, offset=a.offset + b.offset,
                       probs=probs, meta=MomentSummary(mu, s2, mu3),
                       lost_mass=a.lost_mass + b.lost_mass + lost,
                       beyond_mass=a.beyond_mass + b.beyond_mass)


def weighted_sum_law(weights: Sequence[int], probs: Sequence[float],
                     max_value: Optional[int] = None) -> SumLawTable:
    """Exact law of sum a_k Z_k with independent Z_k ~ Bernoulli(q_k).

    Dynamic programming over k.  ``max_value`` caps the tracked value range
    (increments are nonnegative, so capped values are exact and the mass that
    moved past the cap is reported as beyond_mass).
    """
    a = [int(x) for x in weights]
    q = [float(x) for x in probs]
    if len(a) != len(q):
        raise PreconditionError("weights and probs must have equal length")
    if any(x < 0 for x in a):
        raise PreconditionError("weights a_k must be nonnegative integers")
    if any(not 0.0 <= x <= 1.0 for x in q):
        raise PreconditionError("probs q_k must lie in [0,1]")
    top = sum(a)
    if max_value is not None:
        top = min(top, max_value)
    if top + 1 > MAX_WINDOW:
        raise ResourceLimitError("value range exceeds memory budget")
    law = np.zeros(top + 1)
    law[0] = 1.0
    hi = 0  # current largest reachable value
    beyond = 0.0
    for ak, qk in zip(a, q):
        if qk == 0.0 or ak == 0:
            if qk > 0 and ak == 0:
                pass  # adds zero, law unchanged
            continue
        new_hi = min(hi + ak, top)
        if ak <= top:
            shifted = np.zeros(new_hi + 1)
            src_hi = min(hi, top - ak)
            shifted[ak:ak + src_hi + 1] = law[: src_hi + 1] * qk
            if hi > src_hi:
                beyond += float(law[src_hi + 1: hi + 1].sum()) * qk
            out = law[: new_hi + 1] * (1.0 - qk)
            out += shifted
            law[: new_hi + 1] = out
            law[new_hi + 1:] = 0.0
        else:
            beyond += float(law[: hi + 1].sum()) * qk
            law[: hi + 1] *= 1.0 - qk
        hi = new_hi
    mu = float(np.dot(a, q))
    s2 = float(sum(ak * ak * qk * (1 - qk) for ak, qk in zip(a, q)))
    mu3 = float(sum(ak ** 3 * qk * (1 - qk) * (1 - 2 * qk) for ak, qk in zip(a, q)))
    return SumLawTable(n=len(a), v0=0.0, D=1.0, offset=0, probs=law[: hi + 1].copy(),
                       meta=MomentSummary(mu, s2, mu3), beyond_mass=beyond)


@dataclass(frozen=True)
class JointCell:
    """Window of the joint law P(S_m = a, S_n = b) for m < n."""

    m: int
    n: int
    a_indices: np.ndarray
    b_indices: np.ndarray
    table: np.ndarray  # shape (len(a_indices), len(b_indices))

    def prob(self, a: int, b: int) -> float:
        ia = np.searchsorted(self.a_indices, a)
        ib = np.searchsorted(self.b_indices, b)
        if ia < len(self.a_indices) and ib < len(self.b_indices) \
                and self.a_indices[ia] == a and self.b_indices[ib] == b:
            return float(self.table[ia, ib])
        return 0.0


def joint_law(p: LatticePmf, m: int, n: int,
              a_window: tuple[int, int] | None = None,
              b_window: tuple[int, int] | None = None) -> JointCell:
    """Exact joint law P(S_m = a, S_n = b) = P(S_m = a) P(S_{n-m} = b - a).

    Windows are inclusive index ranges on the lattice of S_m resp. S_n;
    omitted windows default to the full reachable range.
    """
    if not 1 <= m < n:
        raise PreconditionError("joint_law requires 1 <= m < n")
    law_m = sum_law(p, m)
    law_inc = sum_law(p, n - m)
    a_lo, a_hi = a_window if a_window else (law_m.offset, law_m.offset + len(law_m.probs) - 1)
    b_lo, b_hi = b_window if b_window else (law_m.offset + law_inc.offset,
                                            law_m.offset + len(law_m.probs) - 1
                                            + law_inc.offset + len(law_inc.probs) - 1)
    a_idx = np.arange(a_lo, a_hi + 1)
    b_idx = np.arange(b_lo, b_hi + 1)
    pa = np.array([law_m.prob(int(a)) for a in a_idx])
    table = np.empty((len(a_idx), len(b_idx)))
    for i, a in enumerate(a_idx):
        inc = np.array([law_inc.prob(int(b - a)) for b in b_idx])
        table[i] = pa[i] * inc
    return JointCell(m=m, n=n, a_indices=a_idx, b_indices=b_idx, table=table)


class RunningConvolution:
    """Law of S_n updated one summand at a time, in index space.

    Maintains a dense window trimmed at ``floor``; trimmed mass is tracked in
    ``lost_mass`` (bounded by floor * window * steps, i.e. negligible).  Used
    by estimators that need P(S_n = k) for every n up to a horizon.
    """

    def __init__(self, p: LatticePmf, floor: float = 1e-30):
        self._base = p.dense
        self._base_off = p.offset
        self.floor = floor
        self.n = 0
        self.offset = 0
        self.probs = np.array([1.0])
        self.lost_mass = 0.0

    def step(self) -> None:
        self.probs = np.convolve(self.probs, self._base)
        self.offset += self._base_off
        self.n += 1
        keep = np.flatnonzero(self.probs >= self.floor)
        if len(keep) and (keep[0] > 0 or keep[-1] < len(self.probs) - 1):
            lo, hi = keep[0], keep[-1]
            self.lost_mass += float(self.probs[:lo].sum() + self.probs[hi + 1:].sum())
            self.probs = self.probs[lo:hi + 1].copy()
            self.offset += int(lo)

    def prob(self, index: int) -> float:
        i = index - self.offset
        if 0 <= i < len(self.probs):
            return float(self.probs[i])
        return 0.0


def _lattice_cdf_pairs(law: SumLawTable, center: float, scale: float):
    """Normalised atom positions with CDF values just below and at each atom."""
    supp = law.support
    x = (law.points(supp) - center) / scale
    masses = law.probs[supp - law.offset]
    cdf = np.cumsum(masses)
    below = np.concatenate(([0.0], cdf[:-1]))
    return x, below, cdf


def sup_cdf_distance(law: SumLawTable, center: Optional[float] = None,
                     scale: Optional[float] = None,
                     reference: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> float:
    """sup_x |P{(S_n - center)/scale < x} - G(x)| for a continuous reference G.

    The lattice CDF is left-continuous with jumps at the atoms, so the
    supremum is attained at a jump approached from either side; both sides
    are evaluated and the max taken.  Defaults: center/scale from the table
    moments, reference the standard normal CDF.
    """
    if center is None:
        center = law.meta.mu
    if scale is None:
        if law.meta.sigma2 is None or law.meta.sigma2 <= 0:
            raise DegenerateLawError("sup_cdf_distance needs a nondegenerate law")
        scale = math.sqrt(law.meta.sigma2)
    if not scale > 0:
        raise DegenerateLawError("scale must be positive")
    G = reference if reference is not None else ndtr
    x, below, at = _lattice_cdf_pairs(law, center, scale)
    g = np.asarray(G(x), dtype=np.float64)
    return float(np.max(np.maximum(np.abs(below - g), np.abs(at - g))))


def lattice_cdf_sup_distance(a: SumLawTable, b: SumLawTable) -> float:
    """sup_x |F_a(x) - F_b(x)| for two lattice laws on the same value scale."""
    xa = a.points(a.support)
    xb = b.points(b.support)
    grid = np.union1d(xa, xb)
    ca = np.cumsum(a.probs[a.support - a.offset])
    cb = np.cumsum(b.probs[b.support - b.offset])
    fa = np.concatenate(([0.0], ca))[np.searchsorted(xa, grid, side="right")]
    fb = np.concatenate(([0.0], cb))[np.searchsorted(xb, grid, side="right")]
    return float(np.max(np.abs(fa - fb)))


def residues_mod(law: SumLawTable, h: int) -> np.ndarray:
    """Distribution of S_n mod h; requires the lattice to be integral."""
    if h < 2:
        raise PreconditionError("residue modulus must be >= 2")
    v0n = law.n * law.v0
    if abs(v0n - round(v0n)) > 1e-9 or abs(law.D - round(law.D)) > 1e-9:
        raise PreconditionError("residues need an integer-valued lattice")
    out = np.zeros(h)
    supp = law.support
    vals = (round(v0n) + int(round(law.D)) * supp) % h
    np.add.at(out, vals, law.probs[supp - law.offset])
    return out
