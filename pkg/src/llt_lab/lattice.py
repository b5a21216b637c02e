"""Lattice-valued probability mass functions.

A lattice pmf lives on the point set {v0 + k*D : k in Z} and is stored as a
sparse mapping from the integer index k to its mass, together with a dense
window view used by the convolution engine.  All values are plain floats;
objects are treated as immutable after construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np
from scipy.special import zeta

from .errors import DegenerateLawError, ResourceLimitError, UnsupportedParameterError

MASS_TOL = 1e-12

#: masses below this floor are dropped by the exact engine and accumulated
#: into a lost-mass diagnostic
UNDERFLOW_FLOOR = 1e-300

#: dense windows larger than this raise ResourceLimitError
MAX_WINDOW = 1 << 26


@dataclass(frozen=True)
class MomentSummary:
    """Mean / variance / third central moment of a lattice law.

    ``sigma2`` and ``mu3`` are ``None`` when the (untruncated) analytic family
    has no such moment; see :func:`moments`.
    """

    mu: Optional[float]
    sigma2: Optional[float]
    mu3: Optional[float] = None


@dataclass(frozen=True)
class LatticePmf:
    """Probability mass function on the lattice v0 + D*Z.

    weights maps the integer index k to the mass at point v0 + k*D.  For
    analytically defined infinite families (power tail), ``family`` holds the
    descriptor including the truncation index and the discarded tail mass;
    the stored weights are renormalised to total mass one and the deficit is
    recorded, not hidden.
    """

    v0: float
    D: float
    weights: Mapping[int, float]
    family: Optional[dict] = None
    _dense: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not (self.D > 0):
            raise ValueError("span D must be positive")
        if not self.weights:
            raise ValueError("weights must be non-empty")
        keys = np.array(sorted(self.weights), dtype=np.int64)
        vals = np.array([self.weights[int(k)] for k in keys], dtype=np.float64)
        if np.any(vals < -MASS_TOL):
            raise ValueError("weights must be nonnegative")
        vals = np.maximum(vals, 0.0)
        total = vals.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {total!r} not within {MASS_TOL} of 1")
        if not np.any(vals > 0):
            raise ValueError("at least one strictly positive weight required")
        width = int(keys[-1] - keys[0]) + 1
        if width > MAX_WINDOW:
            raise ResourceLimitError(f"dense window of {width} entries exceeds budget")
        dense = np.zeros(width)
        dense[keys - keys[0]] = vals
        object.__setattr__(self, "_dense", (int(keys[0]), dense))

    # -- views ---------------------------------------------------------------

    @property
    def offset(self) -> int:
        """Smallest support index of the dense window."""
        return self._dense[0]

    @property
    def dense(self) -> np.ndarray:
        """Dense mass vector over indices offset .. offset+len-1."""
        return self._dense[1]

    @property
    def support(self) -> np.ndarray:
        """Sorted array of indices carrying positive mass."""
        off, dense = self._dense
        return off + np.flatnonzero(dense > 0)

    def points(self, indices: np.ndarray | None = None) -> np.ndarray:
        """Lattice point values v0 + k*D for the given (or all support) indices."""
        k = self.support if indices is None else np.asarray(indices)
        return self.v0 + self.D * k

    @property
    def discarded_mass(self) -> float:
        return self.family.get("discarded_mass", 0.0) if self.family else 0.0

    def is_degenerate(self) -> bool:
        return len(self.support) == 1

    # -- basic transforms ------------------------------------------------------

    def relabel(self) -> "LatticePmf":
        """Affine relabeling X' = (X - v0)/D onto the integer lattice (v0=0, D=1)."""
        return LatticePmf(0.0, 1.0, dict(self.weights), family=self.family)

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> str:
        """Distribution spec; bit-exact round-trip for the explicit form."""
        if self.family is not None:
            return json.dumps(
                {
                    "family": "power_tail",
                    "alpha": self.family["alpha"],
                    "c": self.family["c"],
                    "truncation_mass": self.family["truncation_mass"],
                }
            )
        pmf = [[int(k), self.weights[int(k)]] for k in sorted(self.weights)]
        return json.dumps({"v0": self.v0, "D": self.D, "pmf": pmf})

    @staticmethod
    def from_json(text: str) -> "LatticePmf":
        obj = json.loads(text)
        if obj.get("family") == "power_tail":
            return power_tail(obj["alpha"], c=obj.get("c", 1.0),
                              tail_mass=obj.get("truncation_mass", 1e-10))
        weights = {int(k): float(m) for k, m in obj["pmf"]}
        return LatticePmf(float(obj["v0"]), float(obj["D"]), weights)


# -- constructors for common laws -----------------------------------------------


def from_weights(v0: float, D: float, weights: Mapping[int, float]) -> LatticePmf:
    return LatticePmf(v0, D, dict(weights))


def bernoulli(p: float) -> LatticePmf:
    if not 0.0 < p < 1.0:
        raise ValueError("bernoulli parameter must lie in (0,1)")
    return LatticePmf(0.0, 1.0, {0: 1.0 - p, 1: p})


def uniform_range(a: int, b: int) -> LatticePmf:
    """Uniform law on the integers a..b inclusive."""
    if b < a:
        raise ValueError("empty range")
    n = b - a + 1
    return LatticePmf(0.0, 1.0, {k: 1.0 / n for k in range(a, b + 1)})


def point_mass(value: float) -> LatticePmf:
    """Unit mass at one point; integer values live on the integer lattice."""
    if float(value).is_integer():
        return LatticePmf(0.0, 1.0, {int(value): 1.0})
    return LatticePmf(value, 1.0, {0: 1.0})


def centered_coin() -> LatticePmf:
    """Fair coin on {-1, +1} (span 2 lattice with offset -1)."""
    return LatticePmf(-1.0, 2.0, {0: 0.5, 1: 0.5})


def lazy_walk() -> LatticePmf:
    """Step law on {-1, 0, 1} with masses 1/4, 1/2, 1/4 (maximal span 1)."""
    return LatticePmf(0.0, 1.0, {-1: 0.25, 0: 0.5, 1: 0.25})


def power_tail(alpha: float, c: float = 1.0, tail_mass: float = 1e-10,
               max_index: Optional[int] = None) -> LatticePmf:
    """Discretised one-sided power-tail law p(j) = c*(j^-a - (j+1)^-a), j >= 1.

    The infinite support is truncated at the smallest J whose discarded tail
    c*(J+1)^-alpha falls below ``tail_mass`` (or at ``max_index`` / the memory
    budget if that is reached first); weights are renormalised to total mass
    one and the discarded mass is recorded on the family descriptor.  For
    c < 1 the deficit at the lattice origin is an atom at j = 0.
    """
    if alpha <= 0:
        raise UnsupportedParameterError("power tail requires alpha > 0")
    if not 0.0 < c <= 1.0:
        raise UnsupportedParameterError("tail constant c must lie in (0, 1]")
    hard_cap = MAX_WINDOW >> 3
    J = math.ceil((c / tail_mass) ** (1.0 / alpha)) if tail_mass > 0 else hard_cap
    if max_index is not None:
        J = min(J, max_index)
    J = min(max(J, 8), hard_cap)
    j = np.arange(1, J + 1, dtype=np.float64)
    w = c * (j ** -alpha - (j + 1) ** -alpha)
    discarded = c * float(J + 1) ** -alpha
    kept = w.sum() + (1.0 - c)
    scale = 1.0 / kept
    weights = {idx: mass * scale for idx, mass in enumerate(w, start=1) if mass > 0}
    if c < 1.0:
        weights[0] = (1.0 - c) * scale
    fam = {
        "alpha": float(alpha),
        "c": float(c),
        "truncation_mass": float(tail_mass),
        "truncation_index": int(J),
        "discarded_mass": float(discarded),
    }
    return LatticePmf(0.0, 1.0, weights, family=fam)


# -- operations -------------------------------------------------------------------


def maximal_span(p: LatticePmf) -> float:
    """Largest D' such that every support point lies on a lattice of span D'.

    Computed as D times the gcd of support-index differences.  A single-point
    support has no well-defined span.
    """
    supp = p.support
    if len(supp) < 2:
        raise DegenerateLawError("degenerate: span undefined")
    diffs = np.diff(supp)
    g = 0
    for d in diffs:
        g = math.gcd(g, int(d))
    return p.D * g


def moments(p: LatticePmf) -> MomentSummary:
    """Exact weighted moments over the stored support.

    For truncated power-tail families the analytic law governs which moments
    exist: mean requires alpha > 1 (returned analytically as c*zeta(alpha)),
    variance alpha > 2, third moment alpha > 3.  Missing ones are None.
    """
    if p.family is not None:
        alpha, c = p.family["alpha"], p.family["c"]
        mu = float(c * zeta(alpha, 1)) if alpha > 1 else None
        if alpha <= 2:
            return MomentSummary(mu=mu, sigma2=None, mu3=None)
        supp = p.support.astype(np.float64)
        w = p.dense[p.support - p.offset]
        x = p.v0 + p.D * supp
        sigma2 = float(np.dot(w, (x - mu) ** 2))
        mu3 = float(np.dot(w, (x - mu) ** 3)) if alpha > 3 else None
        return MomentSummary(mu=mu, sigma2=sigma2, mu3=mu3)
    supp = p.support
    w = p.dense[supp - p.offset]
    x = p.v0 + p.D * supp.astype(np.float64)
    mu = float(np.dot(w, x))
    sigma2 = float(np.dot(w, (x - mu) ** 2))
    mu3 = float(np.dot(w, (x - mu) ** 3))
    return MomentSummary(mu=mu, sigma2=sigma2, mu3=mu3)


def char_fn(p: LatticePmf, t) -> complex | np.ndarray:
    """Characteristic function sum_k f(k) exp(i t (v0 + k D)).

    Vectorised over t; |result| <= 1 and char_fn(p, 0) == 1 exactly.
    """
    t_arr = np.asarray(t, dtype=np.float64)
    supp = p.support
    w = p.dense[supp - p.offset]
    x = p.v0 + p.D * supp.astype(np.float64)
    vals = np.exp(1j * np.outer(t_arr, x)) @ w
    if np.isscalar(t) or t_arr.ndim == 0:
        return complex(vals.reshape(-1)[0])
    return vals
