"""Structural characteristics of an integer-valued random variable.

All operations expect the relabeled form (v0 = 0, D = 1); use
``LatticePmf.relabel`` first for a general lattice.  The characteristics are
the unit-shift total variation delta, the adjacent-overlap mass theta, the
nearest-integer quadratic characteristic of a scaled variable, its
symmetrised variant, and the residue-class concentration.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Dict

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import PreconditionError
from .lattice import LatticePmf


def _require_integer_form(p: LatticePmf) -> None:
    if p.v0 != 0.0 or p.D != 1.0:
        raise PreconditionError("characteristic needs the relabeled form (v0=0, D=1)")


def _dense(p: LatticePmf) -> tuple[int, np.ndarray]:
    return p.offset, p.dense


@dataclass(frozen=True)
class CharacteristicsRecord:
    """Bundle of characteristics evaluated on configured d- and h-grids."""

    delta: float
    theta: float
    mukhinD: Dict[float, float]
    H: Dict[float, float]
    nu: Dict[int, float]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["characteristic", "argument", "value"])
            w.writerow(["delta", "", repr(self.delta)])
            w.writerow(["theta", "", repr(self.theta)])
            for d, v in self.mukhinD.items():
                w.writerow(["D", repr(d), repr(v)])
            for d, v in self.H.items():
                w.writerow(["H", repr(d), repr(v)])
            for h, v in self.nu.items():
                w.writerow(["nu", h, repr(v)])


def delta_char(p: LatticePmf) -> float:
    """Unit-shift total variation sum_m |P{X=m} - P{X=m-1}|."""
    _require_integer_form(p)
    _, w = _dense(p)
    padded = np.concatenate(([0.0], w, [0.0]))
    return float(np.abs(np.diff(padded)).sum())


def theta_char(p: LatticePmf) -> float:
    """Adjacent-overlap mass sum_m min(P{X=m}, P{X=m+1}); always < 1."""
    _require_integer_form(p)
    _, w = _dense(p)
    if len(w) == 1:
        return 0.0
    return float(np.minimum(w[:-1], w[1:]).sum())


def symmetrized(p: LatticePmf) -> LatticePmf:
    """Law of X - X' for an independent copy X' (exact self-correlation)."""
    _require_integer_form(p)
    off, w = _dense(p)
    conv = np.convolve(w, w[::-1])
    conv = conv / conv.sum()
    lo = off - (off + len(w) - 1)
    weights = {lo + i: float(m) for i, m in enumerate(conv) if m > 0}
    return LatticePmf(0.0, 1.0, weights)


def _nearest_int_sq(x: np.ndarray) -> np.ndarray:
    frac = x - np.round(x)
    return frac * frac


def mukhin_D(p: LatticePmf, d: float, grid_step: float = 1e-4,
             refine_tol: float = 1e-8) -> float:
    """inf_a E<(X-a)d>^2 with <.> the distance to the nearest integer.

    The objective is periodic in a with period 1/|d| and piecewise quadratic
    with kinks, so one period is scanned on a fixed grid and the best cell is
    refined by bounded golden-section search.
    """
    _require_integer_form(p)
    if abs(d) > 0.5 + 1e-15:
        raise PreconditionError("mukhin_D requires |d| <= 1/2")
    if d == 0.0:
        return 0.0
    off, w = _dense(p)
    supp = off + np.flatnonzero(w > 0)
    masses = w[supp - off]
    xd = supp * d

    def objective(a: float) -> float:
        return float(np.dot(masses, _nearest_int_sq(xd - a * d)))

    period = 1.0 / abs(d)
    grid = np.arange(0.0, period, grid_step)
    # one period scanned in a single matrix pass
    vals = _nearest_int_sq(xd[None, :] - np.outer(grid, [d])) @ masses
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)] - (grid_step if i == 0 else 0.0)
    hi = grid[min(i + 1, len(grid) - 1)] + (grid_step if i == len(grid) - 1 else 0.0)
    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                          options={"xatol": refine_tol})
    return float(min(res.fun, vals[i]))


def mukhin_H(p: LatticePmf, d: float) -> float:
    """E<X* d>^2 over the exact symmetrisation X* of X."""
    _require_integer_form(p)
    if abs(d) > 0.5 + 1e-15:
        raise PreconditionError("mukhin_H requires |d| <= 1/2")
    ps = symmetrized(p)
    off, w = _dense(ps)
    supp = off + np.flatnonzero(w > 0)
    masses = w[supp - off]
    return float(np.dot(masses, _nearest_int_sq(supp * d)))


def nu_char(p: LatticePmf, h: int) -> float:
    """min_j P{X != j (mod h)} -- residue-class spread, 0 for a point mass."""
    _require_integer_form(p)
    if h < 2:
        raise PreconditionError("nu_char requires h >= 2")
    off, w = _dense(p)
    supp = off + np.flatnonzero(w > 0)
    masses = w[supp - off]
    res = np.zeros(h)
    np.add.at(res, supp % h, masses)
    return float(1.0 - res.max())


def characteristics_record(p: LatticePmf, d_grid=(0.5, 0.25, 0.125),
                           h_grid=(2, 3, 4, 5)) -> CharacteristicsRecord:
    return CharacteristicsRecord(
        delta=delta_char(p),
        theta=theta_char(p),
        mukhinD={d: mukhin_D(p, d) for d in d_grid},
        H={d: mukhin_H(p, d) for d in d_grid},
        nu={h: nu_char(p, h) for h in h_grid},
    )


def mukhin_hn_ratio(pmfs: list[LatticePmf], delta_n: float) -> float:
    """Measured ratio Delta_n / (L_n B_n / H_n) for a sum of centered summands.

    Diagnostic only: the inequality this ratio probes is stated without proof
    and with an unclear normalisation, so nothing is asserted about it.
    """
    b2 = 0.0
    l3 = 0.0
    hn_terms = []
    for p in pmfs:
        _require_integer_form(p)
        off, w = _dense(p)
        supp = off + np.flatnonzero(w > 0)
        masses = w[supp - off]
        mu = float(np.dot(masses, supp))
        b2 += float(np.dot(masses, (supp - mu) ** 2))
        l3 += float(np.dot(masses, np.abs(supp - mu) ** 3))
        hn_terms.append(p)
    bn = math.sqrt(b2)
    ln = l3 / bn ** 3
    d_grid = np.linspace(0.25, 0.5, 41)
    hn = min(sum(mukhin_H(p, d) for p in hn_terms) for d in d_grid)
    if hn == 0:
        return math.inf
    return delta_n / (ln * bn / hn)
