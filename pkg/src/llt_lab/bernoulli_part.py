"""Fair-coin extraction coupling and the effective-rate local bounds built on it.

A lattice variable X with adjacent-overlap mass theta_X > 0 decomposes as
X = V + eps*D*L where (V, eps) has an explicit joint law, L is an independent
fair coin and eps is Bernoulli(theta).  Summing n copies splits S_n into a
smooth part W_n plus D times a fair-coin binomial with a random number of
tosses, which yields fully explicit upper and lower bounds on P{S_n = kappa}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import binom

from .errors import NoBernoulliComponentError, PreconditionError
from .exact import SumLawTable, sum_law, sup_cdf_distance, weighted_sum_law
from .lattice import LatticePmf, MomentSummary
from .rng import stream

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Decomposition:
    """Joint law of (V, eps) realising X = V + eps*D*L with P(eps=1) = theta."""

    source: LatticePmf
    theta: float
    tau: dict            # k -> tau_k
    joint: dict          # (k, eps) -> mass

    def v_eps_pmf(self) -> LatticePmf:
        """Law of V + (D/2) eps on the half-span lattice (index 2k + eps)."""
        weights: dict[int, float] = {}
        for (k, e), mass in self.joint.items():
            if mass > 0:
                weights[2 * k + e] = weights.get(2 * k + e, 0.0) + mass
        return LatticePmf(self.source.v0, self.source.D / 2.0, weights)

    def reconstructed(self) -> LatticePmf:
        """Exact law of V + eps*D*L; equals the source pmf."""
        weights: dict[int, float] = {}
        for (k, e), mass in self.joint.items():
            if mass <= 0:
                continue
            if e == 0:
                weights[k] = weights.get(k, 0.0) + mass
            else:
                weights[k] = weights.get(k, 0.0) + mass / 2.0
                weights[k + 1] = weights.get(k + 1, 0.0) + mass / 2.0
        return LatticePmf(self.source.v0, self.source.D, weights)

    def to_json(self) -> str:
        tau = [[k, v] for k, v in sorted(self.tau.items()) if v > 0]
        joint = [[k, e, m] for (k, e), m in sorted(self.joint.items()) if m > 0]
        return json.dumps({"theta": self.theta, "tau": tau, "joint": joint})


def theta_max(p: LatticePmf) -> float:
    """Adjacent-overlap mass of p over its own lattice indices."""
    w = p.dense
    if len(w) == 1:
        return 0.0
    return float(np.minimum(w[:-1], w[1:]).sum())


def decompose(p: LatticePmf, theta: Optional[float] = None) -> Decomposition:
    """Extract a fair-coin component of total mass theta (default: maximal).

    tau_k = (theta / theta_X) * min(f(k), f(k+1)); the joint law places mass
    tau_k on (v_k, eps=1) and f(k) - (tau_{k-1}+tau_k)/2 on (v_k, eps=0).
    """
    tmax = theta_max(p)
    if tmax <= 0.0:
        raise NoBernoulliComponentError("no Bernoulli component: theta_X = 0")
    if theta is None:
        theta = tmax
    if not 0.0 < theta <= tmax + 1e-15:
        raise PreconditionError(f"theta must lie in (0, {tmax}]")
    scale = theta / tmax
    off, w = p.offset, p.dense
    tau = {}
    for i in range(len(w) - 1):
        m = min(w[i], w[i + 1]) * scale
        if m > 0:
            tau[off + i] = m
    joint = {}
    for i, fk in enumerate(w):
        if fk <= 0 and tau.get(off + i - 1, 0.0) <= 0 and tau.get(off + i, 0.0) <= 0:
            continue
        k = off + i
        t_here = tau.get(k, 0.0)
        t_left = tau.get(k - 1, 0.0)
        rest = fk - 0.5 * (t_left + t_here)
        if rest < -1e-15:
            raise PreconditionError(f"tau constraint violated at k={k}")
        if t_here > 0:
            joint[(k, 1)] = t_here
        if rest > 0:
            joint[(k, 0)] = max(rest, 0.0)
    return Decomposition(source=p, theta=float(theta), tau=tau, joint=joint)


def sample_decomposed_sum(decomp: Decomposition, n: int, seed: int) -> tuple[float, int, int]:
    """One draw of (W_n, count of eps hits, count of fair-coin successes)."""
    if n == 0:
        return (0.0, 0, 0)
    rng = stream(seed)
    keys = sorted(decomp.joint)
    masses = np.array([decomp.joint[k] for k in keys])
    masses = masses / masses.sum()
    idx = rng.choice(len(keys), size=n, p=masses)
    ks = np.array([keys[i][0] for i in idx])
    eps = np.array([keys[i][1] for i in idx])
    coins = rng.integers(0, 2, size=n)
    w_n = float(np.sum(decomp.source.v0 + decomp.source.D * ks))
    b_n = int(eps.sum())
    m_n = int((eps * coins).sum())
    return (w_n, b_n, m_n)


def exact_Sprime_law(decomp: Decomposition, n: int) -> SumLawTable:
    """Exact law of S'_n = W_n + (D/2) B_n on the half-span lattice."""
    return sum_law(decomp.v_eps_pmf(), n)


def h_n_exact(decomp: Decomposition, n: int) -> float:
    """Exact sup-CDF distance of the normalised smoothed sum to the normal."""
    return sup_cdf_distance(exact_Sprime_law(decomp, n))


def rho_bound(h: float, theta_n: float) -> float:
    """Bernstein-type tail bound 2 exp(-h^2 Theta_n / (2 (1 + h/3)))."""
    if not theta_n > 0:
        raise PreconditionError("Theta_n must be positive")
    return 2.0 * math.exp(-h * h * theta_n / (2.0 * (1.0 + h / 3.0)))


def rho_exact_iid(n: int, theta: float, h: float) -> float:
    """Exact P{|Binomial(n, theta) - n theta| > h n theta} (strict inequality)."""
    mu = n * theta
    lo_in = max(math.ceil(mu - h * mu), 0)
    hi_in = min(math.floor(mu + h * mu), n)
    inside = binom.cdf(hi_in, n, theta) - (binom.cdf(lo_in - 1, n, theta) if lo_in > 0 else 0.0)
    return float(max(0.0, 1.0 - inside))


def rho_exact_counts(thetas, h: float) -> float:
    """Exact tail of a Poisson-binomial count of eps hits (independent case)."""
    law = weighted_sum_law([1] * len(thetas), thetas)
    mu = float(np.sum(thetas))
    k = law.offset + np.arange(len(law.probs))
    outside = np.abs(k - mu) > h * mu
    return float(law.probs[outside].sum())


@dataclass(frozen=True)
class EffectiveRateInput:
    """Inputs of the explicit two-sided local bound.

    C1 and C2 are derived: C1 = max(8/sqrt(2 pi), C0), C2 = 2^{7/2} C1.
    """

    n: int
    var_sn: float
    mean_sn: float
    theta_n: float        # sum of extracted theta_j
    h_n: float            # sup-CDF distance of the normalised smoothed sum
    rho_n: float          # P{|eps-count - Theta_n| > h Theta_n}
    h: float
    D: float
    C0: float

    def __post_init__(self):
        if not 0.0 < self.h < 1.0:
            raise PreconditionError("h must lie in (0,1)")
        if self.var_sn <= 0 or self.theta_n <= 0:
            raise PreconditionError("variance and Theta_n must be positive")

    @property
    def C1(self) -> float:
        return max(8.0 / SQRT_2PI, self.C0)

    @property
    def C2(self) -> float:
        return 2.0 ** 3.5 * self.C1


@dataclass(frozen=True)
class SandwichBounds:
    upper: float
    lower: float
    gaussian: float


def effective_bounds(inp: EffectiveRateInput, kappa: float) -> SandwichBounds:
    """Two-sided explicit bounds on P{S_n = kappa}.

    upper = ((1+h)/(1-h)) gauss_+  +  (C1/sqrt((1-h)Theta)) (H + 1/((1-h)Theta)) + rho
    lower = ((1-h)/(1+h)) gauss_-  -  (C1/sqrt((1-h)Theta)) (H + 1/((1-h)Theta) + 2 rho) - rho
    where gauss_± use variance inflated/deflated by (1 ± h).
    """
    h, var, mean = inp.h, inp.var_sn, inp.mean_sn
    theta, hn, rho = inp.theta_n, inp.h_n, inp.rho_n
    z2 = (kappa - mean) ** 2
    base = inp.D / math.sqrt(2.0 * math.pi * var)
    gauss_plus = base * math.exp(-z2 / (2.0 * (1.0 + h) * var))
    gauss_minus = base * math.exp(-z2 / (2.0 * (1.0 - h) * var))
    err = inp.C1 / math.sqrt((1.0 - h) * theta)
    upper = ((1.0 + h) / (1.0 - h)) * gauss_plus + err * (hn + 1.0 / ((1.0 - h) * theta)) + rho
    lower = ((1.0 - h) / (1.0 + h)) * gauss_minus \
        - err * (hn + 1.0 / ((1.0 - h) * theta) + 2.0 * rho) - rho
    gaussian = base * math.exp(-z2 / (2.0 * var))
    return SandwichBounds(upper=upper, lower=lower, gaussian=gaussian)


def ger2_window_ok(inp: EffectiveRateInput, kappa: float) -> bool:
    """Whether the single-sided corollary's preconditions hold at kappa."""
    theta = inp.theta_n
    if theta <= 1.0 or math.log(theta) / theta > 1.0 / 14.0:
        return False
    z2 = (kappa - inp.mean_sn) ** 2 / inp.var_sn
    return z2 <= math.sqrt(theta / (14.0 * math.log(theta)))


def ger2_bound(inp: EffectiveRateInput) -> float:
    """C2 { D sqrt(log Theta/(Var Theta)) + (H + 1/Theta)/sqrt(Theta) }."""
    theta = inp.theta_n
    if theta <= 1.0:
        raise PreconditionError("Theta_n must exceed 1 for the log bound")
    return inp.C2 * (inp.D * math.sqrt(math.log(theta) / (inp.var_sn * theta))
                     + (inp.h_n + 1.0 / theta) / math.sqrt(theta))


def transfer_formula_check(a: float, b: float, y_law: SumLawTable,
                           y_center: Optional[float] = None) -> dict:
    """Slack of |E e^{-a(b-Y)^2} - e^{-b^2/(2+1/a)}/sqrt(1+2a)| <= 4 sup|F_Y - Phi|.

    Y is the (centered) lattice law given by ``y_law``; ``y_center`` shifts it
    if its stored mean is not already zero.  Returns lhs, rhs and slack >= 0.
    """
    if a <= 0 or b < 0:
        raise PreconditionError("transfer formula needs a > 0, b >= 0")
    center = y_center if y_center is not None else (y_law.meta.mu or 0.0)
    supp = y_law.support
    y = y_law.points(supp) - center
    w = y_law.probs[supp - y_law.offset]
    lhs = abs(float(np.dot(w, np.exp(-a * (b - y) ** 2)))
              - math.exp(-b * b / (2.0 + 1.0 / a)) / math.sqrt(1.0 + 2.0 * a))
    rhs = 4.0 * sup_cdf_distance(y_law, center=center, scale=1.0)
    return {"lhs": lhs, "rhs": rhs, "slack": rhs - lhs}


def decomposition_meta(decomp: Decomposition, n: int) -> MomentSummary:
    return sum_law(decomp.source, n).meta
