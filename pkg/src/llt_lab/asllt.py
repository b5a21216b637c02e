"""Almost sure local limit estimators and the Dickman model.

Path estimators average hit indicators of a moving lattice target with
logarithmic weights; their almost sure limits are local densities.  Each
estimator comes in two modes: a seeded single-path simulation and an
"expectation mode" where the indicator is replaced by its exact probability
from the convolution engine, isolating the deterministic part of the limit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import PreconditionError
from .exact import RunningConvolution, sum_law
from .lattice import LatticePmf, moments
from .rng import stream

SQRT_2PI = math.sqrt(2.0 * math.pi)
EULER_GAMMA = float(np.euler_gamma)


# -- path records -------------------------------------------------------------------


@dataclass(frozen=True)
class PathEstimate:
    """Trace of a log-average estimator along dyadic checkpoints."""

    kind: str
    seed: int
    target: float
    checkpoints: tuple  # ((N, estimate), ...)
    kappa_desc: str = ""

    @property
    def final(self) -> float:
        return self.checkpoints[-1][1]

    def value_at(self, N: int) -> float:
        for cn, est in self.checkpoints:
            if cn == N:
                return est
        raise KeyError(f"no checkpoint at N={N}")


def write_paths_csv(path, estimates: Sequence[PathEstimate]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "seed", "N", "estimate", "target"])
        for est in estimates:
            for n, value in est.checkpoints:
                w.writerow([est.kind, est.seed, n, repr(value), repr(est.target)])


def _checkpoints(N: int, start: int = 4) -> list[int]:
    """Dyadic checkpoints plus decade marks and the horizon itself."""
    pts = set()
    n = start
    while n < N:
        pts.add(n)
        n *= 2
    d = 10
    while d < N:
        if d >= start:
            pts.add(d)
        d *= 10
    pts.add(N)
    return sorted(pts)


# -- the i.i.d. square-integrable estimator ------------------------------------------


@dataclass(frozen=True)
class KappaRule:
    """Nearest-lattice-point target indices for a normalised offset kappa.

    For summand law p, index j_n = round((n mu + kappa sigma sqrt(n) - n v0)/D)
    so that the target value n v0 + D j_n tracks n mu + kappa sigma sqrt(n).
    """

    mu: float
    sigma: float
    v0: float
    D: float
    kappa: float

    @classmethod
    def for_pmf(cls, p: LatticePmf, kappa: float) -> "KappaRule":
        mom = moments(p)
        if mom.sigma2 is None or mom.sigma2 <= 0:
            raise PreconditionError("kappa rule needs positive variance")
        return cls(mu=mom.mu, sigma=math.sqrt(mom.sigma2), v0=p.v0, D=p.D, kappa=kappa)

    def index(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.float64)
        x = n * self.mu + self.kappa * self.sigma * np.sqrt(n) - n * self.v0
        return np.floor(x / self.D + 0.5).astype(np.int64)

    def describe(self) -> str:
        return f"nearest lattice point to n*mu + {self.kappa}*sigma*sqrt(n)"


def asllt_target(p: LatticePmf, kappa: float) -> float:
    """Limit value D/(sqrt(2 pi) sigma) * exp(-kappa^2/2) of the hit average."""
    mom = moments(p)
    return p.D / (SQRT_2PI * math.sqrt(mom.sigma2)) * math.exp(-0.5 * kappa * kappa)


def _simulate_index_path(p: LatticePmf, N: int, rng) -> np.ndarray:
    """Cumulative sums of i.i.d. support indices (exact integer arithmetic)."""
    supp = p.support
    w = p.dense[supp - p.offset]
    w = w / w.sum()
    draws = rng.choice(supp, size=N, p=w)
    return np.cumsum(draws)


def asllt_path(p: LatticePmf, kappa: float, N: int, seed: int) -> PathEstimate:
    """One simulated path of (1/log N) sum_{n<=N} n^{-1/2} 1{S_n = kappa_n}."""
    if N < 4:
        raise PreconditionError("need N >= 4 (log-average undefined near N=1)")
    rule = KappaRule.for_pmf(p, kappa)
    rng = stream(seed)
    ks = _simulate_index_path(p, N, rng)
    n = np.arange(1, N + 1)
    targets = rule.index(n)
    hits = (ks == targets) / np.sqrt(n)
    csum = np.cumsum(hits)
    pts = _checkpoints(N)
    cps = tuple((m, float(csum[m - 1] / math.log(m))) for m in pts)
    return PathEstimate(kind="t1", seed=seed, target=asllt_target(p, kappa),
                        checkpoints=cps, kappa_desc=rule.describe())


def asllt_expectation(p: LatticePmf, kappa: float, N: int) -> float:
    """Exact (1/log N) sum_{n<=N} n^{-1/2} P{S_n = kappa_n}."""
    rule = KappaRule.for_pmf(p, kappa)
    run = RunningConvolution(p)
    acc = 0.0
    for n in range(1, N + 1):
        run.step()
        acc += run.prob(int(rule.index(n))) / math.sqrt(n)
    return acc / math.log(N)


# -- the log-average hitting estimator with exact mass normalisation ---------------


def hit_mass_sequence(p: LatticePmf, a_index: int, N: int) -> np.ndarray:
    """m_k = P{S_k = a} for k = 1..N, computed exactly once."""
    run = RunningConvolution(p)
    out = np.empty(N)
    for k in range(N):
        run.step()
        out[k] = run.prob(a_index)
    return out


def chung_erdos_path(p: LatticePmf, a_index: int, N: int, seed: int,
                     masses: Optional[np.ndarray] = None) -> PathEstimate:
    """Path of (1/log M_n) sum_{k<=n} 1{S_k = a}/M_k with M_k = sum_{i<=k} P{S_i=a}.

    The target is 1.  ``masses`` may carry a precomputed m_k array so that a
    batch of seeds shares one exact-mass computation.
    """
    if p.is_degenerate():
        raise PreconditionError("degenerate summand law")
    m = hit_mass_sequence(p, a_index, N) if masses is None else masses
    M = np.cumsum(m)
    if M[-1] < 2.0:
        raise PreconditionError("insufficient mass, increase N")
    rng = stream(seed)
    ks = _simulate_index_path(p, N, rng)
    hits = (ks == a_index) / M
    csum = np.cumsum(hits)
    pts = [n for n in _checkpoints(N) if M[n - 1] > 1.0]
    cps = tuple((n, float(csum[n - 1] / math.log(M[n - 1]))) for n in pts)
    return PathEstimate(kind="chung_erdos", seed=seed, target=1.0, checkpoints=cps,
                        kappa_desc=f"fixed level a={a_index}")


def chung_erdos_expectation(p: LatticePmf, a_index: int, N: int,
                            masses: Optional[np.ndarray] = None) -> float:
    """(1/log M_N) sum_{k<=N} m_k/M_k; tends to 1 as the mass accumulates."""
    m = hit_mass_sequence(p, a_index, N) if masses is None else masses
    M = np.cumsum(m)
    if M[-1] < 2.0:
        raise PreconditionError("insufficient mass, increase N")
    return float(np.sum(m / M) / math.log(M[-1]))


# -- two-state chain ------------------------------------------------------------------


@dataclass(frozen=True)
class TwoStateChain:
    """0/1 chain with all transition probabilities positive.

    Centered functional f(0) = -pi_1, f(1) = pi_0 makes S_n = #ones - n pi_1;
    the spectral variance is pi_0 pi_1 (1+g)/(1-g) with g = 1 - p01 - p10.
    """

    p01: float
    p10: float

    def __post_init__(self):
        if not (0.0 < self.p01 < 1.0 and 0.0 < self.p10 < 1.0):
            raise PreconditionError("transition probabilities must lie in (0,1)")

    @property
    def gamma(self) -> float:
        return 1.0 - self.p01 - self.p10

    @property
    def pi(self) -> tuple[float, float]:
        s = self.p01 + self.p10
        return (self.p10 / s, self.p01 / s)

    @property
    def sigma2(self) -> float:
        pi0, pi1 = self.pi
        return pi0 * pi1 * (1.0 + self.gamma) / (1.0 - self.gamma)

    def f(self, state: int) -> float:
        pi0, pi1 = self.pi
        return pi0 if state == 1 else -pi1

    def transition(self) -> np.ndarray:
        return np.array([[1.0 - self.p01, self.p01],
                         [self.p10, 1.0 - self.p10]])


def markov_kappa_indices(chain: TwoStateChain, kappa: float, n) -> np.ndarray:
    """Integer targets k_nu with kappa_nu = -nu pi_1 + k_nu tracking kappa sigma sqrt(nu)."""
    n = np.asarray(n, dtype=np.float64)
    pi1 = chain.pi[1]
    sigma = math.sqrt(chain.sigma2)
    return np.floor(n * pi1 + kappa * sigma * np.sqrt(n) + 0.5).astype(np.int64)


def markov_ones_pmf(chain: TwoStateChain, nu: int) -> np.ndarray:
    """Exact pmf of the number of ones among xi_1..xi_nu (stationary start)."""
    pi0, pi1 = chain.pi
    P = chain.transition()
    # table[j, s] = P(#ones = j, xi_k = s)
    table = np.zeros((2, 2))
    table[0, 0] = pi0
    table[1, 1] = pi1
    for _ in range(nu - 1):
        nxt = np.zeros((table.shape[0] + 1, 2))
        nxt[: table.shape[0], 0] = table @ P[:, 0]
        nxt[1: table.shape[0] + 1, 1] = table @ P[:, 1]
        table = nxt
    return table.sum(axis=1)


def _simulate_chain(chain: TwoStateChain, N: int, rng) -> np.ndarray:
    """States xi_1..xi_N from the stationary start, vectorised.

    Using one uniform per step, the next state is forced whenever the two
    conditional draws agree; between forced steps the state either carries
    (gamma > 0) or flips (gamma < 0), which an accumulated parity resolves.
    The draw order matches the obvious sequential loop exactly.
    """
    pi0, pi1 = chain.pi
    u = rng.random(N)
    first = 1 if u[0] < pi1 else 0
    if N == 1:
        return np.array([first], dtype=np.int64)
    v = u[1:]
    p01, p10 = chain.p01, chain.p10
    from0 = v < p01          # next state 1 when currently 0
    from1 = v >= p10         # next state 1 when currently 1 (0 when u < p10)
    forced = from0 == from1
    flip = from0 & ~from1    # v below both thresholds: state toggles; the
    # remaining case (above both) carries the previous state unchanged
    idx = np.arange(1, N)
    last_forced = np.maximum.accumulate(np.where(forced, idx, 0))
    forced_val = np.zeros(N, dtype=np.int64)
    forced_val[0] = first
    forced_val[idx[forced]] = from0[forced]
    cumflip = np.concatenate(([0], np.cumsum(flip)))
    states = np.empty(N, dtype=np.int64)
    states[0] = first
    par = (cumflip[idx] - cumflip[last_forced]) & 1
    states[1:] = forced_val[last_forced] ^ par
    return states


def markov_asllt_path(chain: TwoStateChain, kappa: float, N: int, seed: int) -> PathEstimate:
    """Path of (1/log n) sum (sigma/sqrt(nu)) 1{S_nu = kappa_nu}; target phi(kappa)."""
    if N < 4:
        raise PreconditionError("need N >= 4")
    rng = stream(seed)
    states = _simulate_chain(chain, N, rng)
    ones = np.cumsum(states)
    nu = np.arange(1, N + 1)
    targets = markov_kappa_indices(chain, kappa, nu)
    sigma = math.sqrt(chain.sigma2)
    hits = (ones == targets) * (sigma / np.sqrt(nu))
    csum = np.cumsum(hits)
    pts = _checkpoints(N)
    cps = tuple((m, float(csum[m - 1] / math.log(m))) for m in pts)
    target = math.exp(-0.5 * kappa * kappa) / SQRT_2PI
    return PathEstimate(kind="markov", seed=seed, target=target, checkpoints=cps,
                        kappa_desc=f"-nu*pi1 + round(nu*pi1 + {kappa}*sigma*sqrt(nu))")


def markov_asllt_expectation(chain: TwoStateChain, kappa: float, N: int) -> float:
    """Exact (1/log N) sum (sigma/sqrt(nu)) P{S_nu = kappa_nu} via the transfer table."""
    pi0, pi1 = chain.pi
    P = chain.transition()
    sigma = math.sqrt(chain.sigma2)
    table = np.zeros((2, 2))
    table[0, 0] = pi0
    table[1, 1] = pi1
    targets = markov_kappa_indices(chain, kappa, np.arange(1, N + 1))
    acc = 0.0
    for nu in range(1, N + 1):
        j = targets[nu - 1]
        if 0 <= j < table.shape[0]:
            acc += table[j].sum() * sigma / math.sqrt(nu)
        if nu < N:
            nxt = np.zeros((table.shape[0] + 1, 2))
            nxt[: table.shape[0], 0] = table @ P[:, 0]
            nxt[1: table.shape[0] + 1, 1] = table @ P[:, 1]
            table = nxt
    return acc / math.log(N)


# -- Dickman function and model -------------------------------------------------------


def _cumquad4(g: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral over a uniform grid, 4th order, one-sided at the ends."""
    n = len(g) - 1
    steps = np.empty(n)
    if n >= 3:
        steps[0] = h * (9 * g[0] + 19 * g[1] - 5 * g[2] + g[3]) / 24.0
        steps[n - 1] = h * (g[n - 3] - 5 * g[n - 2] + 19 * g[n - 1] + 9 * g[n]) / 24.0
        if n >= 2:
            core = h * (-g[0:n - 2] + 13 * g[1:n - 1] + 13 * g[2:n] - g[3:n + 1]) / 24.0
            steps[1:n - 1] = core
    else:  # tiny grids: trapezoid fallback
        steps[:] = h * (g[:-1] + g[1:]) / 2.0
    return np.concatenate(([0.0], np.cumsum(steps)))


@dataclass(frozen=True)
class DickmanRho:
    """Tabulated solution of u r'(u) + r(u-1) = 0 with r = 1 on [0,1]."""

    step: float
    u_max: float
    values: np.ndarray

    def __call__(self, u) -> np.ndarray:
        """Cubic interpolation on the table; 0 outside [0, u_max]."""
        u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
        out = np.zeros(u_arr.shape)
        inside = (u_arr >= 0) & (u_arr <= self.u_max)
        ui = u_arr[inside]
        pos = ui / self.step
        i1 = np.clip(np.floor(pos).astype(np.int64), 1, len(self.values) - 3)
        t = pos - i1
        ym1, y0, y1, y2 = (self.values[i1 - 1], self.values[i1],
                           self.values[i1 + 1], self.values[i1 + 2])
        out[inside] = (
            y0
            + t * (-ym1 / 3.0 - y0 / 2.0 + y1 - y2 / 6.0)
            + t * t * (ym1 / 2.0 - y0 + y1 / 2.0)
            + t ** 3 * (-ym1 / 6.0 + y0 / 2.0 - y1 / 2.0 + y2 / 6.0)
        )
        if np.isscalar(u) or np.asarray(u).ndim == 0:
            return float(out[0])
        return out

    def integral(self) -> float:
        """Integral over [0, u_max] by composite Simpson."""
        from scipy.integrate import simpson

        u = np.arange(len(self.values)) * self.step
        return float(simpson(self.values, x=u))


def dickman_rho(u_max: float = 20.0, step: float = 1.0 / 1024.0) -> DickmanRho:
    """Solve the delay equation on a delay-aligned grid.

    The derivative at u only involves values one unit back, so each unit
    interval integrates a fully known function; a 4th-order cumulative rule
    per piece keeps kinks at the integers on grid nodes.
    """
    if step > 1e-3 + 1e-15:
        raise PreconditionError("step must be <= 1e-3")
    m = round(1.0 / step)
    if abs(m * step - 1.0) > 1e-12:
        raise PreconditionError("step must divide 1 exactly")
    units = int(math.ceil(u_max))
    values = np.empty(units * m + 1)
    values[: m + 1] = 1.0
    u = np.arange(units * m + 1) * step
    for j in range(1, units):
        lo, hi = j * m, (j + 1) * m
        g = values[lo - m: hi - m + 1] / u[lo: hi + 1]
        cum = _cumquad4(g, step)
        values[lo: hi + 1] = values[lo] - cum
    values = np.maximum(values, 0.0)
    return DickmanRho(step=step, u_max=float(units), values=values)


def dickman_weights(n: int) -> tuple[list[int], list[float]]:
    """Weights a_k = k and success probabilities 1/k of the Dickman model."""
    return list(range(1, n + 1)), [1.0 / k for k in range(1, n + 1)]


def dickman_sum_law(n: int, max_value: Optional[int] = None):
    from .exact import weighted_sum_law

    a, q = dickman_weights(n)
    return weighted_sum_law(a, q, max_value=max_value)


def dickman_llt_check(n: int, x: float, rho: DickmanRho):
    """Exact n P{T_n = round(x n)} against the limit e^{-gamma} rho(x)."""
    from .approx import ApproxReport

    if n < 2:
        raise PreconditionError("n >= 2 required")
    kappa = round(x * n)
    law = dickman_sum_law(n, max_value=kappa)
    exact = n * law.prob(kappa)
    target = math.exp(-EULER_GAMMA) * float(rho(x))
    return ApproxReport(n=n, metric="dickman_local", exact=float(exact), approx=target,
                        error=abs(exact - target), normalization="n")


def dickman_strong_llt(n: int, rho: DickmanRho) -> float:
    """Full sum over kappa of |P{T_n=kappa} - n^{-1} e^{-gamma} rho(kappa/n)|."""
    if n < 2:
        raise PreconditionError("n >= 2 required")
    law = dickman_sum_law(n)
    hi = max(law.offset + len(law.probs) - 1, int(math.ceil(n * rho.u_max)))
    kappa = np.arange(0, hi + 1)
    probs = np.zeros(len(kappa))
    probs[law.offset: law.offset + len(law.probs)] = law.probs
    limit = math.exp(-EULER_GAMMA) / n * rho(kappa / n)
    return float(np.abs(probs - limit).sum())


def asllt_dickman_path(N: int, seed: int, rho: DickmanRho, x: float = 1.0) -> PathEstimate:
    """Coupled path of (1/log N) sum_{n<=N} 1{T_n = round(x n)}.

    Target e^{-gamma} rho(x).  Convergence of the log average is slow: the
    finite-N expectation carries an O(1/log N) bias whose constant is of
    order one for this model (unlike the i.i.d. estimator, where the early
    terms happen to cancel the harmonic-sum surplus).
    """
    if N < 4:
        raise PreconditionError("need N >= 4")
    if x < 1.0:
        raise PreconditionError("round(x n) must be strictly increasing: need x >= 1")
    rng = stream(seed)
    k = np.arange(1, N + 1)
    z = rng.random(N) < 1.0 / k
    t = np.cumsum(k * z)
    kappa = np.floor(x * k + 0.5).astype(np.int64)
    hits = (t == kappa).astype(np.float64)
    csum = np.cumsum(hits)
    pts = _checkpoints(N)
    target = math.exp(-EULER_GAMMA) * float(rho(x))
    cps = tuple((m, float(csum[m - 1] / math.log(m))) for m in pts)
    return PathEstimate(kind="dickman", seed=seed, target=target, checkpoints=cps,
                        kappa_desc=f"round({x} n)")


def dickman_expectation(N: int, x: float, rho: DickmanRho) -> float:
    """Exact (1/log N) sum_{n<=N} P{T_n = round(x n)} via the running DP."""
    cap = int(math.floor(x * N + 0.5)) + 1
    law = np.zeros(cap + 1)
    law[0] = 1.0
    hi = 0
    acc = 0.0
    for n in range(1, N + 1):
        q = 1.0 / n
        new_hi = min(hi + n, cap)
        if n <= cap:
            src_hi = min(hi, cap - n)
            out = law[: new_hi + 1] * (1.0 - q)
            out[n: n + src_hi + 1] += law[: src_hi + 1] * q
            law[: new_hi + 1] = out
        else:
            law[: hi + 1] *= 1.0 - q
        hi = new_hi
        kappa = math.floor(x * n + 0.5)
        if kappa <= hi:
            acc += law[kappa]
    return acc / math.log(N)


# -- correlation diagnostics -----------------------------------------------------------


@dataclass(frozen=True)
class CovarianceRecord:
    m: int
    n: int
    lhs: float
    bracket: float
    sqrt_ratio: float  # sqrt(m/n), the scaled-regime shape

    @property
    def fitted_c(self) -> float:
        return self.lhs / self.bracket

    @property
    def fitted_c_scaled(self) -> float:
        return self.lhs / self.sqrt_ratio


def covariance_check(p: LatticePmf, m: int, n: int, kappa: float = 0.0) -> CovarianceRecord:
    """Scaled joint-vs-product gap sqrt(nm) |P{S_n=k_n, S_m=k_m} - P P| with its bound shape.

    The bound bracket is 1/(sqrt(n/m) - 1) + n^{1/2}/(n-m)^{3/2}; in the
    regime m <= n/2 the alternative shape sqrt(m/n) applies.
    """
    if not 1 <= m < n:
        raise PreconditionError("need 1 <= m < n")
    if theta_of(p) <= 0:
        raise PreconditionError("adjacent positive masses required")
    rule = KappaRule.for_pmf(p, kappa)
    jm = int(rule.index(m))
    jn = int(rule.index(n))
    law_m = sum_law(p, m)
    law_inc = sum_law(p, n - m)
    law_n = sum_law(p, n)
    joint = law_m.prob(jm) * law_inc.prob(jn - jm)
    prod = law_m.prob(jm) * law_n.prob(jn)
    lhs = math.sqrt(n * m) * abs(joint - prod)
    bracket = 1.0 / (math.sqrt(n / m) - 1.0) + math.sqrt(n) / (n - m) ** 1.5
    return CovarianceRecord(m=m, n=n, lhs=lhs, bracket=bracket,
                            sqrt_ratio=math.sqrt(m / n))


def theta_of(p: LatticePmf) -> float:
    w = p.dense
    if len(w) == 1:
        return 0.0
    return float(np.minimum(w[:-1], w[1:]).sum())
