"""Local approximation terms and their error functionals.

The exact engine supplies pmf tables; this module evaluates the Gaussian
local term, the scaled sup-error Delta_n, the classical binomial bound with
explicit remainder, the third-order expansion term, summed variation
distance, one-sided stable densities by characteristic-function inversion,
ratio diagnostics for heavy tails, the smoothness criterion, the quadrature
lower bound, and residue-uniformity diagnostics.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .errors import (
    DegenerateLawError,
    PreconditionError,
    UnsupportedParameterError,
)
from .exact import SumLawTable, residues_mod, sum_law, sup_cdf_distance
from .lattice import LatticePmf, char_fn, maximal_span, moments

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ApproxReport:
    """Per-n record of an approximation, its exact counterpart and the error."""

    n: int
    metric: str
    exact: float
    approx: float
    error: float
    normalization: str
    flags: tuple = ()

    @staticmethod
    def csv_header() -> list[str]:
        return ["n", "metric", "exact", "approx", "error", "normalization"]

    def csv_row(self) -> list:
        return [self.n, self.metric, repr(self.exact), repr(self.approx),
                repr(self.error), self.normalization]


def write_reports_csv(path, reports: Sequence[ApproxReport], comment: str = "") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if comment:
            w.writerow([f"# {comment}"])
        w.writerow(ApproxReport.csv_header())
        for r in reports:
            w.writerow(r.csv_row())


# -- Gaussian local term and Delta_n ------------------------------------------------


def gaussian_local_term(N: float, M: float, B2: float, D: float) -> float:
    """Per-point normal mass approximation (D / sqrt(2 pi B2)) exp(-(N-M)^2 / (2 B2))."""
    if not B2 > 0:
        raise DegenerateLawError("gaussian_local_term needs positive variance")
    z = (N - M) ** 2 / (2.0 * B2)
    return D / math.sqrt(2.0 * math.pi * B2) * math.exp(-z)


def delta_from_table(law: SumLawTable) -> tuple[float, float]:
    """Scaled sup-error of a sum table against the Gaussian local curve.

    Returns (value, location): the supremum over lattice points of
    |B_n P{S_n=N} - (D/sqrt(2 pi)) exp(-(N-M_n)^2 / 2 B_n^2)| and the point
    where it is attained.  Lattice points just outside the stored window only
    carry the Gaussian term, which decreases monotonically away from the
    mean, so one point past each edge closes the supremum exactly.
    """
    M, B2 = law.meta.mu, law.meta.sigma2
    if B2 is None or B2 <= 0:
        raise DegenerateLawError("delta_n needs positive variance")
    B = math.sqrt(B2)
    lo = law.offset
    hi = law.offset + len(law.probs) - 1
    k = np.arange(lo - 1, hi + 2)
    x = law.n * law.v0 + law.D * k
    probs = np.zeros(len(k))
    probs[1:-1] = law.probs
    gauss = (law.D / SQRT_2PI) * np.exp(-((x - M) ** 2) / (2.0 * B2))
    dev = np.abs(B * probs - gauss)
    i = int(np.argmax(dev))
    return float(dev[i]), float(x[i])


def delta_n(p: LatticePmf, n: int) -> float:
    """Delta_n for i.i.d. sums of p, using the declared span of p."""
    if p.is_degenerate():
        raise DegenerateLawError("degenerate: span undefined")
    law = sum_law(p, n)
    return delta_from_table(law)[0]


def delta_n_report(p: LatticePmf, n: int) -> ApproxReport:
    law = sum_law(p, n)
    value, location = delta_from_table(law)
    return ApproxReport(n=n, metric="delta_n", exact=value, approx=0.0, error=value,
                        normalization="B_n", flags=(("argmax", location),))


@lru_cache(maxsize=8)
def measure_lltber_constant(n_max: int = 4096, n_min: int = 16) -> float:
    """Largest n^{3/2}-scaled sup-error of the fair-coin local approximation.

    Scans the dyadic grid n_min..n_max of fair Bernoulli sums and returns
    max_n n^{3/2} sup_k |P{S_n=k} - sqrt(2/(pi n)) e^{-(2k-n)^2/(2n)}|.
    """
    from .lattice import bernoulli

    p = bernoulli(0.5)
    worst = 0.0
    n = n_min
    while n <= n_max:
        law = sum_law(p, n)
        k = law.offset + np.arange(len(law.probs))
        gauss = math.sqrt(2.0 / (math.pi * n)) * np.exp(-((2 * k - n) ** 2) / (2.0 * n))
        err = float(np.max(np.abs(law.probs - gauss)))
        worst = max(worst, err * n ** 1.5)
        n *= 2
    return worst


# -- classical binomial bound ----------------------------------------------------


def stirling_epsilon(n: int) -> float:
    """log n! minus its Stirling main term; lies in (1/(12n+1), 1/(12n))."""
    return math.lgamma(n + 1) - ((n + 0.5) * math.log(n) - n + 0.5 * math.log(2 * math.pi))


@dataclass(frozen=True)
class DeMoivreRecord:
    n: int
    p: float
    k: int
    gamma: float
    x: float
    gaussian: float
    exact: float
    E: float
    bound: float


def demoivre_bound(n: int, p: float, k: int, gamma: float) -> DeMoivreRecord:
    """Explicit remainder bound for the binomial point mass near the mean.

    Requires 0<p<1, 0<gamma<1, |k - np| <= gamma*n*p*q and n >= max(p/q, q/p).
    Returns the Gaussian term, the exact mass, the measured log-ratio E and
    the bound (3|x| + 2|x|^3)/((1-gamma) sqrt(npq)) + 1/(4 n min(p,q) (1-gamma)).
    """
    q = 1.0 - p
    if not 0.0 < p < 1.0:
        raise PreconditionError("binomial parameter p must lie in (0,1)")
    if not 0.0 < gamma < 1.0:
        raise PreconditionError("gamma must lie in (0,1)")
    if abs(k - n * p) > gamma * n * p * q + 1e-12:
        raise PreconditionError("|k - np| <= gamma*n*p*q fails")
    if n < max(p / q, q / p):
        raise PreconditionError("n >= max(p/q, q/p) fails")
    npq = n * p * q
    x = (k - n * p) / math.sqrt(npq)
    log_gauss = -0.5 * x * x - 0.5 * math.log(2 * math.pi * npq)
    log_exact = (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
                 + k * math.log(p) + (n - k) * math.log(q))
    E = log_exact - log_gauss
    bound = (3 * abs(x) + 2 * abs(x) ** 3) / ((1 - gamma) * math.sqrt(npq)) \
        + 1.0 / (4 * n * min(p, q) * (1 - gamma))
    return DeMoivreRecord(n=n, p=p, k=k, gamma=gamma, x=x,
                          gaussian=math.exp(log_gauss), exact=math.exp(log_exact),
                          E=E, bound=bound)


# -- third-order expansion ---------------------------------------------------------


def edgeworth3_term(p: LatticePmf, n: int, N: float) -> float:
    """Gaussian local term with the first skewness correction.

    (D/(sigma sqrt(n))) phi(y) (1 + (y^3 - 3y) mu3 / (6 sigma^3 sqrt(n)))
    with y = (N - n mu)/(sigma sqrt(n)).
    """
    mom = moments(p)
    if mom.mu3 is None:
        raise PreconditionError("third central moment unavailable")
    if mom.sigma2 is None or mom.sigma2 <= 0:
        raise DegenerateLawError("edgeworth3_term needs positive variance")
    sigma = math.sqrt(mom.sigma2)
    y = (N - n * mom.mu) / (sigma * math.sqrt(n))
    phi = math.exp(-0.5 * y * y) / SQRT_2PI
    corr = 1.0 + (y ** 3 - 3.0 * y) * mom.mu3 / (6.0 * sigma ** 3 * math.sqrt(n))
    return (p.D / (sigma * math.sqrt(n))) * phi * corr


def edgeworth3_sup_error(p: LatticePmf, n: int, with_correction: bool = True) -> float:
    """sup over lattice points of |P{S_n=N} - expansion term|."""
    law = sum_law(p, n)
    mom = moments(p)
    sigma = math.sqrt(mom.sigma2)
    k = law.offset + np.arange(len(law.probs))
    x = law.n * law.v0 + law.D * k
    y = (x - n * mom.mu) / (sigma * math.sqrt(n))
    phi = np.exp(-0.5 * y * y) / SQRT_2PI
    corr = 1.0 + (y ** 3 - 3.0 * y) * mom.mu3 / (6.0 * sigma ** 3 * math.sqrt(n)) \
        if with_correction else 1.0
    approx = (p.D / (sigma * math.sqrt(n))) * phi * corr
    return float(np.max(np.abs(law.probs - approx)))


# -- summed variation distance ----------------------------------------------------


def variation_distance(law: SumLawTable, A: Optional[float] = None,
                       B: Optional[float] = None, tail_sigmas: float = 40.0) -> float:
    """Sum over lattice points of |P{S_n=m} - (D/(B sqrt(2 pi))) exp(...)|.

    Defaults center A and scale B to the table moments.  Lattice points
    beyond the stored window contribute their Gaussian term only; the sum is
    extended ``tail_sigmas`` scale units past the window on both sides, which
    exhausts the tail to double precision.
    """
    if A is None:
        A = law.meta.mu
    if B is None:
        if law.meta.sigma2 is None or law.meta.sigma2 <= 0:
            raise DegenerateLawError("variation_distance needs a scale")
        B = math.sqrt(law.meta.sigma2)
    if not B > 0:
        raise PreconditionError("scale B must be positive")
    pad = int(math.ceil(tail_sigmas * B / law.D)) + 2
    lo = law.offset - pad
    hi = law.offset + len(law.probs) - 1 + pad
    k = np.arange(lo, hi + 1)
    x = law.n * law.v0 + law.D * k
    probs = np.zeros(len(k))
    probs[pad:pad + len(law.probs)] = law.probs
    gauss = (law.D / (B * SQRT_2PI)) * np.exp(-((x - A) ** 2) / (2.0 * B * B))
    return float(np.abs(probs - gauss).sum())


# -- one-sided stable branch -------------------------------------------------------


@dataclass(frozen=True)
class StableParams:
    """Canonical stable limit of the discretised power-tail family.

    ``alpha`` in (0,1) for the one-sided branch; ``c`` enters only through the
    norming sequence B_n = (n c)^{1/alpha}.  ``one_sided`` False selects the
    symmetric variant (zero skew term in the exponent).
    """

    alpha: float
    c: float = 1.0
    one_sided: bool = True

    def __post_init__(self):
        if self.alpha == 1.0:
            raise UnsupportedParameterError("alpha = 1 branch is not implemented")
        if not 0.0 < self.alpha < 1.0:
            raise UnsupportedParameterError("inversion branch requires alpha in (0,1)")
        if self.c <= 0:
            raise UnsupportedParameterError("scale c must be positive")

    def b_n(self, n: int) -> float:
        return (n * self.c) ** (1.0 / self.alpha)

    def cf(self, t: np.ndarray) -> np.ndarray:
        """Limit characteristic function of the normalised positive-tail sums.

        exp{-G(1-a) cos(pi a/2) |t|^a (1 - i sgn(t) tan(pi a/2))} for the
        one-sided branch (skew tan factor reduces to 1 at a = 1/2), and the
        same magnitude with zero skew for the symmetric variant.
        """
        coeff = gamma_fn(1.0 - self.alpha) * math.cos(math.pi * self.alpha / 2.0)
        mag = coeff * np.abs(t) ** self.alpha
        if self.one_sided:
            skew = math.tan(math.pi * self.alpha / 2.0)
            return np.exp(-mag * (1.0 - 1j * skew * np.sign(t)))
        return np.exp(-mag)


def stable_density(params: StableParams, x: float, abs_tol: float = 1e-9) -> float:
    """Density of the stable limit law by Fourier inversion.

    g(x) = (1/pi) Re int_0^T e^{-itx} f(t) dt with the cutoff T placed where
    |f| < 1e-14; the oscillatory factor is handled by weighted quadrature.
    Values below -1e-8 raise; small negative quadrature noise clips to 0.
    """
    coeff = gamma_fn(1.0 - params.alpha) * math.cos(math.pi * params.alpha / 2.0)
    skew = math.tan(math.pi * params.alpha / 2.0)
    T = (math.log(1e14) / coeff) ** (1.0 / params.alpha)

    def re_f(t):
        mag = math.exp(-coeff * t ** params.alpha)
        if params.one_sided:
            return mag * math.cos(skew * coeff * t ** params.alpha)
        return mag

    def im_f(t):
        if not params.one_sided:
            return 0.0
        mag = math.exp(-coeff * t ** params.alpha)
        return mag * math.sin(skew * coeff * t ** params.alpha)

    # Re e^{-itx} f(t) = Re f cos(tx) + Im f sin(tx)
    c_part, _ = quad(re_f, 0.0, T, weight="cos", wvar=x, epsabs=abs_tol, limit=400)
    if params.one_sided:
        s_part, _ = quad(im_f, 0.0, T, weight="sin", wvar=x, epsabs=abs_tol, limit=400)
    else:
        s_part = 0.0
    val = (c_part + s_part) / math.pi
    if val < -1e-8:
        raise PreconditionError(f"inversion produced g({x}) = {val} < -1e-8")
    return max(val, 0.0)


def stable_density_mass(params: StableParams, x_split: float = 2000.0) -> float:
    """Total mass of the inverted density with the analytic power tail restored.

    Integrates g over [0, x_split] by adaptive quadrature and adds the
    first-order tail x_split^{-alpha} of the one-sided limit law (whose
    normalised survival coefficient is 1); the next tail order is
    O(x_split^{-2 alpha}), i.e. ~1e-6 at alpha = 1/2.  The split must stay
    below ~2e3 because the oscillatory inversion quadrature degrades beyond.
    """
    if not params.one_sided:
        raise PreconditionError("mass check implemented for the one-sided branch")
    a = params.alpha
    body = 0.0
    for lo, hi in ((0.0, 2.0), (2.0, 50.0)):
        val, _ = quad(lambda x: stable_density(params, x), lo, hi, limit=300)
        body += val
    # far tail flattened by v = x^-alpha, under which g(x) dx -> dv asymptotically
    val, _ = quad(lambda v: stable_density(params, v ** (-1.0 / a)) / a * v ** (-1.0 - 1.0 / a),
                  x_split ** -a, 50.0 ** -a, limit=300)
    body += val
    return body + x_split ** -a


class StableDensityTable:
    """Cubic-interpolated table of a stable density on [0, x_max]."""

    def __init__(self, params: StableParams, x_max: float = 60.0, step: float = 0.01,
                 coarse_from: float = 5.0, coarse_step: float = 0.05):
        fine = np.arange(0.0, min(coarse_from, x_max) + step, step)
        coarse = np.arange(min(coarse_from, x_max), x_max + coarse_step, coarse_step)
        self.x = np.unique(np.concatenate([fine, coarse]))
        self.params = params
        self.g = np.array([stable_density(params, float(v)) for v in self.x])

    def __call__(self, x) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=np.float64), self.x, self.g,
                         left=0.0, right=0.0)


_density_tables: dict = {}


def _density_table(params: StableParams, x_max: float) -> StableDensityTable:
    key = (params.alpha, params.one_sided, x_max)
    if key not in _density_tables:
        _density_tables[key] = StableDensityTable(params, x_max=x_max)
    return _density_tables[key]


def stable_llt_error(p: LatticePmf, n: int, x_max: float = 60.0) -> ApproxReport:
    """sup_m |B_n P{S_n=m} - g(m/B_n)| for a discretised power-tail pmf.

    The sum law is computed exactly on the window m <= x_max * B_n (heavy-tail
    supports only grow, so a cap loses nothing inside the window) and the
    per-variable truncation renormalisation is undone by the factor
    (1 - discarded)^n before comparing against the limit density.
    """
    if p.family is None:
        raise PreconditionError("stable_llt_error needs the power-tail family")
    params = StableParams(alpha=p.family["alpha"], c=p.family["c"])
    bn = params.b_n(n)
    cap = int(math.ceil(x_max * bn))
    if p.family["truncation_index"] < cap:
        raise PreconditionError("family truncated below the comparison window")
    law = sum_law(p, n, max_index=cap)
    correction = (1.0 - p.discarded_mass) ** n
    table = _density_table(params, x_max)
    k = law.offset + np.arange(len(law.probs))
    vals = bn * law.probs * correction
    g = table(k / bn)
    err = float(np.max(np.abs(vals - g)))
    flags = ()
    if n * p.discarded_mass > 0.5:
        flags = (("truncation_mass_excessive", n * p.discarded_mass),)
    return ApproxReport(n=n, metric="stable_local_error", exact=float(np.max(vals)),
                        approx=float(np.max(g)), error=err,
                        normalization=f"B_n=(n c)^(1/alpha)={bn!r}", flags=flags)


def doney_ratio(p: LatticePmf, n: int, m: int, mu: Optional[float] = None,
                eps: float = 0.5, window_pad: int = 4) -> float:
    """P{S_n = m} / (n P{X = m - round(n mu)}) for a finite-mean heavy tail.

    Requires m >= (mu + eps) n.  Truncation renormalisation is undone on both
    sides so the ratio refers to the untruncated law.
    """
    if mu is None:
        mu = moments(p).mu
    if mu is None:
        raise PreconditionError("doney_ratio needs a finite mean")
    if m < (mu + eps) * n:
        raise PreconditionError(f"m >= (mu + eps) n fails: {m} < {(mu + eps) * n}")
    cap = m + window_pad
    if p.family is not None and p.family["truncation_index"] < cap:
        raise PreconditionError("family truncated below the requested point")
    law = sum_law(p, n, max_index=cap if p.offset >= 0 else None)
    delta = p.discarded_mass
    num = law.prob(m) * (1.0 - delta) ** n
    j = m - round(n * mu)
    i = j - p.offset
    pj = p.dense[i] if 0 <= i < len(p.dense) else 0.0
    den = n * pj * (1.0 - delta)
    if den == 0.0:
        raise PreconditionError(f"zero denominator: P(X = {j}) = 0")
    return float(num / den)


# -- smoothness criterion, quadrature lower bound, residue diagnostics ------------


def mukhin_criterion(p: LatticePmf, n: int, v: Optional[int] = None) -> float:
    """b_n * sup over |m-k| <= v of |P{S_n=m} - P{S_n=k}|.

    Default window radius v = max(1, floor(sqrt(eps_n) b_n)) with eps_n the
    sup-CDF distance of the normalised sum to the normal and b_n = sigma
    sqrt(n).  Tends to 0 exactly when the local limit behaviour holds.
    """
    mom = moments(p)
    if mom.sigma2 is None or mom.sigma2 <= 0:
        raise DegenerateLawError("mukhin_criterion needs positive variance")
    law = sum_law(p, n)
    bn = math.sqrt(law.meta.sigma2)
    if v is None:
        eps_n = sup_cdf_distance(law)
        v = max(1, math.floor(math.sqrt(eps_n) * bn))
    probs = np.concatenate([np.zeros(v), law.probs, np.zeros(v)])
    worst = 0.0
    for j in range(1, v + 1):
        d = float(np.max(np.abs(probs[j:] - probs[:-j])))
        worst = max(worst, d)
    return bn * worst


@dataclass(frozen=True)
class QuadratureLowerBound:
    n: int
    k: int
    lhs: float
    rhs: float
    delta_n: float
    lambda_n: float


def gamkrelidze_lower_check(p: LatticePmf, n: int, k: int,
                            quad_tol: float = 1e-9) -> QuadratureLowerBound:
    """Quadrature lower bound on the tail integral of |cf(S_n)|^2.

    lhs = (1/4pi) int_{2pi/(2k+1) <= |t| <= pi} |cf_{S_n}(t)|^2 dt,
    rhs = (1/(2 sqrt(pi) B_n))(1 - e^{-k^2/(4 B_n^2)}) + 2 Lambda_n / B_n with
    Lambda_n = 2.01 (Delta_n + e^{-pi^2 B_n^2}/(2 sqrt(pi))); lhs <= rhs holds
    whenever the local approximation is any good.
    """
    if p.v0 != 0.0 or p.D != 1.0:
        raise PreconditionError("integer-valued form required (v0=0, D=1)")
    if k < 1:
        raise PreconditionError("k >= 1 required")
    mom = moments(p)
    bn = math.sqrt(n * mom.sigma2)
    dn = delta_n(p, n)

    def integrand(t: float) -> float:
        return abs(char_fn(p, t)) ** (2 * n)

    lo = 2.0 * math.pi / (2 * k + 1)
    if lo >= math.pi:
        raise PreconditionError("window 2pi/(2k+1) <= |t| <= pi is empty")
    val, err = quad(integrand, lo, math.pi, epsabs=quad_tol, limit=400)
    if err > max(1e-6, 1e-3 * max(val, 1e-12)):
        raise PreconditionError(f"quadrature did not converge: err={err}")
    lhs = 2.0 * val / (4.0 * math.pi)
    lam = 2.01 * (dn + math.exp(-math.pi ** 2 * bn ** 2) / (2.0 * math.sqrt(math.pi)))
    rhs = (1.0 - math.exp(-k * k / (4.0 * bn * bn))) / (2.0 * math.sqrt(math.pi) * bn) \
        + 2.0 * lam / bn
    return QuadratureLowerBound(n=n, k=k, lhs=lhs, rhs=rhs, delta_n=dn, lambda_n=lam)


@dataclass(frozen=True)
class ResidueDiagnostics:
    h: int
    n: int
    residues: np.ndarray            # P(S_n = m mod h), length h
    dw_partial_products: np.ndarray  # shape (h-1, n): |prod_{k<=j} E e^{2 pi i r X_k / h}|
    rozanov_partial_products: np.ndarray  # length n


def aud_diagnostics(ps: LatticePmf | Sequence[LatticePmf], n: int, h: int) -> ResidueDiagnostics:
    """Residue distribution of S_n mod h plus the two classical product criteria.

    Accepts a single pmf (i.i.d., repeated n times) or a length-n sequence.
    The first product family tracks |prod_k E exp(2 pi i r X_k / h)| for each
    r = 1..h-1; the second is the running product of the largest residue-class
    mass of each summand.
    """
    if h < 2:
        raise PreconditionError("h >= 2 required")
    seq = [ps] * n if isinstance(ps, LatticePmf) else list(ps)
    if len(seq) != n:
        raise PreconditionError("need exactly n summand laws")
    # residue law of the sum, folded mod h step by step
    res = np.zeros(h)
    res[0] = 1.0
    dw = np.empty((h - 1, n))
    roz = np.empty(n)
    dw_acc = np.ones(h - 1)
    roz_acc = 1.0
    for j, pj in enumerate(seq):
        if pj.v0 != 0.0 or pj.D != 1.0:
            raise PreconditionError("integer-valued form required (v0=0, D=1)")
        supp = pj.support
        w = pj.dense[supp - pj.offset]
        step = np.zeros(h)
        np.add.at(step, supp % h, w)
        new = np.zeros(h)
        for r in range(h):
            if step[r]:
                new += step[r] * np.roll(res, r)
        res = new
        t = 2.0 * math.pi * np.arange(1, h) / h
        dw_acc = dw_acc * np.abs(char_fn(pj, t))
        dw[:, j] = dw_acc
        roz_acc *= float(step.max())
        roz[j] = roz_acc
    return ResidueDiagnostics(h=h, n=n, residues=res,
                              dw_partial_products=dw,
                              rozanov_partial_products=roz)
