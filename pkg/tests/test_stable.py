import math

import numpy as np
import pytest

from llt_lab.approx import (
    StableParams,
    doney_ratio,
    stable_density,
    stable_density_mass,
    stable_llt_error,
)
from llt_lab.errors import PreconditionError, UnsupportedParameterError
from llt_lab.lattice import moments, power_tail


def levy_density(x: float) -> float:
    """Closed form for the alpha = 1/2 one-sided limit: scale pi/2."""
    if x <= 0:
        return 0.0
    return 0.5 * x**-1.5 * math.exp(-math.pi / (4.0 * x))


@pytest.fixture(scope="module")
def half_params():
    return StableParams(alpha=0.5)


def test_inversion_matches_closed_form(half_params):
    for x in (0.2, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0):
        assert stable_density(half_params, x) == pytest.approx(levy_density(x), rel=1e-7)


def test_density_vanishes_on_negatives(half_params):
    for x in (-5.0, -1.0, -0.25):
        assert stable_density(half_params, x) == pytest.approx(0.0, abs=1e-4)


def test_density_nonnegative_on_grid(half_params):
    grid = np.linspace(-2.0, 30.0, 400)
    vals = [stable_density(half_params, float(x)) for x in grid]
    assert min(vals) >= 0.0


def test_density_mass_near_one(half_params):
    assert stable_density_mass(half_params) == pytest.approx(1.0, abs=1e-4)
    assert stable_density_mass(StableParams(alpha=0.7)) == pytest.approx(1.0, abs=1e-4)


def test_alpha_one_rejected():
    with pytest.raises(UnsupportedParameterError):
        StableParams(alpha=1.0)


def test_symmetric_variant_is_even(half_params):
    sym = StableParams(alpha=0.5, one_sided=False)
    for x in (0.5, 1.5, 3.0):
        assert stable_density(sym, x) == pytest.approx(stable_density(sym, -x), rel=1e-9)


@pytest.fixture(scope="module")
def half_tail_pmf():
    return power_tail(0.5, max_index=250_000)


def test_stable_llt_error_decreasing(half_tail_pmf):
    errs = [stable_llt_error(half_tail_pmf, n, x_max=60.0).error for n in (8, 16, 32, 64)]
    assert errs[0] > errs[1] > errs[2] > errs[3]


def test_stable_llt_baseline_and_uniform_bound(half_tail_pmf):
    rep1 = stable_llt_error(half_tail_pmf, 1, x_max=60.0)
    assert math.isfinite(rep1.error) and rep1.error > 0
    sups = [stable_llt_error(half_tail_pmf, n, x_max=60.0).exact for n in (1, 8, 32)]
    assert max(sups) < 10.0  # uniform boundedness of B_n P(S_n = m)


def test_stable_llt_requires_family():
    from llt_lab.lattice import bernoulli

    with pytest.raises(PreconditionError):
        stable_llt_error(bernoulli(0.5), 8)


# -- heavy-tail point ratio ------------------------------------------------------------


@pytest.fixture(scope="module")
def tail15():
    return power_tail(1.5, max_index=200_000)


def test_doney_ratio_trend_to_one(tail15):
    n = 32
    ratios = []
    for mult in (8, 32, 128, 512):
        m = int(mult * n)
        ratios.append(doney_ratio(tail15, n, m))
    gaps = [abs(r - 1.0) for r in ratios]
    assert gaps[-1] < 0.05
    assert gaps[-1] < gaps[0]
    assert all(r > 0 and math.isfinite(r) for r in ratios)


def test_doney_ratio_n1_identity():
    # S_1 = X: ratio is exactly 1 at every support point of a centered law
    from llt_lab.lattice import LatticePmf

    p = LatticePmf(0.0, 1.0, {-2: 0.2, -1: 0.1, 0: 0.3, 1: 0.15, 2: 0.25})
    mu = moments(p).mu
    for m in (1, 2):
        if m >= (mu + 0.5):
            assert doney_ratio(p, 1, m, eps=0.5) == pytest.approx(1.0, abs=1e-12)


def test_doney_ratio_preconditions(tail15):
    with pytest.raises(PreconditionError):
        doney_ratio(tail15, 32, 10)   # m below (mu+eps) n
    from llt_lab.lattice import LatticePmf

    q = LatticePmf(0.0, 1.0, {0: 0.5, 2: 0.5})
    with pytest.raises(PreconditionError, match="zero denominator"):
        doney_ratio(q, 2, 5, mu=0.0, eps=0.1)
