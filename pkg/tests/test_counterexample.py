import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quenchlab.counterexample import (
    HH_PREFACTOR, params, realize, empirical_conditional_norms, series_cond21,
    series_gordin_lowerbound, series_hh_lowerbound, series_mw_lowerbound, series_summary,
)
from quenchlab.errors import EnumerationSizeError, InvalidInputError
from quenchlab.series import CONVERGENT_CERTIFIED, DIVERGENT_EVIDENCE


# -------------------------------------------------------------- parameters

def test_params_level_one():
    lv = params(1).level(1)
    assert lv == {"N": 4, "rho": Fraction(1, 4), "theta": Fraction(1, 2), "eps": Fraction(1, 64)}


def test_params_level_two():
    lv = params(2).level(2)
    assert lv == {"N": 16, "rho": Fraction(1, 16), "theta": Fraction(1, 8), "eps": Fraction(1, 16384)}


@pytest.mark.parametrize("K", [0, -1, 13])
def test_params_range(K):
    with pytest.raises(InvalidInputError):
        params(K)


@given(st.integers(1, 12))
def test_exact_identities(K):
    par = params(K)
    for i in range(K):
        k = i + 1
        N, rho, theta = par.N[i], par.rho[i], par.theta[i]
        assert theta ** 2 * N ** 2 * rho == Fraction(1, k * k)
        assert theta * rho * 8 ** k == Fraction(1, k)          # N_k^{3/2} = 8^k
        assert 4 ** k * theta * Fraction(1, 2 ** k) == Fraction(1, k)  # sqrt(rho_k) = 2^-k
        assert 1 / rho == N and N == 4 ** k


# ------------------------------------------------------------------ series

def test_cond21_terms_exact():
    rep = series_cond21(100)
    assert rep.info["exact_terms"][:3] == ["1", "1/4", "1/9"]
    assert all(Fraction(t) == Fraction(1, (i + 1) ** 2) for i, t in enumerate(rep.info["exact_terms"]))
    assert abs(rep.partial_sums[-1] - math.pi ** 2 / 6) < 0.01
    assert rep.verdict == CONVERGENT_CERTIFIED
    assert rep.tail_bound == pytest.approx(0.01)


def test_cond21_single_term():
    assert series_cond21(1).partial_sums[-1] == 1.0


def test_gordin_terms_harmonic():
    rep = series_gordin_lowerbound(50)
    assert [Fraction(t) for t in rep.info["exact_terms"]] == [Fraction(1, k) for k in range(1, 50)]
    assert series_gordin_lowerbound(2).partial_sums[-1] == 1.0
    assert rep.verdict == DIVERGENT_EVIDENCE


@given(st.integers(2, 200))
def test_gordin_harmonic_block(K):
    S = series_gordin_lowerbound(2 * K + 1).partial_sums
    assert S[2 * K - 1] - S[K - 1] >= 0.5
    assert S[K - 2] >= math.log(K) - 1.0


def test_mw_inner_sums():
    rep = series_mw_lowerbound(64)
    assert rep.info["inner_exact"][8] == "4"
    assert rep.info["inner_exact"][32] == "8"
    # n = 7 has no active level, n = 8 has inner sum 4
    assert rep.terms[6] == 0.0
    assert rep.terms[7] == pytest.approx(2.0 / 8 ** 1.5, rel=1e-15)


def test_mw_doubling():
    rep = series_mw_lowerbound(4096)
    d = rep.info["doubling"]
    assert d[4096] > 0.9 * d[2048]
    assert rep.verdict == DIVERGENT_EVIDENCE


def test_mw_small_rejected():
    with pytest.raises(InvalidInputError):
        series_mw_lowerbound(7)


def test_hh_terms_and_prefactor():
    rep = series_hh_lowerbound(30)
    assert [Fraction(t) for t in rep.info["exact_terms"]] == [Fraction(1, k) for k in range(1, 31)]
    assert rep.info["prefactor"] == pytest.approx(0.8165, abs=1e-4)
    assert HH_PREFACTOR == math.sqrt(2) / math.sqrt(3)
    assert series_hh_lowerbound(1).partial_sums[-1] == 1.0


@pytest.mark.parametrize("K", [1, 2, 5, 12])
def test_verdicts_never_reversed(K):
    reps = series_summary(K)
    assert reps["covariance_summability"].verdict == CONVERGENT_CERTIFIED
    for key in ("gordin_l1", "maxwell_woodroofe", "hannan_heyde"):
        assert reps[key].verdict == DIVERGENT_EVIDENCE


# ------------------------------------------------------------- realization

def test_realize_size_limit():
    with pytest.raises(EnumerationSizeError):
        realize(9, 0)
    with pytest.raises(InvalidInputError):
        realize(0, 0)


@pytest.mark.parametrize("K", [1, 4, 8])
def test_realize_properties(K):
    sys_ = realize(K, 3)
    mu = sys_.measures()
    assert mu[0] == 0.25
    for k in range(1, K + 1):
        rho, eps = sys_.rho[k - 1], sys_.eps[k - 1]
        assert 2 * rho / 3 <= mu[k - 1] <= rho
        drift = 2 * sys_.N[k - 1] * sys_.alpha
        assert drift <= eps / 4
        # slack of at least half the allowed defect
        assert sys_.max_drift_defect(k) <= 0.5 * eps
    # disjoint arcs
    ends = sys_.arc_starts + sys_.rho
    assert np.all(ends[:-1] <= sys_.arc_starts[1:])
    assert ends[-1] <= 1.0


def test_membership_disjoint_by_sampling():
    sys_ = realize(5, 1)
    ph = np.random.default_rng(0).random(200_000)
    lev = sys_.membership(ph)
    for k in range(1, 6):
        frac = np.mean(lev == k)
        assert abs(frac - sys_.rho[k - 1]) < 4 * math.sqrt(sys_.rho[k - 1] / ph.size)


def test_f_values_level_one():
    sys_ = realize(1, 0)
    seen = set()
    rng = np.random.default_rng(2)
    for _ in range(400):
        window = np.where(rng.random(9) < 0.5, -1.0, 1.0)
        v = sys_.f_value(phase=0.1, window=window)
        assert v == 0.5 * window[5:9].sum()
        seen.add(v)
    assert seen <= {-2.0, -1.0, 0.0, 1.0, 2.0}
    assert sys_.f_value(phase=0.6, window=window) == 0.0


# --------------------------------------------------------------- E_0(S_n)

@pytest.mark.parametrize("n", [1, 2, 3])
def test_conditional_bound_small_n(n):
    sys_ = realize(1, 4)
    est = empirical_conditional_norms(sys_, [n], 2000, 11)
    assert est["mean"][0] <= 2 * n


def test_conditional_deterministic():
    sys_ = realize(3, 0)
    a = empirical_conditional_norms(sys_, [16, 64], 500, 5)
    b = empirical_conditional_norms(sys_, [16, 64], 500, 5)
    assert a == b


@pytest.mark.parametrize("n", [0, 129])
def test_conditional_grid_checked(n):
    with pytest.raises(InvalidInputError):
        empirical_conditional_norms(realize(3, 0), [n], 100, 0)


def test_conditional_growth_with_K():
    # ln(K - 1) growth is slow; R = 5e4 separates consecutive levels by > 2 SE
    R = 50_000
    est = {K: empirical_conditional_norms(realize(K, 0), [4 ** K], R, 100 + K) for K in (3, 4, 5)}
    for a, b in ((3, 4), (4, 5)):
        gap = est[b]["mean"][0] - est[a]["mean"][0]
        se = math.hypot(est[a]["stderr"][0], est[b]["stderr"][0])
        assert gap > 2 * se
