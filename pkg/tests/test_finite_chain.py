import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quenchlab.errors import (
    EnumerationSizeError, InvalidInputError, NotIrreducibleError, PeriodicChainError,
)
from quenchlab.finite_chain import (
    FiniteChain, _simulate, alpha_coeffs, block_diagnostics_exact, cond21_series, enumerate_paths,
    ergodic_checks, eta_exact, gordin_l1_stats, hh_series, max_inequality_bruteforce, mw_series,
    sample_path, stationary,
)
from quenchlab.series import CONVERGENT_CERTIFIED


@st.composite
def kernels(draw, n_min=2, n_max=5):
    n = draw(st.integers(n_min, n_max))
    rows = draw(st.lists(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n), min_size=n, max_size=n))
    K = np.array(rows)
    return K / K.sum(axis=1, keepdims=True)


@st.composite
def chains(draw, n_min=2, n_max=5):
    K = draw(kernels(n_min, n_max))
    f = draw(st.lists(st.floats(-3, 3, allow_nan=False), min_size=len(K), max_size=len(K)))
    return FiniteChain(K, f)


# -------------------------------------------------------------- stationary

def test_stationary_two_state():
    np.testing.assert_allclose(stationary([[0.75, 0.25], [0.25, 0.75]]), [0.5, 0.5], atol=1e-15)


def test_stationary_doubly_stochastic():
    P = np.array([[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]])
    np.testing.assert_allclose(stationary(P), np.full(3, 1 / 3), atol=1e-14)


def test_stationary_absorbing_raises():
    with pytest.raises(NotIrreducibleError):
        stationary([[1.0, 0.0], [0.5, 0.5]])


@given(kernels())
def test_stationary_is_fixed(K):
    pi = stationary(K)
    assert abs(pi.sum() - 1) < 1e-12
    np.testing.assert_allclose(pi @ K, pi, atol=1e-13)


def test_kernel_validation():
    with pytest.raises(InvalidInputError):
        FiniteChain([[0.5, 0.6], [0.5, 0.5]], [1, -1])
    with pytest.raises(InvalidInputError):
        FiniteChain([[0.5, 0.5], [0.5, 0.5]], [1, -1, 0])


def test_chain_json_roundtrip(two_state):
    text = two_state.to_json()
    assert set(json.loads(text)) == {"kernel", "f", "labels"}
    back = FiniteChain.from_json(text)
    np.testing.assert_array_equal(back.kernel, two_state.kernel)
    np.testing.assert_array_equal(back.f, two_state.f)


@pytest.mark.parametrize("text", ["not json", '{"f": [1]}', '{"kernel": [[1]], "f": "x"}'])
def test_chain_json_malformed(text):
    with pytest.raises(InvalidInputError):
        FiniteChain.from_json(text)


# --------------------------------------------------------------------- eta

def test_eta_two_state(two_state):
    eta, rep = eta_exact(two_state)
    assert abs(eta - 3.0) < 1e-10
    assert rep.verdict == CONVERGENT_CERTIFIED


def test_eta_iid_rows():
    K = np.tile([0.2, 0.3, 0.5], (3, 1))
    chain = FiniteChain(K, [2.0, -1.0, 0.5])
    eta, _ = eta_exact(chain)
    assert eta == pytest.approx(float(chain.pi @ chain.f ** 2), abs=1e-14)


def test_eta_zero_observable(two_state):
    assert eta_exact(two_state.with_observable([0.0, 0.0]))[0] == 0.0


def test_eta_periodic_raises():
    with pytest.raises(PeriodicChainError):
        eta_exact(FiniteChain([[0.0, 1.0], [1.0, 0.0]], [1.0, -1.0]))


@given(chains(), st.floats(0.1, 10.0))
def test_eta_scales_quadratically(chain, c):
    eta = eta_exact(chain)[0]
    eta_c = eta_exact(chain.with_observable(c * chain.f_raw))[0]
    assert eta_c == pytest.approx(c * c * eta, rel=1e-8, abs=1e-10)
    assert eta >= -1e-9


# ---------------------------------------------------------- cond21 series

def test_cond21_two_state(two_state):
    rep = cond21_series(two_state, 60)
    np.testing.assert_allclose(rep.terms, 2.0 ** -np.arange(len(rep.terms)), rtol=1e-13)
    assert abs(rep.total - 2.0) < 1e-10


def test_cond21_iid(iid_rademacher):
    rep = cond21_series(iid_rademacher, 20)
    assert rep.total == pytest.approx(1.0, abs=1e-15)


def test_cond21_zero(two_state):
    assert cond21_series(two_state.with_observable([0, 0]), 10).total == 0.0


@given(chains())
def test_cond21_dominates_covariances(chain):
    rep = cond21_series(chain, 40)
    v = chain.f.copy()
    for k in range(len(rep.terms)):
        assert abs(float(chain.pi @ (chain.f * v))) <= rep.terms[k] + 1e-12
        v = chain.apply(v)
    eta = eta_exact(chain)[0]
    # eta = term_0 + 2 sum_{k>=1} cov_k, bounded by 2 * cond21 - term_0
    assert abs(eta) <= 2.0 * (rep.total + (rep.tail_bound or 0.0)) - rep.terms[0] + 1e-9


# -------------------------------------------------------------- MW and HH

def test_mw_two_state(two_state):
    rep = mw_series(two_state, 200)
    n = np.arange(1, 201)
    direct = (1.0 - 2.0 ** -n) / n ** 1.5
    np.testing.assert_allclose(rep.terms, direct, rtol=1e-12)
    assert rep.start_index == 1


def test_mw_martingale(mds_chain):
    assert np.all(np.abs(mw_series(mds_chain, 50).terms) < 1e-15)


def test_hh_two_state(two_state):
    rep = hh_series(two_state, 80)
    np.testing.assert_allclose(rep.terms[:40], math.sqrt(3) / 2 * 2.0 ** -np.arange(40), rtol=1e-10)
    assert abs(rep.total - math.sqrt(3)) < 1e-8


def test_hh_martingale(mds_chain):
    rep = hh_series(mds_chain, 20)
    assert rep.terms[0] == pytest.approx(math.sqrt(float(mds_chain.pi @ mds_chain.f ** 2)), rel=1e-12)
    assert np.all(rep.terms[1:] < 1e-7)


@pytest.mark.parametrize("fn", [mw_series, hh_series])
def test_projective_zero(two_state, fn):
    assert fn(two_state.with_observable([0, 0]), 20).total == 0.0


@given(chains(), st.integers(0, 30))
def test_hh_telescopes(chain, N):
    rep = hh_series(chain, N + 1)
    v = chain.f.copy()
    for _ in range(N + 1):
        v = chain.apply(v)
    expect = float(chain.pi @ chain.f ** 2) - float(chain.pi @ v ** 2)
    assert float(np.sum(rep.terms[:N + 1] ** 2)) == pytest.approx(expect, abs=1e-10)


# ------------------------------------------------------------------ Gordin

def test_gordin_two_state(two_state):
    sup_norm, trace = gordin_l1_stats(two_state, 30, 500, 1)
    np.testing.assert_allclose(trace["l1_norms"], 1 - 2.0 ** -np.arange(1, 31), rtol=1e-14)
    assert sup_norm == pytest.approx(1.0, abs=1e-8)
    assert trace["stderr"][0] == 0.0  # |S_1| = 1 surely
    assert np.all(trace["stderr"][1:] > 0)


def test_gordin_martingale(mds_chain):
    assert gordin_l1_stats(mds_chain, 20, 200, 1)[0] < 1e-15


def test_gordin_zero(two_state):
    sup_norm, trace = gordin_l1_stats(two_state.with_observable([0, 0]), 10, 200, 1)
    assert sup_norm == 0.0
    assert np.all(trace["ratio"] == 0.0)


# ------------------------------------------------------------------- alpha

def test_alpha_two_state(two_state):
    a = alpha_coeffs(two_state, 20)
    assert all(a[k] == 2.0 ** (-k - 1) for k in range(21))


def test_alpha_iid():
    chain = FiniteChain(np.tile([0.3, 0.7], (2, 1)), [1, -1])
    assert np.all(alpha_coeffs(chain, 10)[1:] < 1e-15)


def test_alpha_rosenblatt_zero_lag(two_state):
    assert alpha_coeffs(two_state, 3, rosenblatt=True)[0] == 1.0


@given(chains(), st.floats(0.1, 10.0))
def test_alpha_invariant_under_observable_scaling(chain, c):
    a = alpha_coeffs(chain, 8)
    np.testing.assert_array_equal(a, alpha_coeffs(chain.with_observable(c * chain.f_raw), 8))
    assert np.all((a >= 0) & (a <= 1))


# ------------------------------------------------------------------ blocks

def test_blocks_iid_rademacher(iid_rademacher):
    bd = block_diagnostics_exact(iid_rademacher, 0, 4, 3, (0.5,), 500, 1, eta=1.0)
    assert bd.c1_stat == 0.0
    assert bd.c2_stats[0] == pytest.approx(0.0, abs=1e-14)


def test_blocks_zero(two_state):
    bd = block_diagnostics_exact(two_state.with_observable([0, 0]), 0, 4, 3, (0.5,), 200, 1)
    assert bd.c1_stat == 0.0 and bd.c2_stats == (0.0, 0.0)
    assert all(v == 0 for v in bd.c3_stat.values()) and all(v == 0 for v in bd.c4_stat.values())


def test_blocks_two_state_c1_tiny(two_state):
    bd = block_diagnostics_exact(two_state, 0, 8, 64, (0.5,), 200, 1)
    assert bd.c1_stat < 1e-10


def test_blocks_c1_decreases_in_p():
    chain = FiniteChain([[0.95, 0.04, 0.01], [0.03, 0.9, 0.07], [0.02, 0.08, 0.9]], [1.0, -0.5, 2.0])
    c1 = [block_diagnostics_exact(chain, 0, 4, p, (0.5,), 200, 1).c1_stat for p in (8, 16, 32, 64)]
    assert all(b < 0.9 * a for a, b in zip(c1, c1[1:]))


def test_blocks_c2_exact_matches_enumeration(two_state):
    # C2 deviations from the recursions equal a direct path-enumeration value
    m, p = 3, 2
    bd = block_diagnostics_exact(two_state, 0, m, p, (0.5,), 200, 1)
    states, probs = enumerate_paths(two_state, 0, m * p)
    eta = eta_exact(two_state)[0]
    X = two_state.f[states[:, 1:]]
    P = two_state.kernel

    def cond_sq(state, steps):
        # E(S_steps^2 | xi_0 = state) by enumeration
        s2, pr = enumerate_paths(two_state, state, steps)
        return float(pr @ two_state.f[s2[:, 1:]].sum(axis=1) ** 2)

    sq = {(s, p): cond_sq(s, p) for s in range(2)}
    total = np.zeros(len(probs))
    for i in range(1, m + 1):
        total += np.array([sq[(int(st_), p)] for st_ in states[:, (i - 1) * p]])
    first = abs(float(probs @ total) / (m * p) - eta)
    assert bd.c2_stats[0] == pytest.approx(first, rel=1e-10, abs=1e-12)
    assert X.shape == (len(probs), m * p) and P.shape == (2, 2)


def test_blocks_invalid(two_state):
    with pytest.raises(InvalidInputError):
        block_diagnostics_exact(two_state, 0, 1, 4)
    with pytest.raises(InvalidInputError):
        block_diagnostics_exact(two_state, 0, 4, 0)


# ------------------------------------------------------ maximal inequality

def test_maxineq_zero(two_state):
    assert max_inequality_bruteforce(two_state.with_observable([0, 0]), 0, 6, 0.0) == (0.0, 0.0)


def test_maxineq_large_lambda(two_state):
    lhs, rhs = max_inequality_bruteforce(two_state, 0, 6, 13.0)
    assert lhs == 0.0 and rhs >= 0.0


def test_maxineq_too_large():
    chain = FiniteChain(np.full((10, 10), 0.1), np.arange(10.0))
    with pytest.raises(EnumerationSizeError):
        max_inequality_bruteforce(chain, 0, 8, 0.0)


def test_maxineq_lhs_by_direct_enumeration(two_state):
    states, probs = enumerate_paths(two_state, 0, 5)
    S = np.cumsum(two_state.f[states[:, 1:]], axis=1)
    direct = float(probs @ np.maximum(np.abs(S).max(axis=1) - 0.5, 0) ** 2)
    assert max_inequality_bruteforce(two_state, 0, 5, 0.5)[0] == pytest.approx(direct, rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(chains(3, 3), st.integers(0, 2), st.sampled_from([0.0, 0.5, 1.3]), st.integers(0, 3))
def test_maxineq_holds(chain, x0, lam, k):
    lhs, rhs = max_inequality_bruteforce(chain, x0, 6, lam, k=k)
    assert lhs <= rhs + 1e-10


# ----------------------------------------------------------------- ergodic

def test_ergodic_two_state(two_state):
    rep = ergodic_checks(two_state, 0, two_state.f, 50, 400, 3)
    n = np.arange(1, 51)
    np.testing.assert_allclose(rep["erg"], (1 - 2.0 ** -n) / n, rtol=1e-12)
    assert rep["limit"] == 0.0


def test_ergodic_constant(two_state):
    rep = ergodic_checks(two_state, 1, [2.5, 2.5], 20, 200, 3)
    np.testing.assert_allclose(rep["erg"], 2.5, rtol=1e-14)


def test_ergodic_max_bounded(two_state):
    rep = ergodic_checks(two_state, 0, [1.0, -2.0], 200, 500, 3)
    assert np.all(rep["max_erg"] <= 2.0 + 1e-15)
    assert rep["max_decreasing"]


# ----------------------------------------------------------------- sampling

def test_sample_path_deterministic_chain():
    chain = FiniteChain([[0, 1, 0], [0, 0, 1], [1, 0, 0]], [1.0, 2.0, 3.0])
    states, X = sample_path(chain, 0, 7, 1)
    np.testing.assert_array_equal(states, [0, 1, 2, 0, 1, 2, 0, 1])
    np.testing.assert_array_equal(X, chain.f[states[1:]])


def test_sample_path_same_seed(two_state):
    a = sample_path(two_state, 0, 1000, 42)
    b = sample_path(two_state, 0, 1000, 42)
    np.testing.assert_array_equal(a[0], b[0])
    assert not np.array_equal(a[0], sample_path(two_state, 0, 1000, 43)[0])


def test_sample_path_occupation(two_state):
    states, _ = sample_path(two_state, 0, 10 ** 6, 2024)
    assert abs(np.mean(states[1:] == 0) - 0.5) < 0.002


def test_eta_matches_stationary_monte_carlo(two_state):
    n, R, seed = 4096, 20000, 11
    rng = np.random.default_rng(seed)
    starts = (rng.random(R) < two_state.pi[1]).astype(np.int64)
    S = np.zeros(R)

    def on_step(sl, k, states):
        S[sl] += two_state.f[states]

    _simulate(two_state, starts, n, seed, on_step)
    v = S.var(ddof=1) / n
    # standard error of a sample variance: sqrt((m4 - s^4) / R)
    se = math.sqrt(max(np.mean((S - S.mean()) ** 4) - S.var() ** 2, 0) / R) / n
    eta = eta_exact(two_state)[0]
    assert abs(v - eta) < 3 * se
