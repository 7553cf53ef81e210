import csv
import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import ndtr

from quenchlab.errors import InvalidInputError, ReplicaError, UnsupportedOperationError
from quenchlab.finite_chain import eta_exact
from quenchlab.intermittent import ObservableSpec
from quenchlab.quenched_mc import (
    DonskerPath, Ensemble, FiniteChainSampler, IIDSampler, UlamChainSampler, ZeroSampler,
    block_diagnostics_mc, fidis_report, path_modulus, quenched_clt_report, run_replicas,
    tightness_report, variance_growth_scan, write_tightness_csv,
)


# ------------------------------------------------------------- Donsker path

def test_donsker_knots_exact():
    x = np.random.default_rng(0).normal(size=97)
    W = DonskerPath(x)
    S = np.concatenate([[0.0], np.cumsum(x)])
    for k in range(98):
        assert W(k / 97) == S[k] / math.sqrt(97)
    assert W(0.0) == 0.0


def test_donsker_interpolates():
    W = DonskerPath([1.0, 3.0])
    assert W(0.75) == pytest.approx((1.0 + 0.5 * 3.0) / math.sqrt(2))


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=40), st.floats(0, 1))
def test_donsker_continuous(x, t):
    W = DonskerPath(x)
    eps = 1e-9
    lo, hi = max(t - eps, 0.0), min(t + eps, 1.0)
    assert abs(W(hi) - W(lo)) <= (max(map(abs, x)) + 1e-12) * math.sqrt(len(x)) * 3 * eps + 1e-12


# ------------------------------------------------------------------ modulus

def test_modulus_zero_paths():
    assert np.all(path_modulus(np.zeros((3, 65)), 4) == 0.0)


@pytest.mark.parametrize("n,m", [(64, 4), (100, 7), (4096, 64), (10, 3)])
def test_modulus_linear_path(n, m):
    # W_n(t) = t needs increments 1/sqrt(n)
    W = DonskerPath(np.full(n, 1.0 / math.sqrt(n)))
    assert W.modulus(m) == pytest.approx(1.0 / m, rel=1e-12)


def test_modulus_against_brute_force():
    rng = np.random.default_rng(5)
    x = rng.normal(size=23)
    W = DonskerPath(x)
    for m in (2, 3, 5, 7):
        grid = np.linspace(0, 1, 4001)
        vals = W(grid)
        brute = 0.0
        for i, t in enumerate(grid):
            s = np.clip(t + 1.0 / m, 0, 1)
            j = np.searchsorted(grid, s, side="right")
            brute = max(brute, np.max(np.abs(vals[i:j] - vals[i])), abs(W(float(s)) - vals[i]))
        assert W.modulus(m) >= brute - 1e-12
        assert W.modulus(m) <= brute + 0.02


# -------------------------------------------------------------- replicas

def test_zero_sampler():
    ens = run_replicas(ZeroSampler(), 0, 64, 100, 1)
    assert np.all(ens.s_n == 0.0)


def test_determinism(two_state):
    a = run_replicas(FiniteChainSampler(two_state), 0, 256, 300, 7, m_grid=(4,))
    b = run_replicas(FiniteChainSampler(two_state), 0, 256, 300, 7, m_grid=(4,))
    np.testing.assert_array_equal(a.s_n, b.s_n)
    np.testing.assert_array_equal(a.skeleton, b.skeleton)
    np.testing.assert_array_equal(a.moduli[4], b.moduli[4])


def test_grouping_does_not_matter(two_state):
    a = run_replicas(FiniteChainSampler(two_state), 1, 128, 300, 3)
    b = run_replicas(FiniteChainSampler(two_state), 1, 128, 300, 3, m_grid=(4,), memory_budget=129 * 7)
    np.testing.assert_array_equal(a.s_n, b.s_n)
    c = run_replicas(FiniteChainSampler(two_state), 1, 128, 300, 3, keep_paths=True)
    np.testing.assert_array_equal(b.moduli[4], path_modulus(c.paths, 4))


def test_iid_normal_mean():
    R = 10_000
    ens = run_replicas(IIDSampler(), 0.0, 64, R, 2)
    assert abs(np.mean(ens.s_n / 8.0)) < 3.0 / math.sqrt(R)


def test_size_precondition():
    with pytest.raises(InvalidInputError):
        run_replicas(ZeroSampler(), 0, 64, 50, 1)
    with pytest.raises(InvalidInputError):
        run_replicas(ZeroSampler(), 0, 8, 100, 1)


def test_sampler_failure_carries_index():
    class Broken(ZeroSampler):
        def step(self, states, u):
            raise RuntimeError("boom")

    with pytest.raises(ReplicaError) as info:
        run_replicas(Broken(), 0, 32, 100, 1)
    assert info.value.index == 0


def test_csv_dump(two_state, tmp_path):
    ens = run_replicas(FiniteChainSampler(two_state), 0, 32, 100, 1)
    path = tmp_path / "r.csv"
    ens.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["replica", "S_n", "S_n/sqrt(n)"]
    assert len(rows) == 101


# ----------------------------------------------------------------- CLT/KS

def test_iid_normal_ks_within_band():
    ens = run_replicas(IIDSampler(), 0.0, 16, 5000, 4)
    rep = quenched_clt_report(ens, 1.0)
    assert rep.passed and rep.ks < rep.ks_null_band


def test_degenerate_ensemble_flagged():
    c = 0.7
    ens = Ensemble.from_increments(np.full((200, 1), c))
    rep = quenched_clt_report(ens, 2.0)
    phi = ndtr(c / math.sqrt(2.0))
    assert rep.ks == pytest.approx(max(phi, 1 - phi), abs=1e-15)
    assert not rep.passed


def test_negative_eta_rejected():
    ens = Ensemble.from_increments(np.ones((10, 2)))
    with pytest.raises(InvalidInputError):
        quenched_clt_report(ens, -1.0)


def test_zero_eta_degenerate_branch():
    rep = quenched_clt_report(run_replicas(ZeroSampler(), 0, 32, 100, 1), 0.0)
    assert rep.passed


def test_band_widened_for_estimated_eta():
    ens = Ensemble.from_increments(np.random.default_rng(1).normal(size=(400, 4)))
    plain = quenched_clt_report(ens, 1.0)
    wide = quenched_clt_report(ens, 1.0, eta_stderr=0.05)
    assert wide.ks_null_band > plain.ks_null_band


def test_two_state_quenched_clt(two_state):
    ens = run_replicas(FiniteChainSampler(two_state), 0, 4096, 20000, 2024)
    rep = quenched_clt_report(ens, eta_exact(two_state)[0])
    assert rep.ks < 0.02
    # the standardized ensemble gives the same statistic against N(0, 1)
    std = dataclasses.replace(ens, s_n=ens.s_n / math.sqrt(3.0))
    assert quenched_clt_report(std, 1.0).ks == pytest.approx(rep.ks, abs=1e-12)


def test_replica_order_independence(two_state):
    ens = run_replicas(FiniteChainSampler(two_state), 0, 64, 500, 9)
    perm = np.random.default_rng(0).permutation(500)
    shuffled = dataclasses.replace(ens, s_n=ens.s_n[perm])
    a, b = quenched_clt_report(ens, 3.0), quenched_clt_report(shuffled, 3.0)
    assert a.ks == b.ks and a.mean == b.mean and a.variance_ratio == b.variance_ratio


# ------------------------------------------------------------------- fidis

def test_fidis_single_time_matches_clt(two_state):
    ens = run_replicas(FiniteChainSampler(two_state), 0, 512, 1000, 5)
    fd = fidis_report(ens, [1.0], [1.0], 3.0)
    assert fd["ks"] == quenched_clt_report(ens, 3.0).ks


def test_fidis_iid_variance_target():
    ens = run_replicas(IIDSampler(), 0.0, 256, 2000, 6, skeleton=[0, 128, 129, 256])
    fd = fidis_report(ens, [0.5, 1.0], [1.0, 1.0], 1.0)
    assert fd["variance_target"] == 1.0
    cov = np.asarray(fd["covariance"])
    np.testing.assert_allclose(cov, cov.T)
    assert np.all(np.linalg.eigvalsh(cov) >= -1e-9)
    assert fd["max_offdiag_corr"] < 0.1


@pytest.mark.parametrize("times", [[1.0, 0.5], [0.0, 1.0], [0.5, 1.5]])
def test_fidis_bad_times(times):
    ens = Ensemble.from_increments(np.ones((10, 4)))
    with pytest.raises(InvalidInputError):
        fidis_report(ens, times, [1.0, 1.0], 1.0)


# --------------------------------------------------------------- tightness

def test_tightness_iid():
    ens = run_replicas(IIDSampler(), 0.0, 2 ** 14, 400, 8, m_grid=(4, 64))
    tab = tightness_report(ens, [4, 64])
    assert tab["q95"][1] < tab["q95"][0]
    assert tab["decreasing"]
    assert all(s > 0 for s in tab["stderr"])


def test_tightness_zero_and_csv(tmp_path):
    ens = run_replicas(ZeroSampler(), 0, 64, 100, 1, m_grid=(2, 8))
    tab = tightness_report(ens)
    assert tab["q95"] == [0.0, 0.0]
    write_tightness_csv(tab, tmp_path / "t.csv")
    assert next(csv.reader(open(tmp_path / "t.csv"))) == ["m", "q95", "stderr"]


def test_modulus_requires_paths():
    ens = run_replicas(ZeroSampler(), 0, 64, 100, 1)
    with pytest.raises(InvalidInputError):
        ens.modulus(4)


# ------------------------------------------------------------------ blocks

def test_blocks_mc_iid_kernel():
    bd = block_diagnostics_mc(IIDSampler([1.0, -1.0]), 0, 4, 16, (0.5,), 500, 1)
    assert bd.c1_stat <= 3 * bd.stderr["c1_stat"] + 1e-15
    assert bd.c2_stats[0] == pytest.approx(0.0, abs=1e-12)


def test_blocks_mc_zero():
    bd = block_diagnostics_mc(ZeroSampler(), 0, 4, 8, (0.5,), 200, 1)
    assert bd.c1_stat == 0 and bd.c2_stats == (0.0, 0.0)
    assert all(v == 0 for v in bd.c3_stat.values()) and all(v == 0 for v in bd.c4_stat.values())


def test_blocks_mc_needs_kernel_model():
    with pytest.raises(UnsupportedOperationError):
        block_diagnostics_mc(IIDSampler(), 0.0, 4, 8)


def test_blocks_mc_matches_exact_on_chain(two_state):
    from quenchlab.finite_chain import block_diagnostics_exact

    ex = block_diagnostics_exact(two_state, 0, 4, 3, (0.5,), 4000, 2)
    mc = block_diagnostics_mc(FiniteChainSampler(two_state), 0, 4, 3, (0.5,), 4000, 2)
    assert abs(mc.c1_stat - ex.c1_stat) <= 4 * mc.stderr["c1_stat"] + 1e-12
    assert abs(mc.c2_stats[0] - ex.c2_stats[0]) <= 4 * mc.stderr["c2_stats"][0] + 1e-12


def test_blocks_mc_intermittent_c3_trend(ulam_model):
    sampler = UlamChainSampler(ulam_model, ObservableSpec.indicator(0.5))
    c3 = [block_diagnostics_mc(sampler, 0.3, m, 128, (0.5,), 2000, 3).c3_stat[0.5] for m in (4, 8, 16)]
    assert c3[0] > c3[1] > c3[2]


# ---------------------------------------------------------- variance growth

def test_variance_growth_iid():
    scan = variance_growth_scan(IIDSampler(), 0.0, [64, 128, 256, 512, 1024], 4000, 3)
    assert abs(scan["slope"]) < 3 * max(scan["slope_stderr"], max(scan["stderr"]))


def test_variance_growth_zero():
    scan = variance_growth_scan(ZeroSampler(), 0, [16, 32, 64], 100, 1)
    assert scan["var_over_n"] == [0.0, 0.0, 0.0]


def test_variance_growth_grid_checked():
    with pytest.raises(InvalidInputError):
        variance_growth_scan(ZeroSampler(), 0, [64, 32], 100, 1)
