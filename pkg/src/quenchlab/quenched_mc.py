"""Quenched Monte Carlo: replicated trajectories from a fixed start.

Every sampler advances a vector of replica states with exactly one uniform
per replica and step.  Replica ``r`` of a run seeded with ``seed`` draws its
uniforms from the stream ``(seed, r)``, so ensembles are bit-identical
whatever the grouping of replicas, and aggregate statistics are computed
from sorted values so they do not depend on replica order either.
"""
import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d
from scipy.special import ndtri

from ._rng import replica_rngs, uniform_block
from .errors import InvalidInputError, ReplicaError, UnsupportedOperationError
from .finite_chain import _block_vectors, _mean_se, eta_exact
from .intermittent import ObservableSpec, dual_step, eta_ulam
from .probkit import ks_distance, normal_cdf

__all__ = [
    "KernelModel",
    "FiniteChainSampler",
    "UlamChainSampler",
    "IIDSampler",
    "ZeroSampler",
    "Ensemble",
    "DonskerPath",
    "QuenchedReport",
    "run_replicas",
    "quenched_clt_report",
    "fidis_report",
    "tightness_report",
    "block_diagnostics_mc",
    "variance_growth_scan",
    "path_modulus",
    "KS_COEFF",
]

KS_COEFF = 1.36
MEMORY_BUDGET = 2 ** 25
TIME_BLOCK = 1024


@dataclass
class KernelModel:
    """Transition kernel acting on per-state vectors.

    ``apply(v)`` returns ``K v``; ``index(states)`` maps sampler states to
    vector positions; ``f`` and ``f2`` are the centered observable and its
    square as seen by the kernel.
    """

    apply: object
    f: np.ndarray
    f2: np.ndarray
    index: object
    eta: object = None


class FiniteChainSampler:
    """Sampler for a ``FiniteChain``; states are integer labels."""

    def __init__(self, chain):
        self.chain = chain
        self.kernel_model = KernelModel(
            apply=chain.apply, f=chain.f, f2=chain.f ** 2,
            index=lambda s: np.asarray(s, dtype=np.int64),
            eta=lambda: eta_exact(chain)[0],
        )

    def initial(self, x0, count):
        x0 = int(x0)
        if not 0 <= x0 < self.chain.n_states:
            raise InvalidInputError("start state out of range")
        return np.full(count, x0, dtype=np.int64)

    def step(self, states, u):
        return self.chain.step(states, u)

    def observe(self, states):
        return self.chain.f[states]

    def with_observable(self, f):
        return FiniteChainSampler(self.chain.with_observable(f))

    def describe(self):
        return {"kind": "finite_chain", "n_states": self.chain.n_states}


class UlamChainSampler:
    """Backward chain of the intermittent map with kernel ``L_gamma``.

    The observable is evaluated at the exact states and centered by its
    mean under the discrete invariant law.
    """

    def __init__(self, model, obs):
        self.model = model
        self.obs = obs
        avg = obs.cell_averages(model)
        avg2 = obs.cell_averages(model, power=2)
        self.mean = model.nu(avg) if obs.centered else 0.0
        fc = avg - self.mean
        f2 = avg2 - 2.0 * self.mean * avg + self.mean ** 2
        self.kernel_model = KernelModel(
            apply=lambda v: model.dual @ v, f=fc, f2=f2, index=model.cell_of,
            eta=lambda: eta_ulam(model, obs)[0],
        )

    def initial(self, x0, count):
        x0 = float(x0)
        if not 0.0 <= x0 <= 1.0:
            raise InvalidInputError("start must lie in [0, 1]")
        return np.full(count, x0)

    def step(self, states, u):
        return dual_step(self.model, states, u)

    def observe(self, states):
        return self.obs(states, self.model) - self.mean

    def with_observable(self, obs):
        if not isinstance(obs, ObservableSpec):
            raise InvalidInputError("the intermittent sampler needs an ObservableSpec")
        return UlamChainSampler(self.model, obs)

    def describe(self):
        return {"kind": "intermittent", "gamma": self.model.gamma, "cells": self.model.n_cells,
                "grading": self.model.grading, "observable": self.obs.to_dict()}


class IIDSampler:
    """Independent increments: standard normal or a finite law.

    For a finite law the state is the atom index and a kernel model with
    identical rows is exposed.
    """

    def __init__(self, values=None, probs=None):
        if values is None:
            self.values = None
            self.kernel_model = None
            return
        v = np.asarray(values, dtype=float).ravel()
        p = np.full(v.size, 1.0 / v.size) if probs is None else np.asarray(probs, dtype=float).ravel()
        if v.size == 0 or p.shape != v.shape or np.any(p <= 0) or abs(p.sum() - 1) > 1e-12:
            raise InvalidInputError("need atoms with positive probabilities summing to 1")
        self.values = v - float(p @ v)
        self.probs = p
        self._cum = np.cumsum(p)
        self._cum[-1] = 2.0
        fc = self.values

        def apply(vec):
            return np.multiply.outer(np.ones(v.size), p @ vec)

        self.kernel_model = KernelModel(apply=apply, f=fc, f2=fc ** 2,
                                        index=lambda s: np.asarray(s, dtype=np.int64),
                                        eta=lambda: float(p @ fc ** 2))

    def initial(self, x0, count):
        return np.zeros(count, dtype=np.int64 if self.values is not None else float)

    def step(self, states, u):
        if self.values is None:
            return ndtri(u)
        return np.sum(self._cum[None, :] <= np.asarray(u)[:, None], axis=1)

    def observe(self, states):
        return states if self.values is None else self.values[states]

    def describe(self):
        if self.values is None:
            return {"kind": "iid_normal"}
        return {"kind": "iid_discrete", "values": self.values.tolist(), "probs": self.probs.tolist()}


class ZeroSampler:
    """Deterministic zero observable."""

    kernel_model = KernelModel(apply=lambda v: np.asarray(v, dtype=float) * 1.0,
                               f=np.zeros(1), f2=np.zeros(1),
                               index=lambda s: np.zeros(np.shape(s), dtype=np.int64),
                               eta=lambda: 0.0)

    def initial(self, x0, count):
        return np.zeros(count)

    def step(self, states, u):
        return states

    def observe(self, states):
        return np.zeros(len(states))

    def describe(self):
        return {"kind": "zero"}


def path_modulus(paths, m):
    """Exact ``sup_{|t-s| <= 1/m} |W_n(t) - W_n(s)|`` for stored partial sums.

    ``paths`` has shape ``(R, n + 1)`` with ``paths[:, k] = S_k``.  The
    difference ``W(t) - W(s)`` is linear on every grid cell, so the supremum
    is attained at knot pairs at most ``floor(n/m)`` apart or at pairs with
    one knot and the other point exactly ``1/m`` away.
    """
    paths = np.atleast_2d(np.asarray(paths, dtype=float))
    n = paths.shape[1] - 1
    m = int(m)
    if m < 1:
        raise InvalidInputError("m must be >= 1")
    lf, rem = divmod(n, m)
    frac = rem / m
    best = np.zeros(paths.shape[0])
    if lf >= 1:
        w = min(lf + 1, n + 1)
        rng = maximum_filter1d(paths, w, axis=1, mode="nearest") - minimum_filter1d(paths, w, axis=1, mode="nearest")
        best = rng.max(axis=1)
    if frac > 0:
        i = np.arange(0, n - lf)
        lo = paths[:, i + lf]
        hi = paths[:, i + lf + 1]
        forward = np.abs(lo + frac * (hi - lo) - paths[:, i]).max(axis=1)
        j = np.arange(lf + 1, n + 1)
        lo = paths[:, j - lf - 1]
        hi = paths[:, j - lf]
        backward = np.abs(paths[:, j] - (lo + (1.0 - frac) * (hi - lo))).max(axis=1)
        best = np.maximum(best, np.maximum(forward, backward))
    return best / math.sqrt(n)


def _snap_index(n, t):
    """``(k, frac)`` with ``n t = k + frac``; values within rounding of a knot snap to it."""
    x = n * float(t)
    k = round(x)
    if abs(x - k) <= 1e-9 * max(1.0, x):
        return int(k), 0.0
    k = math.floor(x)
    return int(k), x - k


class DonskerPath:
    """``W_n(t) = n^{-1/2} (S_[nt] + (nt - [nt]) X_{[nt]+1})``."""

    def __init__(self, increments):
        x = np.asarray(increments, dtype=float).ravel()
        if x.size == 0:
            raise InvalidInputError("need at least one increment")
        self.increments = x
        self.n = x.size
        self.partial_sums = np.concatenate([[0.0], np.cumsum(x)])

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < 0) or np.any(t > 1):
            raise InvalidInputError("t must lie in [0, 1]")
        out = np.empty(t.shape)
        for idx, tv in np.ndenumerate(t):
            k, frac = _snap_index(self.n, tv)
            s = self.partial_sums[k]
            if frac:
                s = s + frac * self.increments[k]
            out[idx] = s / math.sqrt(self.n)
        return float(out[0]) if out.size == 1 else out

    def knots(self):
        return self.partial_sums / math.sqrt(self.n)

    def modulus(self, m):
        return float(path_modulus(self.partial_sums[None, :], m)[0])


def _default_skeleton(n, points=256):
    base = np.floor(np.arange(points + 1) * n / points).astype(np.int64)
    return np.unique(np.clip(np.concatenate([base, base + 1]), 0, n))


@dataclass(eq=False)
class Ensemble:
    """Per-replica outputs of a quenched run.

    ``s_n`` holds ``S_n``; ``skeleton[:, j]`` holds ``S_k`` at
    ``k = skeleton_times[j]``; ``moduli[m]`` the exact path moduli;
    ``paths`` (optional) the full partial-sum paths; ``states[t]`` the
    replica states at time ``t`` when requested.
    """

    n: int
    replicas: int
    seed: int
    start: object
    sampler: dict
    s_n: np.ndarray
    skeleton_times: np.ndarray
    skeleton: np.ndarray
    moduli: dict = field(default_factory=dict)
    paths: np.ndarray = None
    states: dict = field(default_factory=dict)
    block_max: np.ndarray = None
    block_len: int = None

    @classmethod
    def from_increments(cls, increments, seed=None, start=None):
        """Ensemble from an explicit ``(R, n)`` increment table (paths kept)."""
        x = np.atleast_2d(np.asarray(increments, dtype=float))
        R, n = x.shape
        paths = np.concatenate([np.zeros((R, 1)), np.cumsum(x, axis=1)], axis=1)
        times = np.arange(n + 1)
        return cls(n=n, replicas=R, seed=seed, start=start, sampler={"kind": "explicit"},
                   s_n=paths[:, -1].copy(), skeleton_times=times, skeleton=paths, paths=paths)

    def partial_sums_at(self, k):
        if self.paths is not None:
            return self.paths[:, k]
        pos = np.searchsorted(self.skeleton_times, k)
        if pos >= len(self.skeleton_times) or self.skeleton_times[pos] != k:
            raise InvalidInputError(f"S_{k} was not recorded; add it to the skeleton")
        return self.skeleton[:, pos]

    def W(self, t):
        """``W_n(t)`` for every replica."""
        if not 0.0 <= t <= 1.0:
            raise InvalidInputError("t must lie in [0, 1]")
        k, frac = _snap_index(self.n, t)
        s = self.partial_sums_at(k)
        if frac:
            s = s + frac * (self.partial_sums_at(k + 1) - s)
        return s / math.sqrt(self.n)

    def modulus(self, m):
        if m in self.moduli:
            return self.moduli[m]
        if self.paths is None:
            raise InvalidInputError(f"modulus for m={m} was not computed and paths were not kept")
        return path_modulus(self.paths, m)

    def to_csv(self, path):
        """Columns ``replica, S_n, S_n/sqrt(n)``."""
        root = math.sqrt(self.n)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["replica", "S_n", "S_n/sqrt(n)"])
            for r, s in enumerate(self.s_n):
                w.writerow([r, repr(float(s)), repr(float(s / root))])


def run_replicas(sampler, x0, n, R, seed, *, m_grid=(), keep_paths=False, skeleton=None,
                 state_times=(), block_len=None, memory_budget=MEMORY_BUDGET, check_sizes=True):
    """Simulate ``R`` replicas of ``n`` steps from the fixed start ``x0``.

    Parameters
    ----------
    m_grid : iterable of int
        Path moduli to compute exactly (forces full paths per group).
    keep_paths : bool
        Keep all partial-sum paths in the ensemble (``R (n + 1)`` floats).
    skeleton : iterable of int, optional
        Times ``k`` at which ``S_k`` is stored (default: a 256-point grid).
    state_times : iterable of int
        Times at which replica states are stored.
    block_len : int, optional
        Track ``max_{(i-1)p <= j <= ip} |S_j - S_{(i-1)p}|`` for blocks of
        this length.
    """
    n, R = int(n), int(R)
    if check_sizes and (R < 100 or n < 16):
        raise InvalidInputError("need R >= 100 and n >= 16")
    if R < 1 or n < 1:
        raise InvalidInputError("need R >= 1 and n >= 1")
    seed = int(seed)
    m_grid = tuple(int(m) for m in m_grid)
    times = _default_skeleton(n) if skeleton is None else np.unique(np.asarray(list(skeleton), dtype=np.int64))
    if times.size and (times[0] < 0 or times[-1] > n):
        raise InvalidInputError("skeleton times must lie in [0, n]")
    state_times = sorted(set(int(t) for t in state_times))
    if state_times and (state_times[0] < 0 or state_times[-1] > n):
        raise InvalidInputError("state times must lie in [0, n]")
    need_path = keep_paths or bool(m_grid)
    if keep_paths and R * (n + 1) > 4 * memory_budget:
        raise InvalidInputError("keeping all paths would exceed the memory budget")
    group = R if not need_path else max(1, min(R, memory_budget // (n + 1)))
    group = min(group, 65536)

    s_n = np.empty(R)
    skel = np.empty((R, times.size))
    moduli = {m: np.empty(R) for m in m_grid}
    paths = np.empty((R, n + 1)) if keep_paths else None
    probe = sampler.initial(x0, 1)
    states_out = {t: np.empty(R, dtype=probe.dtype) for t in state_times}
    nblocks = -(-n // block_len) if block_len else 0
    bmax = np.zeros((R, nblocks)) if block_len else None
    skel_pos = {int(t): j for j, t in enumerate(times)}

    for a in range(0, R, group):
        b = min(R, a + group)
        try:
            rngs = replica_rngs(seed, a, b)
            states = sampler.initial(x0, b - a)
            S = np.zeros(b - a)
            X = np.empty((b - a, n)) if need_path else None
            if 0 in skel_pos:
                skel[a:b, skel_pos[0]] = 0.0
            if 0 in states_out:
                states_out[0][a:b] = states
            base = np.zeros(b - a)
            for t0 in range(0, n, TIME_BLOCK):
                width = min(TIME_BLOCK, n - t0)
                U = uniform_block(rngs, width)
                for j in range(width):
                    t = t0 + j + 1
                    states = sampler.step(states, U[:, j])
                    x = sampler.observe(states)
                    S += x
                    if need_path:
                        X[:, t - 1] = x
                    if t in skel_pos:
                        skel[a:b, skel_pos[t]] = S
                    if t in states_out:
                        states_out[t][a:b] = states
                    if block_len:
                        i = (t - 1) // block_len
                        np.maximum(bmax[a:b, i], np.abs(S - base), out=bmax[a:b, i])
                        if t % block_len == 0:
                            base = S.copy()
        except InvalidInputError:
            raise
        except Exception as exc:  # noqa: BLE001 - re-raised with the replica index
            raise ReplicaError(a, exc) from exc
        s_n[a:b] = S
        if need_path:
            P = np.empty((b - a, n + 1))
            P[:, 0] = 0.0
            np.cumsum(X, axis=1, out=P[:, 1:])
            for m in m_grid:
                moduli[m][a:b] = path_modulus(P, m)
            if keep_paths:
                paths[a:b] = P
    return Ensemble(n=n, replicas=R, seed=seed, start=x0, sampler=sampler.describe(), s_n=s_n,
                    skeleton_times=times, skeleton=skel, moduli=moduli, paths=paths,
                    states=states_out, block_max=bmax, block_len=block_len)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


@dataclass
class QuenchedReport:
    """Quenched CLT statistics for one start.

    ``ks`` compares ``S_n / sqrt(n)`` with ``N(0, eta_ref)``;
    ``ks_null_band`` is the 95% Kolmogorov band ``1.36 / sqrt(R)``, widened
    by ``1.96 * phi(1) * se(eta) / (2 eta)`` when ``eta_ref`` is itself an
    estimate with standard error ``eta_stderr``.
    """

    start: object
    n: int
    replicas: int
    seed: int
    eta_ref: float
    ks: float
    ks_null_band: float
    passed: bool
    mean: float = None
    mean_stderr: float = None
    variance_ratio: float = None
    eta_stderr: float = None
    fidis: dict = None
    tightness: dict = None
    variance_trace: dict = None
    sampler: dict = None
    condition: str = "quenched_clt"

    def to_dict(self):
        return _jsonable(self.__dict__)

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _sorted_moments(values):
    v = np.sort(np.asarray(values, dtype=float))
    mean = float(np.mean(v))
    var = float(np.var(v, ddof=1)) if v.size > 1 else 0.0
    return mean, var


def quenched_clt_report(ensemble, eta_ref, eta_stderr=None, degenerate_tol=1e-9):
    """KS comparison of ``S_n / sqrt(n)`` with ``N(0, eta_ref)``.

    For ``eta_ref = 0`` the test passes when every ``|S_n| / sqrt(n)`` is
    below ``degenerate_tol``.
    """
    eta_ref = float(eta_ref)
    if eta_ref < 0 or not math.isfinite(eta_ref):
        raise InvalidInputError("eta_ref must be a finite nonnegative number")
    values = ensemble.s_n / math.sqrt(ensemble.n)
    R = ensemble.replicas
    band = KS_COEFF / math.sqrt(R)
    if eta_stderr and eta_ref > 0:
        band += 1.96 * 0.24197072451914337 * float(eta_stderr) / (2.0 * eta_ref)
    ks = ks_distance(values, normal_cdf(math.sqrt(eta_ref)))
    mean, var = _sorted_moments(values)
    if eta_ref == 0:
        passed = bool(np.max(np.abs(values)) <= degenerate_tol)
        ratio = None
    else:
        passed = ks <= band
        ratio = var / eta_ref
    return QuenchedReport(start=ensemble.start, n=ensemble.n, replicas=R, seed=ensemble.seed,
                          eta_ref=eta_ref, ks=ks, ks_null_band=band, passed=passed, mean=mean,
                          mean_stderr=math.sqrt(var / R), variance_ratio=ratio,
                          eta_stderr=eta_stderr, sampler=ensemble.sampler)


def fidis_report(ensemble, times, a, eta_ref):
    """Law of ``sum_l a_l (W_n(t_l) - W_n(t_{l-1}))`` with ``t_0 = 0``.

    Compared by KS with ``N(0, eta_ref sum_l a_l^2 (t_l - t_{l-1}))``; also
    returns the empirical covariance and correlation of the increments and
    the largest off-diagonal correlation with its standard error
    ``(1 - rho^2) / sqrt(R - 1)``.
    """
    t = np.asarray(times, dtype=float).ravel()
    a = np.asarray(a, dtype=float).ravel()
    if t.size == 0 or a.shape != t.shape:
        raise InvalidInputError("times and weights must have the same nonzero length")
    if t[0] <= 0 or np.any(np.diff(t) <= 0) or t[-1] > 1:
        raise InvalidInputError("times must satisfy 0 < t_1 < ... < t_d <= 1")
    W = [np.zeros(ensemble.replicas)] + [ensemble.W(tv) for tv in t]
    incr = np.stack([W[l + 1] - W[l] for l in range(t.size)], axis=1)
    combo = incr[:, 0] * a[0]
    for l in range(1, t.size):
        combo = combo + a[l] * incr[:, l]
    dt = np.diff(np.concatenate([[0.0], t]))
    target = float(eta_ref) * float(np.sum(a * a * dt))
    ks = ks_distance(combo, normal_cdf(math.sqrt(target)))
    R = ensemble.replicas
    order = np.lexsort(incr.T[::-1])
    cov = np.atleast_2d(np.cov(incr[order], rowvar=False))
    sd = np.sqrt(np.diag(cov))
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = cov / np.outer(sd, sd)
    off = corr[~np.eye(t.size, dtype=bool)] if t.size > 1 else np.zeros(0)
    off = np.nan_to_num(off)
    max_off = float(np.max(np.abs(off))) if off.size else 0.0
    return {
        "condition": "finite_dimensional_laws",
        "times": t.tolist(),
        "a": a.tolist(),
        "variance_target": target,
        "ks": ks,
        "ks_null_band": KS_COEFF / math.sqrt(R),
        "covariance": cov,
        "correlation": corr,
        "max_offdiag_corr": max_off,
        "corr_stderr": (1.0 - max_off ** 2) / math.sqrt(max(R - 1, 1)),
        "increment_var_target": (float(eta_ref) * dt).tolist(),
    }


def _quantile_with_se(values, q=0.95):
    v = np.sort(np.asarray(values, dtype=float))
    R = v.size
    est = float(np.quantile(v, q))
    s = math.sqrt(q * (1 - q) / R)
    lo = v[max(0, min(R - 1, int(math.floor(R * (q - s)))))]
    hi = v[max(0, min(R - 1, int(math.ceil(R * (q + s))) - 1))]
    return est, float(0.5 * (hi - lo))


def tightness_report(ensemble, m_grid=None, q=0.95):
    """Empirical ``q``-quantile of the path modulus for each ``m``.

    Returns ``{"m": [...], "q95": [...], "stderr": [...], "decreasing": bool}``;
    ``decreasing`` says the quantiles strictly decrease along ``m_grid``.
    """
    m_grid = sorted(ensemble.moduli) if m_grid is None else [int(m) for m in m_grid]
    rows = [_quantile_with_se(ensemble.modulus(m), q) for m in m_grid]
    qs = [r[0] for r in rows]
    return {
        "condition": "tightness",
        "m": m_grid,
        "q95": qs,
        "stderr": [r[1] for r in rows],
        "decreasing": bool(all(b < a for a, b in zip(qs, qs[1:]))),
    }


def write_tightness_csv(table, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "q95", "stderr"])
        for row in zip(table["m"], table["q95"], table["stderr"]):
            w.writerow([row[0], repr(float(row[1])), repr(float(row[2]))])


def block_diagnostics_mc(sampler, x0, m, p, eps_grid=(0.5,), R=1000, seed=0, eta=None):
    """Monte Carlo blocking diagnostics C1-C4 from the fixed start ``x0``.

    Inner conditional expectations are exact functions of the conditioning
    state, computed on the sampler's kernel model; only the outer
    expectation ``E_0`` is a replica average.  Every statistic comes with
    a standard error.  Also reports the fixed-block forms of the reinforced
    conditions: the C2 deviations for each single block ``i``.
    """
    from .finite_chain import BlockDiagnostics, _block_stats

    model = getattr(sampler, "kernel_model", None)
    if model is None:
        raise UnsupportedOperationError("sampler exposes no kernel model for inner expectations")
    if m < 2 or p < 1:
        raise InvalidInputError("need m >= 2 and p >= 1")
    if eta is None:
        eta = model.eta()
    h, g, B2p = _block_vectors(model, p)
    times = [i * p for i in range(m + 1)]
    ens = run_replicas(sampler, x0, m * p, R, seed, skeleton=times, state_times=times[:m],
                       block_len=p, check_sizes=False)
    idx = np.stack([model.index(ens.states[t]) for t in times[:m]], axis=1)
    root = math.sqrt(m * p)
    c1_r = np.abs(h[idx]).sum(axis=1) / root
    c1, c1_se = _mean_se(c1_r)
    c2a, c2a_se = _mean_se(np.abs(g[idx].sum(axis=1) / (m * p) - eta))
    c2b, c2b_se = _mean_se(np.abs(B2p[idx].sum(axis=1) / (m * p) - 2.0 * eta))
    star = [_mean_se(np.abs(g[idx[:, i]] / p - eta))[0] for i in range(m)]
    sums = np.diff(ens.skeleton, axis=1)
    c3, c3_se, c4, c4_se = _block_stats(sums, ens.block_max, m, p, eps_grid)
    return BlockDiagnostics(
        m=m, p=p, c1_stat=c1, c2_stats=(c2a, c2b), c3_stat=c3, c4_stat=c4, eta_used=float(eta),
        stderr={"c1_stat": c1_se, "c2_stats": (c2a_se, c2b_se), "c3_stat": c3_se, "c4_stat": c4_se,
                "c2_star_per_block": star},
        exact={"c1_stat": False, "c2_stats": False, "c3_stat": False, "c4_stat": False},
        start=x0, replicas=R, seed=seed,
    )


def _jackknife_var_se(values):
    """Sample variance and its delete-one jackknife standard error."""
    v = np.sort(np.asarray(values, dtype=float))
    R = v.size
    v = v - v.mean()
    s1, s2 = v.sum(), (v * v).sum()
    var = (s2 - s1 * s1 / R) / (R - 1)
    m_i = (s1 - v) / (R - 1)
    var_i = (s2 - v * v - (R - 1) * m_i * m_i) / (R - 2)
    se = math.sqrt((R - 1) / R * float(np.sum((var_i - var_i.mean()) ** 2)))
    return float(var), se


def variance_growth_scan(sampler, x0, n_grid, R, seed, obs=None):
    """``Var(S_n) / n`` along ``n_grid`` from one run of length ``max(n_grid)``.

    Returns the per-``n`` estimates with jackknife standard errors and the
    least-squares fit of ``Var(S_n)/n`` against ``ln n`` (slope, its
    standard error and ``R^2``).
    """
    n_grid = np.asarray(list(n_grid), dtype=np.int64)
    if n_grid.size < 2 or np.any(np.diff(n_grid) <= 0) or n_grid[0] < 1:
        raise InvalidInputError("n_grid must be increasing positive integers")
    if obs is not None:
        sampler = sampler.with_observable(obs)
    ens = run_replicas(sampler, x0, int(n_grid[-1]), R, seed, skeleton=n_grid, check_sizes=False)
    est, se = [], []
    for k in n_grid:
        var, s = _jackknife_var_se(ens.partial_sums_at(int(k)))
        est.append(var / k)
        se.append(s / k)
    est = np.array(est)
    x = np.log(n_grid.astype(float))
    if np.all(est == 0):
        slope, slope_se, r2 = 0.0, 0.0, 1.0
    else:
        A = np.column_stack([x, np.ones_like(x)])
        coef, *_ = np.linalg.lstsq(A, est, rcond=None)
        slope = float(coef[0])
        resid = est - A @ coef
        ss_tot = float(np.sum((est - est.mean()) ** 2))
        r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
        dof = max(len(x) - 2, 1)
        slope_se = math.sqrt(float(resid @ resid) / dof / float(np.sum((x - x.mean()) ** 2)))
    return {
        "condition": "variance_growth",
        "n": n_grid.tolist(),
        "var_over_n": est.tolist(),
        "stderr": se,
        "slope": slope,
        "slope_stderr": slope_se,
        "r2": r2,
        "replicas": R,
        "seed": seed,
        "start": x0,
    }
