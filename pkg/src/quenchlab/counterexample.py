"""A stationary sequence whose covariance-type series converges while the
Gordin L1, Maxwell-Woodroofe and Hannan-Heyde criteria all fail.

Parameters for level ``k``: ``N_k = 4^k``, ``rho_k = 4^-k``,
``theta_k = 1 / (k 2^k)``, ``eps_k = 1 / (k^2 4^(3k))``.  The observable is
``f = sum_k f_k 1_{A_k}`` with ``f_k = theta_k sum_{j=N_k+1}^{2N_k} e_{-j}``
for an i.i.d. Rademacher sequence ``e`` and disjoint sets ``A_k`` that are
almost invariant over ``2 N_k`` steps.

The concrete system here is a Bernoulli shift on the Rademacher
coordinates times one circle rotation by an angle ``alpha``.  The sets
``A_k`` are disjoint arcs of length ``rho_k``; rotating an arc by
``d alpha`` moves ``2 d alpha`` of mass, which stays below ``eps_k / 2`` for
``d <= 2 N_k`` when ``alpha = eps_K / (8 sqrt(2) N_K)``.
"""
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._rng import replica_rng
from .errors import EnumerationSizeError, InvalidInputError
from .series import CONVERGENT_CERTIFIED, DIVERGENT_EVIDENCE, SeriesReport

__all__ = [
    "CounterexampleParams",
    "RealizedSystem",
    "params",
    "series_cond21",
    "series_gordin_lowerbound",
    "series_mw_lowerbound",
    "series_hh_lowerbound",
    "series_summary",
    "realize",
    "empirical_conditional_norms",
    "HH_PREFACTOR",
]

HH_PREFACTOR = math.sqrt(2.0) / math.sqrt(3.0)
K_PARAMS_MAX = 12
K_REALIZE_MAX = 8


@dataclass(frozen=True)
class CounterexampleParams:
    """Exact level parameters for ``k = 1..K`` (as ``Fraction``)."""

    K: int
    N: tuple
    rho: tuple
    theta: tuple
    eps: tuple

    def level(self, k):
        if not 1 <= k <= self.K:
            raise InvalidInputError(f"level must lie in 1..{self.K}")
        i = k - 1
        return {"N": self.N[i], "rho": self.rho[i], "theta": self.theta[i], "eps": self.eps[i]}


def _level(k):
    return (
        4 ** k,
        Fraction(1, 4 ** k),
        Fraction(1, k * 2 ** k),
        Fraction(1, k * k * 4 ** (3 * k)),
    )


def params(K):
    """Level parameters for ``k = 1..K``, ``1 <= K <= 12``."""
    if not isinstance(K, (int, np.integer)) or not 1 <= K <= K_PARAMS_MAX:
        raise InvalidInputError(f"K must be an integer in 1..{K_PARAMS_MAX}")
    levels = [_level(k) for k in range(1, int(K) + 1)]
    N, rho, theta, eps = (tuple(col) for col in zip(*levels))
    return CounterexampleParams(K=int(K), N=N, rho=rho, theta=theta, eps=eps)


def _exact_report(exact_terms, **kw):
    report = SeriesReport.from_terms([float(t) for t in exact_terms], **kw)
    report.info["exact_terms"] = [str(t) for t in exact_terms]
    partial = Fraction(0)
    for t in exact_terms:
        partial += t
    report.info["exact_total"] = str(partial)
    return report


def series_cond21(K):
    """Terms ``theta_k^2 N_k^2 rho_k = 1/k^2``; remainder after ``K`` is below ``1/K``."""
    if K < 1:
        raise InvalidInputError("K must be >= 1")
    terms = []
    for k in range(1, int(K) + 1):
        N, rho, theta, _ = _level(k)
        terms.append(theta ** 2 * N ** 2 * rho)
    report = _exact_report(terms, condition="covariance_summability", start_index=1,
                           verdict=CONVERGENT_CERTIFIED, tail_bound=1.0 / K)
    report.info["limit"] = math.pi ** 2 / 6
    return report


def series_gordin_lowerbound(K):
    """Terms ``theta_k rho_k N_k^{3/2} = 1/k`` for ``k = 1..K-1``.

    Their sum lower-bounds ``||E_0(S_{N_K})||_1`` up to a constant and
    grows like ``ln K``.
    """
    if K < 2:
        raise InvalidInputError("K must be >= 2")
    terms = []
    for k in range(1, int(K)):
        N, rho, theta, _ = _level(k)
        terms.append(theta * rho * 8 ** k)  # N_k^{3/2} = 8^k
    report = _exact_report(terms, condition="gordin_l1", start_index=1, verdict=DIVERGENT_EVIDENCE)
    report.info["identification"] = "harmonic"
    report.info["log_lower_bound"] = math.log(K) - 1.0
    return report


def _mw_inner(n):
    """``sum_{k : 2 N_k <= n} theta_k^2 N_k^3 rho_k = sum 4^k / k^2`` (exact)."""
    total = Fraction(0)
    k = 1
    while 2 * 4 ** k <= n:
        N, rho, theta, _ = _level(k)
        total += theta ** 2 * N ** 3 * rho
        k += 1
    return total


def series_mw_lowerbound(n_max):
    """Outer terms ``n^{-3/2} (sum_{2 N_k <= n} 4^k / k^2)^{1/2}``, ``n = 1..n_max``.

    ``info["doubling"]`` maps each power of two ``2^j <= n_max`` to the
    increment ``S(2^j) - S(2^{j-1})``.
    """
    n_max = int(n_max)
    if n_max < 8:
        raise InvalidInputError("n_max must be >= 8")
    inner = np.zeros(n_max + 1)
    k = 1
    acc = Fraction(0)
    while 2 * 4 ** k <= n_max:
        acc += Fraction(4 ** k, k * k)
        inner[2 * 4 ** k:] = float(acc)
        k += 1
    n = np.arange(1, n_max + 1, dtype=float)
    terms = np.sqrt(inner[1:]) / n ** 1.5
    report = SeriesReport.from_terms(terms, condition="maxwell_woodroofe", start_index=1,
                                     verdict=DIVERGENT_EVIDENCE)
    S = report.partial_sums
    doubling = {}
    j = 1
    while 2 ** j <= n_max:
        doubling[2 ** j] = float(S[2 ** j - 1] - S[2 ** (j - 1) - 1])
        j += 1
    report.info.update(doubling=doubling, inner_exact={int(2 * 4 ** i): str(_mw_inner(2 * 4 ** i))
                                                       for i in range(1, k)})
    return report


def series_hh_lowerbound(L):
    """Terms ``2^{2l} theta_l sqrt(rho_l) = 1/l``, ``l = 1..L``.

    The lower bound carries the prefactor ``sqrt(2)/sqrt(3)``, recorded in
    ``info``.
    """
    if L < 1:
        raise InvalidInputError("L must be >= 1")
    terms = []
    for l in range(1, int(L) + 1):
        _, _, theta, _ = _level(l)
        terms.append(4 ** l * theta * Fraction(1, 2 ** l))  # sqrt(rho_l) = 2^-l
    report = _exact_report(terms, condition="hannan_heyde", start_index=1, verdict=DIVERGENT_EVIDENCE)
    report.info["prefactor"] = HH_PREFACTOR
    report.info["identification"] = "harmonic"
    return report


def series_summary(K, n_max=4096):
    """Verdicts of the four series keyed by condition name."""
    reports = {
        "covariance_summability": series_cond21(K),
        "gordin_l1": series_gordin_lowerbound(max(K, 2)),
        "maxwell_woodroofe": series_mw_lowerbound(n_max),
        "hannan_heyde": series_hh_lowerbound(K),
    }
    return reports


@dataclass(frozen=True)
class RealizedSystem:
    """Shift times rotation realizing the sets ``A_k`` for ``k <= K``.

    ``arc_starts[k-1]`` is the left end of the arc ``A_k`` of length
    ``rho_k`` on the circle ``[0, 1)``; the rotation angle is ``alpha``.
    ``phase`` and ``window`` (``window[l] = e_{-l}``, ``l = 0..2N_K-1``) are
    one sampled point of the system.
    """

    K: int
    alpha: float
    arc_starts: np.ndarray
    rho: np.ndarray
    theta: np.ndarray
    N: np.ndarray
    eps: np.ndarray
    phase: float
    window: np.ndarray
    seed: int

    def measures(self):
        """``mu(A_k)`` (arc lengths)."""
        return self.rho.copy()

    def symmetric_difference(self, k, d):
        """``mu(A_k triangle T^{-d} A_k) = 2 min(d alpha, rho_k)`` on the circle."""
        return 2.0 * min(abs(d) * self.alpha, float(self.rho[k - 1]))

    def max_drift_defect(self, k):
        """Largest symmetric difference over shifts ``0 <= i, j <= 2 N_k``."""
        return self.symmetric_difference(k, 2 * int(self.N[k - 1]))

    def membership(self, phases):
        """Level index (1..K) of the arc containing each phase, 0 if none."""
        ph = np.mod(np.asarray(phases, dtype=float), 1.0)
        out = np.zeros(ph.shape, dtype=np.int64)
        for k in range(1, self.K + 1):
            a = self.arc_starts[k - 1]
            out[(ph >= a) & (ph < a + self.rho[k - 1])] = k
        return out

    def f_value(self, phase=None, window=None):
        """``f = f_k`` on ``A_k`` for the stored (or supplied) point."""
        phase = self.phase if phase is None else phase
        window = self.window if window is None else window
        k = int(self.membership(phase))
        if k == 0:
            return 0.0
        N = int(self.N[k - 1])
        return float(self.theta[k - 1] * window[N + 1:2 * N + 1].sum())


def realize(K, seed):
    """Build the realized system for levels ``1..K`` (``K <= 8``)."""
    if not isinstance(K, (int, np.integer)) or K < 1:
        raise InvalidInputError("K must be a positive integer")
    if K > K_REALIZE_MAX:
        raise EnumerationSizeError(f"K={K} needs windows of 2*4^K coordinates; limit is {K_REALIZE_MAX}")
    par = params(K)
    rho = np.array([float(r) for r in par.rho])
    starts = np.concatenate([[0.0], np.cumsum(2.0 * rho)[:-1]])
    NK = par.N[-1]
    alpha = float(par.eps[-1]) / (8.0 * math.sqrt(2.0) * NK)
    rng = replica_rng(seed, 0)
    phase = float(rng.random())
    window = np.where(rng.random(2 * NK + 1) < 0.5, -1.0, 1.0)
    return RealizedSystem(
        K=int(K), alpha=alpha, arc_starts=starts, rho=rho,
        theta=np.array([float(t) for t in par.theta]), N=np.array(par.N, dtype=np.int64),
        eps=np.array([float(e) for e in par.eps]), phase=phase, window=window, seed=int(seed),
    )


def _conditional_sums(system, n, phases, windows):
    """``E_0(S_n)`` per realization from the closed form.

    ``E_0(S_n) = sum_{i=1}^n sum_k theta_k 1{phase + i alpha in A_k}
    sum_{j=max(N_k+1, i)}^{2N_k} e_{i-j}``.
    """
    R = phases.size
    prefix = np.concatenate([np.zeros((R, 1)), np.cumsum(windows, axis=1)], axis=1)
    i = np.arange(1, n + 1)
    pts = phases[:, None] + i[None, :] * system.alpha
    level = system.membership(pts)
    out = np.zeros(R)
    for k in range(1, system.K + 1):
        N = int(system.N[k - 1])
        ik = i[i <= 2 * N]
        if ik.size == 0:
            continue
        lo = np.maximum(N + 1 - ik, 0)
        hi = 2 * N - ik + 1
        c = prefix[:, hi] - prefix[:, lo]
        out += system.theta[k - 1] * np.sum(c * (level[:, :ik.size] == k), axis=1)
    return out


def empirical_conditional_norms(system, n_grid, R, seed, chunk=4096):
    """Monte Carlo estimates of ``||E_0(S_n)||_1`` over fresh realizations.

    Each realization draws a uniform phase and a Rademacher window;
    ``E_0(S_n)`` is then exact.  Supported ``n``: ``1 <= n <= 2 N_K``.
    Returns ``{"n", "mean", "stderr", "target_log"}``.
    """
    n_grid = [int(v) for v in n_grid]
    limit = 2 * int(system.N[-1])
    if not n_grid or any(not 1 <= v <= limit for v in n_grid):
        raise InvalidInputError(f"n must lie in 1..{limit}")
    R = int(R)
    if R < 2:
        raise InvalidInputError("R must be >= 2")
    width = limit
    sums = {v: np.empty(R) for v in n_grid}
    for a in range(0, R, chunk):
        b = min(R, a + chunk)
        phases = np.empty(b - a)
        windows = np.empty((b - a, width))
        for r in range(a, b):
            rng = replica_rng(seed, r)
            phases[r - a] = rng.random()
            windows[r - a] = np.where(rng.random(width) < 0.5, -1.0, 1.0)
        for v in n_grid:
            sums[v][a:b] = np.abs(_conditional_sums(system, v, phases, windows))
    mean, se = [], []
    for v in n_grid:
        x = np.sort(sums[v])
        mean.append(float(x.mean()))
        se.append(float(x.std(ddof=1) / math.sqrt(R)))
    return {
        "condition": "gordin_l1",
        "n": n_grid,
        "mean": mean,
        "stderr": se,
        "K": system.K,
        "target_log": math.log(system.K - 1) if system.K > 1 else 0.0,
        "replicas": R,
        "seed": seed,
    }
