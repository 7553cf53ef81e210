"""Exact engines for finite-state Markov chains.

A ``FiniteChain`` carries a row-stochastic kernel ``P``, its stationary law
``pi`` and a centered observable ``f``; ``X_i = f(xi_i)`` and
``S_n = X_1 + ... + X_n`` for the chain ``xi`` started at ``xi_0``.
Every projective series is computed by iterating ``P`` on vectors.
"""
import bisect
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from ._rng import replica_rngs, uniform_block
from .errors import (
    ConvergenceError,
    EnumerationSizeError,
    InvalidInputError,
    NotIrreducibleError,
    PeriodicChainError,
)
from .series import (
    CONVERGENT_CERTIFIED,
    INCONCLUSIVE,
    SeriesReport,
)

__all__ = [
    "FiniteChain",
    "BlockDiagnostics",
    "stationary",
    "period",
    "eta_exact",
    "cond21_series",
    "mw_series",
    "hh_series",
    "gordin_l1_stats",
    "alpha_coeffs",
    "block_diagnostics_exact",
    "max_inequality_bruteforce",
    "ergodic_checks",
    "sample_path",
    "symmetric_two_state",
]

RATIO_WINDOW = 5
RATIO_MAX = 0.999
NOISE_REL = 1e-14


def _check_kernel(kernel):
    P = np.array(kernel, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
        raise InvalidInputError("kernel must be a square table with at least 2 states")
    if not np.all(np.isfinite(P)) or np.any(P < 0):
        raise InvalidInputError("kernel entries must be finite and nonnegative")
    if np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
        raise InvalidInputError("kernel rows must sum to 1 within 1e-12")
    return P


def _is_irreducible(P):
    n_comp, _ = connected_components(P > 0, directed=True, connection="strong")
    return n_comp == 1


def period(kernel):
    """Period of an irreducible kernel (gcd of cycle lengths through BFS levels)."""
    P = np.asarray(kernel)
    n = P.shape[0]
    level = np.full(n, -1)
    level[0] = 0
    frontier = [0]
    g = 0
    while frontier:
        nxt = []
        for x in frontier:
            for y in np.flatnonzero(P[x] > 0):
                if level[y] < 0:
                    level[y] = level[x] + 1
                    nxt.append(y)
                else:
                    g = math.gcd(g, int(level[x] + 1 - level[y]))
        frontier = nxt
    return g


def stationary(kernel, tol=1e-13, max_iter=1_000_000):
    """Stationary law of an irreducible row-stochastic kernel.

    A direct linear solve gives a starting vector that is then refined by
    power iteration of the lazy kernel ``(I + P) / 2`` until
    ``||pi P - pi||_1 < tol``.
    """
    P = _check_kernel(kernel)
    if not _is_irreducible(P):
        raise NotIrreducibleError("kernel is reducible")
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        pi = np.full(n, 1.0 / n)
    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum() if pi.sum() > 0 else np.full(n, 1.0 / n)
    if np.any(pi <= 0):
        pi = 0.5 * pi + 0.5 / n
    for _ in range(max_iter):
        if np.abs(pi @ P - pi).sum() < tol:
            break
        pi = 0.5 * (pi + pi @ P)
        pi /= pi.sum()
    return pi


@dataclass(frozen=True, eq=False)
class FiniteChain:
    """Finite Markov chain with a centered observable.

    Parameters
    ----------
    kernel : (n, n) array_like
        Row-stochastic transition table.
    f : (n,) array_like
        Observable; it is centered under ``pi`` at construction.
    labels : (n,) array_like, optional
        Real state embeddings used for threshold events (default ``0..n-1``).
    """

    kernel: np.ndarray
    f: np.ndarray
    labels: np.ndarray = None
    pi: np.ndarray = field(default=None, init=False)
    f_raw: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        P = _check_kernel(self.kernel)
        n = P.shape[0]
        f = np.asarray(self.f, dtype=float).ravel()
        if f.shape != (n,) or not np.all(np.isfinite(f)):
            raise InvalidInputError(f"f must have {n} finite entries")
        labels = np.arange(n, dtype=float) if self.labels is None else np.asarray(self.labels, dtype=float).ravel()
        if labels.shape != (n,):
            raise InvalidInputError(f"labels must have {n} entries")
        pi = stationary(P)
        fc = f - float(pi @ f)
        cum = np.cumsum(P, axis=1)
        for row, crow in zip(P, cum):
            last = np.flatnonzero(row > 0)[-1]
            crow[last:] = 2.0
        for name, value in (("kernel", P), ("f", fc), ("labels", labels), ("pi", pi),
                            ("f_raw", f), ("_cum", cum)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "_cum_rows", [list(r) for r in cum])

    @property
    def n_states(self):
        return self.kernel.shape[0]

    @property
    def period(self):
        return period(self.kernel)

    def apply(self, v):
        """``P v`` for a vector or a stack of column vectors."""
        return self.kernel @ v

    def norm(self, v):
        """``pi``-weighted 2-norm."""
        return math.sqrt(max(float(self.pi @ (np.asarray(v) ** 2)), 0.0))

    def step(self, states, u):
        """Inverse-cdf transition of every state in ``states`` with uniforms ``u``."""
        states = np.asarray(states)
        return np.sum(self._cum[states] <= np.asarray(u)[:, None], axis=1)

    def with_observable(self, f):
        return FiniteChain(self.kernel, f, self.labels)

    def to_dict(self):
        return {"kernel": self.kernel.tolist(), "f": self.f_raw.tolist(), "labels": self.labels.tolist()}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data["kernel"], data["f"], data.get("labels"))
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed chain description: {exc}") from exc

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"malformed chain JSON: {exc}") from exc
        return cls.from_dict(data)


def symmetric_two_state(a=0.25, b=None, f=(1.0, -1.0)):
    """Two-state chain flipping with probabilities ``a`` (0 to 1) and ``b``."""
    b = a if b is None else b
    return FiniteChain([[1 - a, a], [b, 1 - b]], f)


def _require_aperiodic(chain):
    d = chain.period
    if d != 1:
        raise PeriodicChainError(f"chain has period {d}")


def _ratio_certificate(norms, scale, k_last):
    """Geometric tail bound ``scale * base * r / (1 - r)``.

    ``r`` is the largest ratio of successive norms over the last few lags
    whose norms lie above the rounding floor ``NOISE_REL * norms[0]``; below
    that floor the computed ``P^k f`` is dominated by the rounding residual
    of the centering, which does not decay.  ``base`` is the last norm, or
    the floor once it has been reached.  Returns ``(bound, r)``; ``bound``
    is None when ``r >= RATIO_MAX``.
    """
    norms = np.asarray(norms)
    if norms[-1] == 0.0:
        return 0.0, 0.0
    floor = NOISE_REL * norms[0]
    above = np.flatnonzero(norms > floor)
    end = int(above[-1]) + 1 if above.size else 1
    tail = norms[max(end - (RATIO_WINDOW + 1), 0):end]
    if len(tail) < 2 or np.any(tail[:-1] == 0):
        return None, math.nan
    r = float(np.max(tail[1:] / tail[:-1]))
    if r >= RATIO_MAX:
        return None, r
    base = float(norms[-1]) if end == len(norms) else max(float(norms[-1]), floor)
    return scale * base * r / (1.0 - r), r


def _at_floor(norms):
    """True once the last ``RATIO_WINDOW`` norms sit below the rounding floor."""
    floor = NOISE_REL * norms[0]
    return len(norms) > RATIO_WINDOW and all(v <= floor for v in norms[-RATIO_WINDOW:])


def _iterate_powers(chain, kmax, stop):
    """Yield ``(k, P^k f, ||P^k f||)`` for ``k = 0..kmax`` until ``stop`` says so."""
    g = chain.f.copy()
    norms = []
    for k in range(kmax + 1):
        if k:
            g = chain.apply(g)
        norms.append(chain.norm(g))
        yield k, g, norms
        if stop(k, norms):
            return


def _certified_series(chain, kmax, tol, term, scale, condition):
    terms = []

    def stop(k, norms):
        if norms[-1] == 0.0:
            return True
        if k < RATIO_WINDOW:
            return False
        bound, _ = _ratio_certificate(norms, scale, k)
        if bound is not None and bound < tol * max(1.0, scale * norms[0]):
            return True
        return _at_floor(norms)

    norms = []
    for k, g, norms in _iterate_powers(chain, kmax, stop):
        terms.append(term(g))
    report = SeriesReport.from_terms(terms, condition=condition)
    bound, r = _ratio_certificate(norms, scale, len(terms) - 1)
    report.info.update(contraction_ratio=r, last_norm=norms[-1])
    if bound is not None:
        report.tail_bound = bound
        report.verdict = CONVERGENT_CERTIFIED
    return report


def eta_exact(chain, kmax=100_000, tol=1e-14):
    """Long-run variance ``pi(f^2) + 2 sum_k pi(f P^k f)``.

    Iteration stops once the geometric tail certificate
    ``2 ||f|| ||P^k f|| r / (1 - r)`` drops below ``tol`` (scaled by
    ``2 ||f||^2`` when that exceeds 1) or ``P^k f`` reaches the rounding
    floor.
    Returns ``(eta, report)``.
    """
    _require_aperiodic(chain)
    f = chain.f
    pf = chain.pi * f
    report = _certified_series(
        chain, kmax, tol,
        term=lambda g: float(pf @ g),
        scale=2.0 * chain.norm(f),
        condition="long_run_variance",
    )
    report.terms[1:] *= 2.0
    report.partial_sums = np.cumsum(report.terms)
    eta = report.total
    if eta < -1e-9:
        raise ConvergenceError(f"negative long-run variance {eta}")
    if report.verdict != CONVERGENT_CERTIFIED:
        report.verdict = INCONCLUSIVE
    return max(eta, 0.0), report


def cond21_series(chain, kmax=100_000, tol=1e-14):
    """Terms ``pi(|f P^k f|)``, ``k >= 0``, with a geometric tail certificate."""
    f = chain.f
    return _certified_series(
        chain, kmax, tol,
        term=lambda g: float(chain.pi @ np.abs(f * g)),
        scale=chain.norm(f),
        condition="covariance_summability",
    )


def mw_series(chain, nmax=10_000):
    """Terms ``||g_n||_2 / n^{3/2}``, ``n = 1..nmax``, ``g_n = sum_{j<=n} P^j f``.

    When the powers contract geometrically ``||g_n||`` stays below
    ``G = ||g_N|| + ||P^N f|| r / (1 - r)`` and the tail after ``N`` is
    bounded by ``2 G / sqrt(N)``.
    """
    g = chain.f.copy()
    acc = np.zeros_like(g)
    terms, norms = [], []
    for n in range(1, nmax + 1):
        g = chain.apply(g)
        acc = acc + g
        norms.append(chain.norm(g))
        terms.append(chain.norm(acc) / n ** 1.5)
    report = SeriesReport.from_terms(terms, condition="maxwell_woodroofe", start_index=1)
    bound, r = _ratio_certificate(norms, 1.0, nmax)
    report.info["contraction_ratio"] = r
    if bound is not None:
        G = chain.norm(acc) + bound
        report.tail_bound = 2.0 * G / math.sqrt(nmax)
        report.verdict = CONVERGENT_CERTIFIED
    return report


def hh_series(chain, nmax=10_000):
    """Terms ``sqrt(pi((P^n f)^2) - pi((P^{n+1} f)^2))``, ``n = 0..nmax``.

    Rounding can make the difference slightly negative; it is clamped at 0.
    The tail after ``N`` is at most ``sum_{n > N} ||P^n f||``.
    """
    g = chain.f.copy()
    sq = [float(chain.pi @ g ** 2)]
    norms = [math.sqrt(sq[0])]
    terms = []
    for _ in range(nmax + 1):
        g = chain.apply(g)
        sq.append(float(chain.pi @ g ** 2))
        norms.append(math.sqrt(max(sq[-1], 0.0)))
        terms.append(math.sqrt(max(sq[-2] - sq[-1], 0.0)))
    report = SeriesReport.from_terms(terms, condition="hannan_heyde")
    bound, r = _ratio_certificate(norms, 1.0, nmax)
    report.info.update(contraction_ratio=r, squared_norms=np.array(sq))
    if bound is not None:
        report.tail_bound = bound
        report.verdict = CONVERGENT_CERTIFIED
    return report


def _simulate(chain, starts, n, seed, on_step, first_replica=0, group=4096, block=1024):
    """Run replicas from ``starts`` for ``n`` steps.

    Replica ``r`` draws its uniforms from the stream ``(seed, first_replica + r)``
    so results do not depend on how replicas are grouped.
    ``on_step(sl, k, states)`` is called after step ``k`` (1-based) with the
    states of the replica slice ``sl``.
    """
    starts = np.asarray(starts)
    R = starts.size
    for a in range(0, R, group):
        b = min(R, a + group)
        rngs = replica_rngs(seed, first_replica + a, first_replica + b)
        states = starts[a:b].copy()
        sl = slice(a, b)
        for t0 in range(0, n, block):
            width = min(block, n - t0)
            U = uniform_block(rngs, width)
            for j in range(width):
                states = chain.step(states, U[:, j])
                on_step(sl, t0 + j + 1, states)


def _check_state(chain, x0):
    x0 = int(x0)
    if not 0 <= x0 < chain.n_states:
        raise InvalidInputError("start state out of range")
    return x0


def gordin_l1_stats(chain, nmax, replicas, seed):
    """Gordin L1 diagnostics.

    Returns ``(sup_norm, trace)`` where ``sup_norm = max_{n<=nmax} pi(|g_n|)``
    is exact and ``trace`` holds Monte Carlo estimates of ``E|S_n| / sqrt(n)``
    under the stationary start with their standard errors.
    """
    g = chain.f.copy()
    acc = np.zeros_like(g)
    l1 = np.empty(nmax)
    for n in range(nmax):
        g = chain.apply(g)
        acc = acc + g
        l1[n] = float(chain.pi @ np.abs(acc))
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(2 ** 31,)))
    cdf = np.cumsum(chain.pi)
    starts = np.minimum(np.searchsorted(cdf, rng.random(replicas) * cdf[-1], side="right"), chain.n_states - 1)
    S = np.zeros(replicas)
    m1 = np.zeros(nmax)
    m2 = np.zeros(nmax)

    def on_step(sl, k, states):
        S[sl] += chain.f[states]
        a = np.abs(S[sl])
        m1[k - 1] += a.sum()
        m2[k - 1] += (a * a).sum()

    _simulate(chain, starts, nmax, seed, on_step)
    ns = np.arange(1, nmax + 1)
    mean = m1 / replicas
    var = np.maximum(m2 / replicas - mean ** 2, 0.0) * replicas / max(replicas - 1, 1)
    trace = {
        "n": ns,
        "ratio": mean / np.sqrt(ns),
        "stderr": np.sqrt(var / replicas) / np.sqrt(ns),
        "l1_norms": l1,
        "condition": "gordin_l1",
    }
    return float(l1.max()), trace


def alpha_coeffs(chain, kmax, rosenblatt=False):
    """``alpha_Y(k)`` for ``k = 0..kmax`` with ``Y_k`` the label of ``xi_k``.

    ``alpha_Y(k) = max_t sum_x pi(x) |P^k(x, {label <= t}) - pi(label <= t)|``
    over the nontrivial thresholds.  ``rosenblatt=True`` sets ``alpha(0) = 1``.
    """
    thresholds = np.unique(chain.labels)[:-1]
    V = (chain.labels[:, None] <= thresholds[None, :]).astype(float)
    mean = chain.pi @ V
    out = np.empty(kmax + 1)
    for k in range(kmax + 1):
        if k:
            V = chain.apply(V)
        out[k] = float(np.max(chain.pi @ np.abs(V - mean))) if thresholds.size else 0.0
    if rosenblatt:
        out[0] = 1.0
    return out


@dataclass
class BlockDiagnostics:
    """Block statistics for ``m`` blocks of length ``p``.

    ``stderr`` maps statistic names to Monte Carlo standard errors; exact
    statistics carry 0.
    """

    m: int
    p: int
    c1_stat: float
    c2_stats: tuple
    c3_stat: dict
    c4_stat: dict
    eta_used: float
    stderr: dict = field(default_factory=dict)
    exact: dict = field(default_factory=dict)
    start: object = None
    replicas: int = 0
    seed: int = None

    def to_dict(self):
        return {
            "condition": ["C1", "C2", "C3", "C4"],
            "m": self.m,
            "p": self.p,
            "start": self.start,
            "c1_stat": self.c1_stat,
            "c2_stats": list(self.c2_stats),
            "c3_stat": {str(k): v for k, v in self.c3_stat.items()},
            "c4_stat": {str(k): v for k, v in self.c4_stat.items()},
            "eta_used": self.eta_used,
            "stderr": {k: (v if not isinstance(v, dict) else {str(a): b for a, b in v.items()})
                       for k, v in self.stderr.items()},
            "exact": self.exact,
            "replicas": self.replicas,
            "seed": self.seed,
        }


def _future_mean(model, steps_from, steps_to):
    """``sum_{j=steps_from}^{steps_to} K^j f`` as a state vector."""
    g = model.f.copy()
    acc = np.zeros_like(g)
    for j in range(1, steps_to + 1):
        g = model.apply(g)
        if j >= steps_from:
            acc = acc + g
    return acc


def _second_moments(model, p):
    """``B_q(x) = E_x (X_1 + ... + X_q)^2`` for ``q = p`` and ``q = 2 p``.

    Uses ``A_q = K(f + A_{q-1})`` and ``B_q = K(f2 + 2 f A_{q-1} + B_{q-1})``.
    """
    A = np.zeros_like(model.f)
    B = np.zeros_like(model.f)
    out = {}
    for q in range(1, 2 * p + 1):
        B = model.apply(model.f2 + 2.0 * model.f * A + B)
        A = model.apply(model.f + A)
        if q in (p, 2 * p):
            out[q] = B
    return out[p], out[2 * p]


def _block_vectors(model, p):
    h = _future_mean(model, p + 1, 2 * p)
    Bp, B2p = _second_moments(model, p)
    g = Bp.copy()
    for _ in range(p):
        g = model.apply(g)
    return h, g, B2p


class _MatrixModel:
    def __init__(self, chain):
        self.chain = chain
        self.f = chain.f
        self.f2 = chain.f ** 2
        self.apply = chain.apply


def block_diagnostics_exact(chain, x0, m, p, eps_grid=(0.5,), replicas=2000, seed=0,
                            eta=None, max_paths=1_000_000):
    """Blocking diagnostics C1-C4 for a finite chain started at ``x0``.

    C1 is exact: the law of ``xi_{(i-2)p}`` is a row of ``P^{(i-2)p}``.
    The conditional second moments in C2 come from exact recursions; the
    outer expectation over the skeleton ``xi_0, xi_p, ..., xi_{(m-1)p}`` is
    an exact enumeration when at most ``max_paths`` skeleton paths exist and
    a Monte Carlo average otherwise.  C3 and C4 are Monte Carlo.
    """
    if m < 2 or p < 1:
        raise InvalidInputError("need m >= 2 and p >= 1")
    x0 = _check_state(chain, x0)
    if eta is None:
        eta, _ = eta_exact(chain)
    model = _MatrixModel(chain)
    h, g, B2p = _block_vectors(model, p)
    Pp = np.linalg.matrix_power(chain.kernel, p)
    law = np.zeros(chain.n_states)
    law[x0] = 1.0
    c1 = 0.0
    for _ in range(m):
        c1 += float(law @ np.abs(h))
        law = law @ Pp
    c1 /= math.sqrt(m * p)

    n = chain.n_states
    stderr = {"c1_stat": 0.0}
    exact = {"c1_stat": True}
    if n ** (m - 1) <= max_paths:
        probs = np.ones(1)
        last = np.array([x0])
        sum_g = g[last]
        sum_b = B2p[last]
        for _ in range(m - 1):
            probs = (probs[:, None] * Pp[last]).ravel()
            last = np.tile(np.arange(n), len(last))
            sum_g = np.repeat(sum_g, n) + g[last]
            sum_b = np.repeat(sum_b, n) + B2p[last]
            keep = probs > 0
            probs, last, sum_g, sum_b = probs[keep], last[keep], sum_g[keep], sum_b[keep]
        c2 = (float(probs @ np.abs(sum_g / (m * p) - eta)),
              float(probs @ np.abs(sum_b / (m * p) - 2.0 * eta)))
        stderr["c2_stats"] = (0.0, 0.0)
        exact["c2_stats"] = True
    else:
        c2 = None
        exact["c2_stats"] = False

    mc = _block_monte_carlo(chain, model, x0, m, p, eps_grid, replicas, seed, h, g, B2p, eta,
                            want_c2=c2 is None)
    if c2 is None:
        c2 = mc["c2"]
        stderr["c2_stats"] = mc["c2_se"]
    stderr.update(c3_stat=mc["c3_se"], c4_stat=mc["c4_se"])
    exact.update(c3_stat=False, c4_stat=False)
    return BlockDiagnostics(m=m, p=p, c1_stat=c1, c2_stats=c2, c3_stat=mc["c3"], c4_stat=mc["c4"],
                            eta_used=float(eta), stderr=stderr, exact=exact, start=x0,
                            replicas=replicas, seed=seed)


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    mean = float(np.mean(np.sort(values)))
    se = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return mean, se


def _block_stats(block_sums, block_max, m, p, eps_grid):
    c3, c3_se, c4, c4_se = {}, {}, {}, {}
    cut = math.sqrt(m * p)
    for eps in eps_grid:
        eps = float(eps)
        v3 = np.mean(block_sums ** 2 * (np.abs(block_sums) > eps * cut), axis=1) / p
        v4 = np.mean(block_max ** 2 * (block_max > eps * cut), axis=1) / p
        c3[eps], c3_se[eps] = _mean_se(v3)
        c4[eps], c4_se[eps] = _mean_se(v4)
    return c3, c3_se, c4, c4_se


def _block_monte_carlo(chain, model, x0, m, p, eps_grid, replicas, seed, h, g, B2p, eta, want_c2):
    R = int(replicas)
    skel = np.empty((R, m), dtype=np.int64)
    skel[:, 0] = x0
    sums = np.zeros((R, m))
    bmax = np.zeros((R, m))
    S = np.zeros(R)
    base = np.zeros(R)

    def on_step(sl, k, states):
        i = (k - 1) // p
        S[sl] += chain.f[states]
        dev = np.abs(S[sl] - base[sl])
        np.maximum(bmax[sl, i], dev, out=bmax[sl, i])
        if k % p == 0:
            sums[sl, i] = S[sl] - base[sl]
            base[sl] = S[sl]
            if i + 1 < m:
                skel[sl, i + 1] = states

    _simulate(chain, np.full(R, x0), m * p, seed, on_step)
    c3, c3_se, c4, c4_se = _block_stats(sums, bmax, m, p, eps_grid)
    out = {"c3": c3, "c3_se": c3_se, "c4": c4, "c4_se": c4_se}
    if want_c2:
        a, sa = _mean_se(np.abs(g[skel].sum(axis=1) / (m * p) - eta))
        b, sb = _mean_se(np.abs(B2p[skel].sum(axis=1) / (m * p) - 2.0 * eta))
        out.update(c2=(a, b), c2_se=(sa, sb))
    return out


def max_inequality_bruteforce(chain, x0, n, lam, k=0, l=None, limit=10 ** 7):
    """Both sides of the conditional maximal inequality by path enumeration.

    With ``Sbar_{k,i} = max_{k<=j<=i} |S_j - S_k|`` and
    ``Gamma_{k,i} = {Sbar_{k,i} > lam}``, returns ``(lhs, rhs)`` with
    ``lhs = E_0 (Sbar_{k,l} - lam)_+^2`` and
    ``rhs = 8 sum_i E_0 X_i^2 1_Gamma + 16 sum_i E_0 |X_i 1_Gamma E_i(S_l - S_i)|``.
    """
    x0 = _check_state(chain, x0)
    l = n if l is None else int(l)
    if not 0 <= k < l <= n or n < 1:
        raise InvalidInputError("need 0 <= k < l <= n")
    if lam < 0:
        raise InvalidInputError("lambda must be >= 0")
    ns = chain.n_states
    if ns ** n > limit:
        raise EnumerationSizeError(f"{ns}^{n} paths exceed the limit {limit}")
    f = chain.f
    # future means E_i(S_l - S_i) = sum_{j=1}^{l-i} P^j f
    fut = [np.zeros(ns)]
    g = f.copy()
    for _ in range(l):
        g = chain.apply(g)
        fut.append(fut[-1] + g)
    probs = np.ones(1)
    state = np.array([x0])
    S = np.zeros(1)
    Sk = np.zeros(1)
    smax = np.zeros(1)
    rhs = 0.0
    for i in range(1, l + 1):
        probs = (probs[:, None] * chain.kernel[state]).ravel()
        state = np.tile(np.arange(ns), len(state))
        S = np.repeat(S, ns)
        Sk = np.repeat(Sk, ns)
        smax = np.repeat(smax, ns)
        keep = probs > 0
        probs, state, S, Sk, smax = probs[keep], state[keep], S[keep], Sk[keep], smax[keep]
        x = f[state]
        S = S + x
        if i == k:
            Sk = S.copy()
        if i > k:
            smax = np.maximum(smax, np.abs(S - Sk))
            gam = smax > lam
            rhs += 8.0 * float(probs @ (x * x * gam)) \
                + 16.0 * float(probs @ np.abs(x * gam * fut[l - i][state]))
    lhs = float(probs @ np.maximum(smax - lam, 0.0) ** 2)
    return lhs, rhs


def ergodic_checks(chain, x0, z, nmax, replicas, seed):
    """Ergodic averages from a fixed start.

    ``erg[n-1] = (1/n) sum_{i=1}^n (P^i z)(x0)`` exactly, with limit
    ``pi(z)``; ``max_erg[n-1]`` estimates ``(1/n) E_0 max_{i<=n} |z(xi_i)|`` by
    Monte Carlo.  ``max_decreasing`` compares the estimate at ``nmax`` with
    the one at ``nmax // 2``.
    """
    _require_aperiodic(chain)
    x0 = _check_state(chain, x0)
    z = np.asarray(z, dtype=float).ravel()
    if z.shape != (chain.n_states,):
        raise InvalidInputError("z must have one value per state")
    row = np.zeros(chain.n_states)
    row[x0] = 1.0
    acc = 0.0
    erg = np.empty(nmax)
    for n in range(1, nmax + 1):
        row = row @ chain.kernel
        acc += float(row @ z)
        erg[n - 1] = acc / n
    running = np.zeros(replicas)
    m1 = np.zeros(nmax)
    m2 = np.zeros(nmax)

    def on_step(sl, k, states):
        np.maximum(running[sl], np.abs(z[states]), out=running[sl])
        m1[k - 1] += running[sl].sum()
        m2[k - 1] += (running[sl] ** 2).sum()

    _simulate(chain, np.full(replicas, x0), nmax, seed, on_step)
    ns = np.arange(1, nmax + 1)
    mean = m1 / replicas
    var = np.maximum(m2 / replicas - mean ** 2, 0.0)
    max_erg = mean / ns
    half = max(nmax // 2, 1)
    return {
        "n": ns,
        "erg": erg,
        "limit": float(chain.pi @ z),
        "max_erg": max_erg,
        "max_erg_stderr": np.sqrt(var / max(replicas - 1, 1)) / ns,
        "max_decreasing": bool(max_erg[-1] < max_erg[half - 1]) if nmax > 1 else True,
    }


def sample_path(chain, x0, n, seed):
    """One path ``xi_0 = x0, ..., xi_n`` and ``X_i = f(xi_i)``.

    Uses the replica-0 stream of ``seed``, so it coincides with replica 0 of
    an ensemble run with the same seed.
    """
    x0 = _check_state(chain, x0)
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    u = replica_rngs(seed, 0, 1)[0].random(n)
    rows = chain._cum_rows
    states = np.empty(n + 1, dtype=np.int64)
    s = x0
    states[0] = s
    for i, ui in enumerate(u.tolist(), start=1):
        s = bisect.bisect_right(rows[s], ui)
        states[i] = s
    return states, chain.f[states[1:]]


def enumerate_paths(chain, x0, n):
    """All paths of length ``n`` from ``x0`` with their probabilities."""
    x0 = _check_state(chain, x0)
    paths, probs = [], []
    for tail in itertools.product(range(chain.n_states), repeat=n):
        p = 1.0
        s = x0
        for t in tail:
            p *= chain.kernel[s, t]
            s = t
        if p > 0:
            paths.append((x0,) + tail)
            probs.append(p)
    return np.array(paths), np.array(probs)
