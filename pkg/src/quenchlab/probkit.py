"""Distribution-level primitives.

Quantile and tail functions, the mixing-integral criteria built from them,
a two-sided Kolmogorov-Smirnov distance and a brute-force checker for the
conditional truncation inequalities.
"""
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .errors import IntegrabilityError, InvalidInputError
from .series import CONVERGENT_EVIDENCE, INCONCLUSIVE, SeriesReport

__all__ = [
    "QuantileFunction",
    "TailFunction",
    "EmpiricalSample",
    "FiniteProbSpace",
    "quantile_of",
    "integral_Q_squared",
    "mixing_series",
    "tail_condition_integral",
    "ks_distance",
    "check_truncation_inequalities",
    "normal_cdf",
]


class QuantileFunction:
    """Non-increasing map from (0, 1] to the nonnegative reals.

    Piecewise form: ``points = [(u_1, v_1), ..., (u_m, v_m)]`` with
    ``0 < u_1 <= ... <= u_m = 1`` and non-increasing ``v_i``.  With
    ``side="left"`` the value on ``(u_{i-1}, u_i]`` is ``v_i`` (left
    continuous); with ``side="right"`` it is ``v_i`` on ``[u_{i-1}, u_i)``
    and ``Q(1) = v_m`` (right continuous, which is what the infimum
    formula of ``quantile_of`` produces).  Both versions differ on finitely
    many points and have the same integrals.

    Power form: ``Q(u) = c u^(-a)`` with ``0 < a < 1/2``.
    """

    def __init__(self, points=None, side="left", power=None):
        if (points is None) == (power is None):
            raise InvalidInputError("give either points or power=(c, a)")
        if side not in ("left", "right"):
            raise InvalidInputError("side must be 'left' or 'right'")
        self.side = side
        if power is not None:
            c, a = (float(v) for v in power)
            if c < 0 or not 0.0 < a < 0.5:
                raise InvalidInputError("power quantile needs c >= 0 and 0 < a < 1/2")
            self.kind = "power"
            self.c, self.a = c, a
            self.u = self.v = None
            return
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            raise InvalidInputError("empty quantile function")
        u, v = pts[:, 0], pts[:, 1]
        if u[0] <= 0 or np.any(np.diff(u) < 0) or u[-1] != 1.0:
            raise InvalidInputError("breakpoints must be non-decreasing in (0, 1] and end at 1")
        if np.any(v < 0) or np.any(np.diff(v) > 0) or not np.all(np.isfinite(v)):
            raise InvalidInputError("values must be finite, nonnegative and non-increasing")
        self.kind = "piecewise"
        self.u, self.v = u, v

    @classmethod
    def constant(cls, value):
        return cls([(1.0, float(value))])

    @classmethod
    def power_law(cls, c, a):
        return cls(power=(c, a))

    def __repr__(self):
        if self.kind == "power":
            return f"QuantileFunction(power=({self.c!r}, {self.a!r}))"
        return f"QuantileFunction({np.column_stack([self.u, self.v]).tolist()!r}, side={self.side!r})"

    def __call__(self, u):
        uu = np.asarray(u, dtype=float)
        if np.any(uu <= 0) or np.any(uu > 1):
            raise InvalidInputError("quantile functions live on (0, 1]")
        if self.kind == "power":
            out = self.c * uu ** (-self.a)
        elif self.side == "left":
            out = self.v[np.searchsorted(self.u, uu, side="left")]
        else:
            idx = np.minimum(np.searchsorted(self.u, uu, side="right"), len(self.u) - 1)
            out = self.v[idx]
        return float(out) if out.ndim == 0 else out

    def integral(self, a=1.0, power=1):
        """``int_0^a Q(u)^power du``."""
        if self.kind == "power":
            e = 1.0 - power * self.a
            if e <= 0:
                return math.inf
            return self.c ** power * a ** e / e
        lo = np.concatenate([[0.0], self.u[:-1]])
        seg = np.clip(np.minimum(self.u, a) - lo, 0.0, None)
        return float(seg @ self.v ** power)

    def to_dict(self):
        if self.kind == "power":
            return {"kind": "power", "c": self.c, "a": self.a}
        return {"kind": "piecewise", "side": self.side,
                "points": np.column_stack([self.u, self.v]).tolist()}

    @classmethod
    def from_dict(cls, data):
        if data.get("kind") == "power":
            return cls(power=(data["c"], data["a"]))
        if data.get("kind") == "piecewise":
            return cls(data["points"], side=data.get("side", "left"))
        raise InvalidInputError(f"unknown quantile kind {data.get('kind')!r}")

    def to_json(self):
        return json.dumps(self.to_dict())


def quantile_of(values, probs=None):
    """Quantile function ``Q(u) = inf{t >= 0 : P(|Z| > t) <= u}`` of ``|Z|``.

    ``values`` are the atoms of ``Z`` and ``probs`` their masses (uniform
    when omitted).  The result is exact and right continuous.
    """
    z = np.abs(np.asarray(values, dtype=float).ravel())
    if z.size == 0:
        raise InvalidInputError("empty distribution")
    w = np.full(z.size, 1.0 / z.size) if probs is None else np.asarray(probs, dtype=float).ravel()
    if w.shape != z.shape or np.any(w <= 0):
        raise InvalidInputError("atoms need positive masses")
    w = w / w.sum()
    atoms, inv = np.unique(z, return_inverse=True)
    mass = np.bincount(inv, weights=w)
    # P(|Z| > atoms[j]) for decreasing atoms
    order = np.arange(len(atoms))[::-1]
    tail = np.concatenate([[0.0], np.cumsum(mass[order])[:-1]])
    points = []
    for j, t in zip(order, tail):
        # Q = atoms[j] on [P(|Z| > atoms[j]), P(|Z| >= atoms[j]))
        if t + mass[j] > t:
            points.append((min(t + mass[j], 1.0), atoms[j]))
    u_last, v_last = points[-1]
    points[-1] = (1.0, v_last)
    if v_last > 0:
        points.append((1.0, 0.0))
    return QuantileFunction(points, side="right")


def integral_Q_squared(Q, a):
    """``int_0^a Q(u)^2 du``: exact for piecewise and power forms."""
    a = float(a)
    if not 0.0 <= a <= 1.0:
        raise InvalidInputError("a must lie in [0, 1]")
    if a == 0.0:
        return 0.0
    if callable(Q) and not isinstance(Q, QuantileFunction):
        val, _ = scipy.integrate.quad(lambda u: Q(u) ** 2, 0.0, a, epsrel=1e-10, limit=200)
        return float(val)
    return Q.integral(a, power=2)


def mixing_series(alphas, Q, kmax=None, tol=None):
    """Partial sums of ``sum_k int_0^{alpha(k)} Q^2``.

    ``alphas[k]`` is the coefficient at lag ``k`` (``k = 0, 1, ...``).  The
    verdict is ``convergent-evidence`` when the last half of the partial
    sums moves by less than ``tol`` (default ``1e-6`` times the total).
    """
    alphas = np.asarray(alphas, dtype=float)
    kmax = len(alphas) - 1 if kmax is None else int(kmax)
    if kmax < 1 or kmax >= len(alphas):
        raise InvalidInputError("need 1 <= kmax < len(alphas)")
    alphas = alphas[:kmax + 1]
    if np.any(alphas < 0) or np.any(alphas > 1) or not np.all(np.isfinite(alphas)):
        raise InvalidInputError("alpha values must lie in [0, 1]")
    terms = np.array([integral_Q_squared(Q, a) for a in alphas])
    report = SeriesReport.from_terms(terms, condition="alpha_quantile_mixing")
    total = report.total
    half = report.partial_sums[kmax // 2]
    tol = 1e-6 * abs(total) if tol is None else tol
    report.info["last_half_increment"] = float(total - half)
    report.verdict = CONVERGENT_EVIDENCE if total - half < tol or total == 0 else INCONCLUSIVE
    return report


class TailFunction:
    """Non-increasing right-continuous ``H : [0, inf) -> [0, 1]``, ``H -> 0``.

    Table form: ``points = [(x_1, H_1), ...]`` with increasing ``x`` and
    ``H(x) = 1`` for ``x < x_1``, ``H(x) = H_i`` on ``[x_i, x_{i+1})``.  The
    last value must be 0.

    Power form: ``H(x) = 1`` for ``x < x0`` and
    ``min(1, c x^(-q) (ln x)^(-b))`` for ``x >= x0`` (``x0 > 1`` when
    ``b > 0``).  ``x H(x)`` is integrable iff ``q > 2`` or ``q = 2, b > 1``.
    """

    def __init__(self, points=None, power=None):
        if (points is None) == (power is None):
            raise InvalidInputError("give either points or power")
        if power is not None:
            power = dict(power)
            self.kind = "power"
            self.c = float(power.get("c", 1.0))
            self.q = float(power["q"])
            self.b = float(power.get("b", 0.0))
            self.x0 = float(power.get("x0", 0.0))
            if self.c <= 0 or self.q <= 0 or self.b < 0:
                raise InvalidInputError("power tail needs c > 0, q > 0, b >= 0")
            if self.b > 0 and self.x0 <= 1.0:
                raise InvalidInputError("logarithmic tails need x0 > 1")
            if not (self.q > 2 or (self.q == 2 and self.b > 1)):
                raise IntegrabilityError("x H(x) is not integrable")
            self.x = self.h = None
            return
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            raise InvalidInputError("empty tail table")
        x, h = pts[:, 0], pts[:, 1]
        if x[0] < 0 or np.any(np.diff(x) <= 0):
            raise InvalidInputError("table abscissae must be increasing and >= 0")
        if np.any(h < 0) or np.any(h > 1) or np.any(np.diff(h) > 0):
            raise InvalidInputError("table values must be non-increasing in [0, 1]")
        if h[-1] != 0:
            raise InvalidInputError("a tail table must end at 0")
        self.kind = "table"
        self.x, self.h = x, h

    @classmethod
    def power_law(cls, q, c=1.0, b=0.0, x0=0.0):
        return cls(power={"c": c, "q": q, "b": b, "x0": x0})

    def __repr__(self):
        if self.kind == "power":
            return f"TailFunction(power={self.to_dict()!r})"
        return f"TailFunction({np.column_stack([self.x, self.h]).tolist()!r})"

    def _crossing(self):
        """Point beyond which ``H < 1``."""
        x0 = max(self.x0, 0.0)

        def g(x):
            return self.c * x ** (-self.q) * (math.log(x) ** (-self.b) if self.b else 1.0)

        if x0 > 0 and g(x0) <= 1.0:
            return x0
        if self.b == 0:
            return max(x0, self.c ** (1.0 / self.q))
        lo, hi = x0, 2.0 * x0
        while g(hi) > 1.0:
            lo, hi = hi, 2.0 * hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) > 1.0:
                lo = mid
            else:
                hi = mid
        return hi

    def __call__(self, x):
        xx = np.asarray(x, dtype=float)
        if np.any(xx < 0):
            raise InvalidInputError("tail functions live on [0, inf)")
        if self.kind == "table":
            idx = np.searchsorted(self.x, xx, side="right") - 1
            out = np.where(idx < 0, 1.0, self.h[np.maximum(idx, 0)])
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                tail = self.c * xx ** (-self.q)
                if self.b:
                    tail = tail * np.log(xx) ** (-self.b)
            out = np.where(xx < self.x0, 1.0, np.minimum(1.0, np.nan_to_num(tail, nan=1.0, posinf=1.0)))
        return float(out) if out.ndim == 0 else out

    def to_dict(self):
        if self.kind == "power":
            return {"kind": "power", "c": self.c, "q": self.q, "b": self.b, "x0": self.x0}
        return {"kind": "table", "points": np.column_stack([self.x, self.h]).tolist()}

    @classmethod
    def from_dict(cls, data):
        if data.get("kind") == "power":
            return cls(power=data)
        if data.get("kind") in ("table", "piecewise"):
            return cls(data["points"])
        raise InvalidInputError(f"unknown tail kind {data.get('kind')!r}")

    def to_json(self):
        return json.dumps(self.to_dict())


def tail_condition_integral(H, gamma):
    """``int_0^inf x H(x)^e dx`` with ``e = (1 - 2 gamma) / (1 - gamma)``.

    Returns ``math.inf`` when the exponent analysis of a power tail shows
    divergence: ``q e < 2``, or ``q e = 2`` with ``b e <= 1``.  Tables are
    integrated exactly; power tails use the closed form when ``b = 0`` and
    adaptive quadrature in ``s = ln x`` otherwise.
    """
    gamma = float(gamma)
    if not 0.0 < gamma < 0.5:
        raise InvalidInputError("gamma must lie in (0, 1/2)")
    e = (1.0 - 2.0 * gamma) / (1.0 - gamma)
    if H.kind == "table":
        x = np.concatenate([[0.0], H.x])
        h = np.concatenate([[1.0], H.h])
        return float(np.sum(h[:-1] ** e * 0.5 * (x[1:] ** 2 - x[:-1] ** 2)))
    qe, be = H.q * e, H.b * e
    if qe < 2 or (qe == 2 and be <= 1):
        return math.inf
    xs = H._crossing()
    head = 0.5 * xs * xs
    ce = H.c ** e
    if H.b == 0:
        return head + ce * xs ** (2.0 - qe) / (qe - 2.0)
    s0 = math.log(xs)
    lam = qe - 2.0
    if lam == 0:
        return head + ce * s0 ** (1.0 - be) / (be - 1.0)
    tail, _ = scipy.integrate.quad(lambda s: math.exp(-lam * (s - s0)) * s ** (-be),
                                   s0, math.inf, epsrel=1e-12, limit=400)
    return head + ce * math.exp(-lam * s0) * tail


@dataclass(frozen=True)
class EmpiricalSample:
    """Finite weighted sample (uniform weights by default)."""

    values: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise InvalidInputError("empty sample")
        if self.weights is None:
            w = np.full(v.size, 1.0 / v.size)
        else:
            w = np.asarray(self.weights, dtype=float).ravel()
            if w.shape != v.shape or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise InvalidInputError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.values.size


def normal_cdf(scale=1.0):
    """Cdf of ``N(0, scale^2)``; ``scale = 0`` gives the point mass at 0."""
    from scipy.special import ndtr

    if scale == 0:
        return lambda x: (np.asarray(x, dtype=float) >= 0).astype(float)
    return lambda x: ndtr(np.asarray(x, dtype=float) / scale)


def ks_distance(sample, cdf):
    """Two-sided Kolmogorov-Smirnov distance between a sample and a cdf.

    At every distinct sample point ``x`` both ``|F_n(x) - F(x)|`` and
    ``|F_n(x-) - F(x-)|`` are compared, with ``F(x-)`` read just below
    ``x``.  The sample is sorted by (value, weight) first, so the result does
    not depend on its order.
    """
    if not isinstance(sample, EmpiricalSample):
        sample = EmpiricalSample(sample)
    order = np.lexsort((sample.weights, sample.values))
    x = sample.values[order]
    w = sample.weights[order]
    cum = np.cumsum(w)
    last = np.concatenate([x[1:] != x[:-1], [True]])
    xs = x[last]
    upper = np.minimum(cum[last], 1.0)
    lower = np.concatenate([[0.0], upper[:-1]])
    f_at = np.asarray(cdf(xs), dtype=float)
    f_below = np.asarray(cdf(np.nextafter(xs, -np.inf)), dtype=float)
    d = max(float(np.max(np.abs(upper - f_at))), float(np.max(np.abs(lower - f_below))))
    return min(max(d, 0.0), 1.0)


@dataclass(frozen=True)
class FiniteProbSpace:
    """Atoms ``(probability, X value)`` and a partition generating a sigma-field."""

    probs: np.ndarray
    values: np.ndarray
    partition: tuple

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).ravel()
        x = np.asarray(self.values, dtype=float).ravel()
        if p.size == 0 or p.shape != x.shape:
            raise InvalidInputError("need matching nonempty probabilities and values")
        if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
            raise InvalidInputError("probabilities must be positive and sum to 1")
        blocks = tuple(tuple(int(i) for i in b) for b in self.partition)
        flat = sorted(i for b in blocks for i in b)
        if flat != list(range(p.size)) or any(len(b) == 0 for b in blocks):
            raise InvalidInputError("partition blocks must be disjoint, nonempty and cover all atoms")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "values", x)
        object.__setattr__(self, "partition", blocks)

    @classmethod
    def trivial(cls, probs, values):
        return cls(probs, values, (tuple(range(len(np.atleast_1d(probs)))),))

    def conditional_expectation(self):
        """``E(X | F)`` atom by atom."""
        out = np.empty_like(self.values)
        for block in self.partition:
            idx = list(block)
            p = self.probs[idx]
            out[idx] = float(p @ self.values[idx]) / float(p.sum())
        return out


def check_truncation_inequalities(space, p, eps, rtol=1e-12):
    """Evaluate the three conditional truncation inequalities.

    With ``Y = X - E(X|F)`` and ``R = E(|X|^p 1{|X| > eps})``:

    1. ``E(|X|^p 1{|E(X|F)| > 2 eps}) <= 2 R``
    2. ``E(|X|^p 1{|Y| > 3 eps}) <= 2 R``
    3. ``E(|Y|^p 1{|Y| > 4 eps}) <= 3 2^p R``

    Returns ``([(name, lhs, rhs), ...], all_hold)``; a side counts as holding
    when ``lhs <= rhs (1 + rtol) + rtol``.
    """
    p = float(p)
    eps = float(eps)
    if p < 1:
        raise InvalidInputError("p must be >= 1")
    if not eps > 0:
        raise InvalidInputError("eps must be > 0")
    x = space.values
    w = space.probs
    cond = space.conditional_expectation()
    y = x - cond
    ax = np.abs(x) ** p
    ref = float(w @ (ax * (np.abs(x) > eps)))
    rows = [
        ("cond_exp_2eps", float(w @ (ax * (np.abs(cond) > 2 * eps))), 2.0 * ref),
        ("centered_3eps", float(w @ (ax * (np.abs(y) > 3 * eps))), 2.0 * ref),
        ("centered_power_4eps", float(w @ (np.abs(y) ** p * (np.abs(y) > 4 * eps))), 3.0 * 2.0 ** p * ref),
    ]
    ok = all(lhs <= rhs * (1 + rtol) + rtol for _, lhs, rhs in rows)
    return rows, ok
