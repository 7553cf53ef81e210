"""Intermittent map with a neutral fixed point, Ulam discretization of its
transfer operator and the backward Markov chain driven by the dual kernel.

The map is

    T(x) = x (1 + 2^g x^g)   on [0, 1/2),
    T(x) = 2x - 1            on [1/2, 1],

with ``g`` in (0, 1).  Its absolutely continuous invariant law ``nu`` has a
density blowing up like ``x^(-g)`` at 0.  The operator ``L`` dual to
composition by ``T`` in ``L^2(nu)`` is the transition kernel of a Markov
chain that jumps from ``y`` to one of the two preimages of ``y``.
"""
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .errors import (
    ConvergenceError,
    DegenerateCellError,
    IntegrabilityError,
    InvalidInputError,
)
from .series import CONVERGENT_EVIDENCE, INCONCLUSIVE, SeriesReport

__all__ = [
    "GammaMap",
    "UlamModel",
    "ObservableSpec",
    "ulam_build",
    "l_gamma_apply",
    "chain_step",
    "dual_step",
    "alpha_coeffs_ulam",
    "eta_ulam",
    "traj",
    "default_test_dictionary",
    "duality_residuals",
    "loglog_slope",
    "step_weights",
    "resolved_horizon",
    "iid_surrogate",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _check_unit(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InvalidInputError(f"{name} must lie in [0, 1]")
    return arr


class GammaMap:
    """The intermittent map ``T_gamma`` on [0, 1]."""

    def __init__(self, gamma):
        gamma = float(gamma)
        if not 0.0 < gamma < 1.0:
            raise InvalidInputError("gamma must lie in (0, 1)")
        self.gamma = gamma
        self._c = 2.0 ** gamma

    def __repr__(self):
        return f"GammaMap(gamma={self.gamma!r})"

    def evaluate(self, x):
        x = _check_unit(x)
        out = np.where(x < 0.5, x * (1.0 + self._c * x ** self.gamma), 2.0 * x - 1.0)
        return float(out) if out.ndim == 0 else out

    __call__ = evaluate

    def derivative(self, x):
        x = _check_unit(x)
        out = np.where(x < 0.5, 1.0 + self._c * (1.0 + self.gamma) * x ** self.gamma, 2.0)
        return float(out) if out.ndim == 0 else out

    def _left(self, x):
        return x * (1.0 + self._c * x ** self.gamma)

    def _left_deriv(self, x):
        return 1.0 + self._c * (1.0 + self.gamma) * x ** self.gamma

    def preimages(self, y, tol=1e-13):
        """Return ``(x_left, x_right)`` with ``T(x) = y`` on each branch.

        ``x_left`` is None for ``y = 1``, which has no preimage in [0, 1/2).
        The left root is bracketed by ``[y / (1 + 2^g y^g), min(y, 1/2)]``,
        bisected down to width 1e-10 and polished by at most four Newton
        steps.
        """
        y = float(_check_unit(y, "y"))
        x_right = 0.5 * (y + 1.0)
        if y >= 1.0:
            return None, x_right
        if y == 0.0:
            return 0.0, x_right
        lo = y / (1.0 + self._c * y ** self.gamma)
        hi = min(y, 0.5)
        while hi - lo > 1e-10:
            mid = 0.5 * (lo + hi)
            if self._left(mid) < y:
                lo = mid
            else:
                hi = mid
        x = 0.5 * (lo + hi)
        for _ in range(4):
            r = self._left(x) - y
            if abs(r) <= tol:
                break
            x = min(max(x - r / self._left_deriv(x), lo), hi)
        return x, x_right

    def left_inverse(self, y):
        """Vectorized inverse of the left branch, ``y`` in [0, 1].

        The left branch is increasing and convex.  ``lo = y / (1 + 2^g y^g)``
        lies left of the root, so ``y / (1 + 2^g lo^g)`` lies right of it and
        Newton's method started there decreases monotonically onto the root.
        ``y = 1`` maps to 1/2.
        """
        y = np.asarray(y, dtype=float)
        g, c = self.gamma, self._c
        lo = y / (1.0 + c * y ** g)
        x = np.minimum(y / (1.0 + c * lo ** g), 0.5)
        for _ in range(50):
            xg = x ** g
            step = (x * (1.0 + c * xg) - y) / (1.0 + c * (1.0 + g) * xg)
            x = np.maximum(x - step, 0.0)
            if not np.any(np.abs(step) > 1e-16 * (1.0 + x)):
                break
        return x

    def orbit(self, x0, n):
        """Forward orbit ``x0, T x0, ..., T^n x0`` in plain float iteration."""
        x = float(_check_unit(x0, "x0"))
        out = np.empty(n + 1)
        out[0] = x
        g, c = self.gamma, self._c
        for i in range(1, n + 1):
            x = x * (1.0 + c * x ** g) if x < 0.5 else 2.0 * x - 1.0
            out[i] = x
        return out


def traj(gmap, x0, n, observable=None):
    """Forward orbit of length ``n + 1`` and, if given, Birkhoff sums.

    Returns ``(orbit, sums)`` where ``sums[k] = sum_{i<k} f(T^i x0)``
    (``sums`` is None when no observable is supplied).
    """
    orbit = gmap.orbit(x0, n)
    if observable is None:
        return orbit, None
    vals = np.asarray(observable(orbit[:-1]), dtype=float)
    return orbit, np.concatenate([[0.0], np.cumsum(vals)])


@dataclass(frozen=True)
class ObservableSpec:
    """A real observable on [0, 1].

    kind
        ``"bv_indicator"``: ``1{x <= threshold}``.
        ``"power_log"``: ``x^(-a) (d/a + |ln x|)^(-d)``, positive and
        non-increasing, behaving like ``x^(-a) |ln x|^(-d)`` at 0
        (``d = 0`` gives the pure power ``x^(-a)``).
        ``"table"``: one value per Ulam cell.
    """

    kind: str
    threshold: float = 0.5
    a: float = 0.0
    d: float = 0.0
    table: tuple = None
    centered: bool = True

    def __post_init__(self):
        if self.kind not in ("bv_indicator", "power_log", "table"):
            raise InvalidInputError(f"unknown observable kind {self.kind!r}")
        if self.kind == "power_log":
            if not 0.0 <= self.a < 0.5:
                raise InvalidInputError("power_log needs 0 <= a < 1/2")
            if self.d < 0:
                raise InvalidInputError("power_log needs d >= 0")
        if self.kind == "table" and self.table is None:
            raise InvalidInputError("table observable needs values")

    @classmethod
    def indicator(cls, threshold=0.5, centered=True):
        return cls("bv_indicator", threshold=threshold, centered=centered)

    @classmethod
    def power_log(cls, a, d=0.0, centered=True):
        return cls("power_log", a=a, d=d, centered=centered)

    def __call__(self, x, model=None):
        x = np.asarray(x, dtype=float)
        if self.kind == "bv_indicator":
            return (x <= self.threshold).astype(float)
        if self.kind == "power_log":
            with np.errstate(divide="ignore"):
                out = x ** (-self.a)
                if self.d > 0:
                    out = out * (self.d / self.a + np.abs(np.log(x))) ** (-self.d)
            return out
        if model is None:
            raise InvalidInputError("table observables need the Ulam model")
        return np.asarray(self.table, dtype=float)[model.cell_of(x)]

    def cell_averages(self, model, power=1):
        """Exact (indicator) or Gauss-Legendre cell averages of ``f**power``."""
        e = model.edges
        if self.kind == "bv_indicator":
            return model.interval_fraction(0.0, self.threshold)
        if self.kind == "table":
            return np.asarray(self.table, dtype=float) ** power
        avg = _gl_cell_average(lambda x: self(x) ** power, e[1:-1], e[2:])
        first, _ = scipy.integrate.quad(lambda x: self(x) ** power, 0.0, e[1], limit=200)
        if not math.isfinite(first):
            raise IntegrabilityError("observable is not integrable on the first cell")
        return np.concatenate([[first / (e[1] - e[0])], avg])

    def to_dict(self):
        out = {"kind": self.kind, "centered": self.centered}
        if self.kind == "bv_indicator":
            out["threshold"] = self.threshold
        elif self.kind == "power_log":
            out.update(a=self.a, d=self.d)
        else:
            out["table"] = list(self.table)
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "table" in data and data["table"] is not None:
            data["table"] = tuple(data["table"])
        return cls(**data)


def _gl_cell_average(func, lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = func(pts)
    return 0.5 * (vals @ _GL_WEIGHTS)


@dataclass(frozen=True, eq=False)
class UlamModel:
    """Ulam discretization of the transfer operator of ``T_gamma``.

    ``transfer[i, j]`` is the fraction of cell ``i`` (Lebesgue) mapped into
    cell ``j``.  ``masses`` is its left fixed vector (cell masses of the
    approximate invariant law) and ``density = masses / widths``.
    ``dual[j, i] = masses[i] transfer[i, j] / masses[j]`` is the discrete
    counterpart of ``L_gamma``: a row-stochastic kernel moving mass backward
    along the map.
    """

    gamma: float
    edges: np.ndarray
    transfer: sp.csr_matrix
    masses: np.ndarray
    grading: float = 2.0
    power_iterations: int = 0
    dual: sp.csr_matrix = field(default=None, repr=False)

    @property
    def n_cells(self):
        return len(self.edges) - 1

    @property
    def widths(self):
        return np.diff(self.edges)

    @property
    def density(self):
        return self.masses / self.widths

    @property
    def gmap(self):
        return GammaMap(self.gamma)

    def cell_of(self, x):
        x = np.asarray(x, dtype=float)
        n = self.n_cells
        # invert the graded grid, then fix off-by-one rounding
        idx = np.clip(np.floor(n * x ** (1.0 / self.grading)).astype(np.int64), 0, n - 1)
        e = self.edges
        idx = np.where(e[idx] > x, idx - 1, idx)
        idx = np.where((idx < n - 1) & (e[np.minimum(idx + 1, n)] <= x), idx + 1, idx)
        return np.clip(idx, 0, n - 1)

    def density_at(self, x):
        return self.density[self.cell_of(x)]

    def nu(self, values):
        """Integral of a per-cell function against the discrete invariant law."""
        return float(self.masses @ np.asarray(values, dtype=float))

    def interval_fraction(self, a, b):
        """Per-cell Lebesgue fraction covered by [a, b]."""
        e = self.edges
        lo = np.clip(a, e[:-1], e[1:])
        hi = np.clip(b, e[:-1], e[1:])
        return np.clip(hi - lo, 0.0, None) / self.widths

    def nu_interval(self, a, b):
        if b <= a:
            return 0.0
        return float(self.masses @ self.interval_fraction(a, b))

    def sample_stationary(self, uniforms_cell, uniforms_pos):
        """Inverse-cdf draws from the discrete invariant law."""
        cdf = np.cumsum(self.masses)
        cdf /= cdf[-1]
        cell = np.minimum(np.searchsorted(cdf, uniforms_cell, side="right"), self.n_cells - 1)
        return self.edges[cell] + uniforms_pos * self.widths[cell]

    def to_files(self, directory, stem="ulam"):
        """Write ``stem.json`` plus edges, matrix (COO rows) and density CSVs."""
        os.makedirs(directory, exist_ok=True)
        coo = self.transfer.tocoo()
        np.savetxt(os.path.join(directory, f"{stem}_edges.csv"), self.edges,
                   delimiter=",", header="edge", comments="", fmt="%.17g")
        np.savetxt(os.path.join(directory, f"{stem}_matrix.csv"),
                   np.column_stack([coo.row, coo.col, coo.data]), delimiter=",",
                   header="row,col,value", comments="", fmt=["%d", "%d", "%.17g"])
        np.savetxt(os.path.join(directory, f"{stem}_density.csv"),
                   np.column_stack([self.masses, self.density]), delimiter=",",
                   header="mass,density", comments="", fmt="%.17g")
        meta = {"gamma": self.gamma, "cells": self.n_cells, "grading": self.grading,
                "power_iterations": self.power_iterations,
                "files": {k: f"{stem}_{k}.csv" for k in ("edges", "matrix", "density")}}
        with open(os.path.join(directory, f"{stem}.json"), "w") as fh:
            json.dump(meta, fh, indent=2)
        return meta

    @classmethod
    def from_files(cls, directory, stem="ulam"):
        with open(os.path.join(directory, f"{stem}.json")) as fh:
            meta = json.load(fh)
        edges = np.loadtxt(os.path.join(directory, meta["files"]["edges"]), delimiter=",", skiprows=1)
        rows = np.loadtxt(os.path.join(directory, meta["files"]["matrix"]), delimiter=",", skiprows=1)
        dens = np.loadtxt(os.path.join(directory, meta["files"]["density"]), delimiter=",", skiprows=1)
        n = len(edges) - 1
        transfer = sp.csr_matrix((rows[:, 2], (rows[:, 0].astype(int), rows[:, 1].astype(int))), shape=(n, n))
        return _with_dual(cls(gamma=meta["gamma"], edges=edges, transfer=transfer,
                              masses=dens[:, 0], grading=meta["grading"],
                              power_iterations=meta["power_iterations"]))


def _with_dual(model):
    p = model.masses
    if np.any(p <= 0):
        raise DegenerateCellError(f"{int(np.sum(p <= 0))} cells carry no invariant mass")
    dual = (sp.diags(1.0 / p) @ model.transfer.T @ sp.diags(p)).tocsr()
    # power iteration leaves ~tol/p relative slack in row sums on tiny cells
    dual = (sp.diags(1.0 / np.asarray(dual.sum(axis=1)).ravel()) @ dual).tocsr()
    object.__setattr__(model, "dual", dual)
    return model


def ulam_build(gamma, n_cells=8192, grading=2.0, tol=1e-12, max_iter=100_000):
    """Build the Ulam model on the graded grid ``e_i = (i / N)^grading``.

    Matrix entries are exact interval intersections of each cell with the
    branch preimages of every other cell.  The invariant cell masses come
    from power iteration started at the Lebesgue masses, stopped when the
    L1 change per step drops below ``tol``.
    """
    if n_cells < 64:
        raise InvalidInputError("n_cells must be >= 64")
    if grading < 1:
        raise InvalidInputError("grading must be >= 1")
    gmap = GammaMap(gamma)
    edges = (np.arange(n_cells + 1) / n_cells) ** float(grading)
    edges[-1] = 1.0
    widths = np.diff(edges)

    left_pre = gmap.left_inverse(edges)
    left_pre[-1] = 0.5
    right_pre = 0.5 * (edges + 1.0)
    breaks = np.unique(np.concatenate([edges, left_pre, right_pre]))
    seg = np.diff(breaks)
    keep = seg > 0
    mid = 0.5 * (breaks[1:] + breaks[:-1])[keep]
    seg = seg[keep]
    src = np.clip(np.searchsorted(edges, mid, side="right") - 1, 0, n_cells - 1)
    dst = np.where(mid < 0.5,
                   np.searchsorted(left_pre, mid, side="right") - 1,
                   np.searchsorted(right_pre, mid, side="right") - 1)
    dst = np.clip(dst, 0, n_cells - 1)
    transfer = sp.csr_matrix((seg / widths[src], (src, dst)), shape=(n_cells, n_cells))
    transfer.sum_duplicates()

    pushforward = transfer.T.tocsr()
    p = widths.copy()
    for it in range(1, max_iter + 1):
        q = pushforward @ p
        q /= q.sum()
        delta = np.abs(q - p).sum()
        p = q
        if delta < tol:
            break
    else:
        raise ConvergenceError(f"power iteration did not reach {tol} in {max_iter} steps")
    return _with_dual(UlamModel(gamma=float(gamma), edges=edges, transfer=transfer,
                                masses=p, grading=float(grading), power_iterations=it))


def l_gamma_apply(model, fvec):
    """Apply the discrete dual operator to a per-cell function.

    Raises DegenerateCellError when a cell carries no invariant mass.
    """
    if model.dual is None:
        _with_dual(model)
    return model.dual @ np.asarray(fvec, dtype=float)


def _branch_weights(model, y):
    """Preimages of ``y`` and the probability of jumping to the left one."""
    gmap = GammaMap(model.gamma)
    y = np.asarray(y, dtype=float)
    x_left = gmap.left_inverse(y)
    x_right = 0.5 * (y + 1.0)
    w_left = model.density_at(x_left) / gmap._left_deriv(x_left)
    w_right = 0.5 * model.density_at(x_right)
    p_left = np.where(y >= 1.0, 0.0, w_left / (w_left + w_right))
    return x_left, x_right, p_left


def dual_step(model, y, u):
    """Vectorized step of the backward chain driven by uniforms ``u``."""
    x_left, x_right, p_left = _branch_weights(model, y)
    return np.where(np.asarray(u) < p_left, x_left, x_right)


def chain_step(model, y, rng):
    """One step of the Markov chain with kernel ``L_gamma`` from state ``y``.

    The chain jumps to ``x_left`` or ``x_right`` (the two preimages of
    ``y``) with probabilities proportional to ``h(x) / |T'(x)|``, ``h`` the
    discrete invariant density.
    """
    y = float(_check_unit(y, "y"))
    return float(dual_step(model, np.array([y]), np.array([rng.random()]))[0])


def step_weights(model, y):
    """``((x_left, p_left), (x_right, p_right))`` for a scalar state."""
    x_left, x_right, p_left = _branch_weights(model, np.array([float(y)]))
    return (float(x_left[0]), float(p_left[0])), (float(x_right[0]), 1.0 - float(p_left[0]))


def alpha_coeffs_ulam(model, kmax, thresholds=None, chunk=1024):
    """Estimated alpha-dependence coefficients ``alpha_Y(k)``, k = 0..kmax.

    For every threshold cell edge ``t`` the indicator of ``{y <= t}`` is
    pushed ``k`` times through the dual kernel; ``alpha_Y(k)`` is the largest
    nu-weighted L1 distance to its stationary mean.  ``thresholds`` lists
    interior edge indices (default: all of them).
    """
    if kmax < 1:
        raise InvalidInputError("kmax must be >= 1")
    n = model.n_cells
    idx = np.arange(1, n) if thresholds is None else np.asarray(thresholds, dtype=int)
    p = model.masses
    alphas = np.zeros(kmax + 1)
    cells = np.arange(n)[:, None]
    for start in range(0, len(idx), chunk):
        block = idx[start:start + chunk]
        v = (cells < block[None, :]).astype(float)
        mean = p @ v
        alphas[0] = max(alphas[0], float((p @ np.abs(v - mean)).max()))
        for k in range(1, kmax + 1):
            v = model.dual @ v
            alphas[k] = max(alphas[k], float((p @ np.abs(v - mean)).max()))
    return np.minimum(alphas, 1.0)


def loglog_slope(ks, values):
    ks = np.asarray(ks, dtype=float)
    values = np.asarray(values, dtype=float)
    return float(np.polyfit(np.log(ks), np.log(values), 1)[0])


def resolved_horizon(model):
    """Number of steps a forward orbit needs to leave the first cell.

    Near 0 the orbit obeys ``x_k ~ (gamma 2^gamma k)^(-1/gamma)``, so the
    first cell of width ``e_1`` is escaped after about
    ``e_1^(-gamma) / (gamma 2^gamma)`` steps.  Correlations at lags well
    below this horizon are resolved by the grid; beyond it the discrete
    chain forgets the neutral fixed point and decays geometrically.
    """
    g = model.gamma
    return float(model.edges[1] ** (-g) / (g * 2.0 ** g))


def eta_ulam(model, obs, kmax=2000, tol=1e-2, min_slope=-2.0):
    """Long-run variance of ``f(Y_i)`` under the discrete invariant law.

    Terms are ``nu(fbar^2)`` followed by ``2 nu(L^k fbar * fbar)`` for
    ``k = 1..kmax`` with ``fbar = f - nu(f)``.

    The verdict looks at lags in ``[H/8, H/4]``, ``H`` the resolved horizon
    of the grid (see ``resolved_horizon``), where the decay of the terms is
    still governed by the map and not by the discretization.  It is
    ``convergent-evidence`` when the fitted log-log slope of ``|term_k|``
    there is below ``min_slope`` and the partial sums beyond ``H/4`` move by
    less than ``tol`` relative to the total; otherwise ``inconclusive``.
    """
    horizon = resolved_horizon(model)
    lo, hi = max(2, int(horizon / 8)), max(4, int(horizon / 4))
    if kmax <= hi:
        raise InvalidInputError(f"kmax must exceed {hi} for this grid")
    fbar = obs.cell_averages(model)
    f2 = obs.cell_averages(model, power=2)
    if not (np.all(np.isfinite(fbar)) and np.all(np.isfinite(f2))):
        raise IntegrabilityError("observable not square integrable on the grid")
    mean = model.nu(fbar)
    fc = fbar - mean
    var = model.nu(f2) - mean ** 2
    terms = np.empty(kmax + 1)
    terms[0] = var
    g = fc.copy()
    weighted = model.masses * fc
    for k in range(1, kmax + 1):
        g = model.dual @ g
        terms[k] = 2.0 * float(weighted @ g)
    report = SeriesReport.from_terms(terms, condition="long_run_variance")
    eta = report.total
    if eta < -1e-6:
        raise ConvergenceError(f"negative long-run variance {eta}")
    ks = np.arange(lo, hi + 1)
    tail = np.abs(terms[lo:hi + 1])
    positive = tail > 0
    slope = loglog_slope(ks[positive], tail[positive]) if positive.sum() > 2 else -np.inf
    drift = float(np.max(np.abs(report.partial_sums[hi:] - eta)))
    rel_drift = drift / abs(eta) if eta != 0 else (0.0 if drift == 0 else np.inf)
    report.info.update(mean=mean, variance=var, horizon=horizon, slope_window=(lo, hi),
                       tail_slope=slope, drift_after_window=drift)
    if slope < min_slope and rel_drift < tol:
        report.verdict = CONVERGENT_EVIDENCE
    else:
        report.verdict = INCONCLUSIVE
    return max(eta, 0.0), report


def iid_surrogate(model):
    """Model whose dual kernel has every row equal to the invariant law.

    Successive states are then independent draws from ``nu``; useful as an
    independence control.  The kernels are rank-one linear operators, so
    the surrogate cannot be written to files.
    """
    p = model.masses
    n = model.n_cells

    def rank_one(weights):
        def mv(v):
            v = np.asarray(v, dtype=float)
            return np.multiply.outer(np.ones(n), weights @ v)
        return LinearOperator((n, n), matvec=mv, matmat=mv, dtype=float)

    return UlamModel(gamma=model.gamma, edges=model.edges, transfer=rank_one(p),
                     masses=p, grading=model.grading,
                     power_iterations=model.power_iterations, dual=rank_one(p))


def _exact_pair_integral(model, f_iv, g_iv):
    """``nuhat({x in F : T x in G})`` for half-open intervals F, G."""
    gmap = GammaMap(model.gamma)
    (a, b), (c, d) = f_iv, g_iv
    total = 0.0
    lc, ld = gmap.left_inverse(np.array([c, d]))
    lo, hi = max(a, lc), min(b, ld, 0.5)
    total += model.nu_interval(lo, hi)
    lo, hi = max(a, 0.5 * (c + 1.0)), min(b, 0.5 * (d + 1.0))
    total += model.nu_interval(lo, hi)
    return total


def _smooth_pair_integral(model, f, g):
    """``int f(x) g(T x) h(x) dx`` by per-cell Gauss-Legendre, split at 1/2."""
    gmap = GammaMap(model.gamma)
    e = model.edges
    lo, hi = e[:-1], e[1:]
    total = 0.0
    for a, b in ((lo, np.minimum(hi, 0.5)), (np.maximum(lo, 0.5), hi)):
        ok = b > a
        avg = _gl_cell_average(lambda x: f(x) * g(gmap.evaluate(np.clip(x, 0, 1))), a[ok], b[ok])
        total += float(np.sum(model.density[ok] * (b[ok] - a[ok]) * avg))
    return total


def default_test_dictionary():
    """(f, g) pairs used to measure the duality defect of a model."""
    return [
        ("interval", (0.0, 0.5), (0.5, 1.0)),
        ("interval", (0.0, 0.3), (0.0, 0.3)),
        ("interval", (0.2, 0.9), (0.1, 0.6)),
        ("smooth", lambda x: x, lambda y: np.cos(np.pi * y)),
        ("smooth", lambda x: np.sqrt(x), lambda y: y ** 2),
    ]


def duality_residuals(model, dictionary=None):
    """``|nuhat(f g o T) - nuhat(Lf g)|`` for every pair of the dictionary.

    The left side integrates the exact map against the discrete density;
    the right side uses cell averages of ``f`` and ``g`` and the discrete
    dual operator.
    """
    dictionary = default_test_dictionary() if dictionary is None else dictionary
    e = model.edges
    out = []
    for kind, f, g in dictionary:
        if kind == "interval":
            exact = _exact_pair_integral(model, f, g)
            fv = model.interval_fraction(*f)
            gv = model.interval_fraction(*g)
        else:
            exact = _smooth_pair_integral(model, f, g)
            fv = _gl_cell_average(f, e[:-1], e[1:])
            gv = _gl_cell_average(g, e[:-1], e[1:])
        discrete = model.nu(l_gamma_apply(model, fv) * gv)
        out.append(abs(exact - discrete))
    return np.array(out)
