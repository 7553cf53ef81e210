"""Command-line front end.

Every command writes a JSON report (embedding the resolved configuration,
its hash and the tool version) plus CSV data under ``--out-dir``, prints a
one-paragraph summary and exits with 0 on success, 1 on input errors and
2 when the run finished but a numerical acceptance check failed.
"""
import argparse
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._rng import resolve_seed
from .errors import QuenchlabError

COMMANDS = ("map-orbit", "ulam", "alpha", "conditions", "quenched", "fidis", "blocks",
            "counterexample", "tailcheck", "inequalities")

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 1, 2
THREADS_ENV = "QUENCHLAB_THREADS"


class ConfigError(QuenchlabError):
    """Invalid command-line configuration."""


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.params.get("seed") is None:
            self.params["seed"] = resolve_seed(None)

    def to_dict(self):
        return {"command": self.command, "params": _jsonable(self.params)}

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    return obj


# ---------------------------------------------------------------- plot data

SERIES_HEADER = ["k", "term", "partial_sum"]
ALPHA_HEADER = ["k", "alpha", "loglog_slope_window"]


def _window_slopes(alphas):
    """Log-log slope of ``alpha`` over ``[ceil(k/2), k]`` for each ``k``."""
    from .intermittent import loglog_slope

    out = []
    for k in range(len(alphas)):
        lo = (k + 1) // 2
        ks = np.arange(max(lo, 1), k + 1)
        vals = np.asarray(alphas)[ks] if ks.size else np.array([])
        if ks.size >= 2 and np.all(vals > 0):
            out.append(loglog_slope(ks, vals))
        else:
            out.append(None)
    return out


def _svg_chart(series, title, logy=True, width=480, height=320):
    """Minimal SVG line chart; ``series`` maps a label to ``(x, y)`` lists."""
    pad = 40
    pts = {}
    xs_all, ys_all = [], []
    for label, (x, y) in series.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y) & ((y > 0) if logy else True)
        x, y = x[ok], (np.log10(y[ok]) if logy else y[ok])
        pts[label] = (x, y)
        xs_all.extend(x.tolist())
        ys_all.extend(y.tolist())
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<text x="{pad}" y="20" font-size="14">{title}</text>']
    if xs_all:
        x0, x1 = min(xs_all), max(xs_all)
        y0, y1 = min(ys_all), max(ys_all)
        x1 = x1 if x1 > x0 else x0 + 1
        y1 = y1 if y1 > y0 else y0 + 1
        colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
        for c, (label, (x, y)) in enumerate(pts.items()):
            px = pad + (x - x0) / (x1 - x0) * (width - 2 * pad)
            py = height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)
            coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
            color = colors[c % len(colors)]
            lines.append(f'<polyline fill="none" stroke="{color}" points="{coords}"/>')
            lines.append(f'<text x="{width - pad - 120}" y="{40 + 16 * c}" fill="{color}" font-size="12">{label}</text>')
    lines.append("</svg>")
    return "\n".join(lines)


def emit_plotdata(report, out_dir, stem="plot", svg=True):
    """Write CSV (and optionally SVG) plot data for a report dictionary.

    An ``alpha`` table gives ``stem_alpha.csv`` with columns
    ``k, alpha, loglog_slope_window``; each entry of ``series`` gives
    ``stem_<name>.csv`` with ``k, term, partial_sum``.  A report without
    either gives an empty ``stem_series.csv`` with headers only.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if report.get("alpha") is not None:
        alphas = report["alpha"]
        path = os.path.join(out_dir, f"{stem}_alpha.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(ALPHA_HEADER)
            for k, (a, s) in enumerate(zip(alphas, _window_slopes(alphas))):
                w.writerow([k, repr(float(a)), "" if s is None else repr(s)])
        written.append(path)
        if svg:
            spath = os.path.join(out_dir, f"{stem}_alpha.svg")
            ks = list(range(1, len(alphas)))
            with open(spath, "w") as fh:
                fh.write(_svg_chart({"alpha": (np.log10(ks), alphas[1:])}, "log10 alpha vs log10 k"))
            written.append(spath)
    series = report.get("series") or {}
    for name, s in series.items():
        path = os.path.join(out_dir, f"{stem}_{name}.csv")
        start = s.get("start_index", 0)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SERIES_HEADER)
            for i, (t, ps) in enumerate(zip(s["terms"], s["partial_sums"])):
                w.writerow([start + i, repr(float(t)), repr(float(ps))])
        written.append(path)
    if series and svg:
        spath = os.path.join(out_dir, f"{stem}_partial_sums.svg")
        chart = {name: (np.arange(len(s["partial_sums"])) + s.get("start_index", 0), s["partial_sums"])
                 for name, s in series.items()}
        with open(spath, "w") as fh:
            fh.write(_svg_chart(chart, "partial sums", logy=False))
        written.append(spath)
    if not written:
        path = os.path.join(out_dir, f"{stem}_series.csv")
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerow(SERIES_HEADER)
        written.append(path)
    return written


# ------------------------------------------------------------------ helpers

def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_observable(text):
    from .intermittent import ObservableSpec

    parts = str(text).split(":")
    try:
        if parts[0] == "indicator":
            return ObservableSpec.indicator(float(parts[1]) if len(parts) > 1 else 0.5)
        if parts[0] == "power_log":
            return ObservableSpec.power_log(float(parts[1]), float(parts[2]) if len(parts) > 2 else 0.0)
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad observable {text!r}") from exc
    raise ConfigError(f"unknown observable {text!r}; use indicator:t or power_log:a:d")


def _load_chain(path):
    from .finite_chain import FiniteChain

    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read chain file: {exc}") from exc
    return FiniteChain.from_json(text)


def _need(params, *names):
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise ConfigError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _model(params):
    from .intermittent import ulam_build

    _need(params, "gamma")
    return ulam_build(params["gamma"], params.get("cells") or 8192, params.get("grading") or 2.0)


def _sampler(params):
    """Sampler and start from either ``--chain`` or the intermittent options."""
    from .quenched_mc import FiniteChainSampler, UlamChainSampler

    if params.get("chain"):
        chain = _load_chain(params["chain"])
        x0 = int(params.get("x0") or 0)
        return FiniteChainSampler(chain), x0, {"kind": "finite_chain"}
    model = _model(params)
    obs = _parse_observable(params.get("observable") or "indicator:0.5")
    gamma = params["gamma"]
    if not 0 < gamma < 0.5:
        raise ConfigError("quenched experiments need gamma in (0, 1/2)")
    x0 = float(params.get("x0") if params.get("x0") is not None else 0.3)
    return UlamChainSampler(model, obs), x0, {"kind": "intermittent", "model": model, "obs": obs}


def _eta_for(sampler, info):
    from .finite_chain import eta_exact
    from .intermittent import eta_ulam

    if info["kind"] == "finite_chain":
        return eta_exact(sampler.chain)[0]
    return eta_ulam(info["model"], info["obs"])[0]


# ----------------------------------------------------------------- commands

def _cmd_map_orbit(p, out):
    from .intermittent import GammaMap, traj

    _need(p, "gamma")
    gmap = GammaMap(p["gamma"])
    n = int(p.get("n") or 100_000)
    x0 = float(p.get("x0") if p.get("x0") is not None else 0.7)
    thr = float(p.get("threshold") or 0.5)
    orbit, sums = traj(gmap, x0, n, lambda x: (x <= thr).astype(float))
    path = os.path.join(out, "orbit.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "x", "S_i"])
        for i in range(min(n, 10_000) + 1):
            w.writerow([i, repr(float(orbit[i])), repr(float(sums[i]))])
    report = {"condition": "birkhoff_average", "gamma": gmap.gamma, "x0": x0, "n": n,
              "threshold": thr, "time_average": float(sums[-1] / n)}
    summary = (f"Forward orbit of T_gamma (gamma={gmap.gamma}) from x0={x0}: the time average of "
               f"1[0,{thr}] over n={n} steps is {report['time_average']:.6f}.")
    return report, [path], summary, True


def _cmd_ulam(p, out):
    from .intermittent import duality_residuals, loglog_slope

    model = _model(p)
    files = model.to_files(out, "ulam")["files"].values()
    res = duality_residuals(model)
    c = 0.5 * (model.edges[1:] + model.edges[:-1])
    sel = (c > 1e-4) & (c < 1e-2)
    slope = loglog_slope(c[sel], model.density[sel])
    tol = float(p.get("duality_tol") or 1e-3)
    ok = bool(np.all(res < tol))
    report = {"condition": "invariant_density", "gamma": model.gamma, "cells": model.n_cells,
              "grading": model.grading, "power_iterations": model.power_iterations,
              "density_loglog_slope": slope, "duality_residuals": res, "duality_tol": tol,
              "nu_left_half": model.nu_interval(0.0, 0.5)}
    summary = (f"Ulam model with {model.n_cells} cells for gamma={model.gamma}: density log-log slope "
               f"{slope:.3f} on (1e-4, 1e-2) against the x^-gamma envelope, largest duality residual "
               f"{res.max():.2e} (tolerance {tol:g}).")
    return report, [os.path.join(out, f) for f in files], summary, ok


def _cmd_alpha(p, out):
    from .intermittent import alpha_coeffs_ulam, loglog_slope

    kmax = int(p.get("kmax") or 64)
    if p.get("chain"):
        from .finite_chain import alpha_coeffs

        chain = _load_chain(p["chain"])
        alphas = alpha_coeffs(chain, kmax)
        report = {"condition": "alpha_dependence", "kmax": kmax, "alpha": alphas}
        files = emit_plotdata(report, out, "alpha", svg=not p.get("no_svg"))
        return report, files, f"Exact alpha-dependence coefficients of the chain up to k={kmax}.", True
    model = _model(p)
    alphas = alpha_coeffs_ulam(model, max(kmax, 32))
    ks = np.arange(4, 33)
    slope = loglog_slope(ks, alphas[ks])
    target = -(1.0 - model.gamma) / model.gamma
    ok = abs(slope - target) <= 0.6
    report = {"condition": "alpha_dependence", "gamma": model.gamma, "cells": model.n_cells,
              "alpha": alphas, "slope_4_32": slope, "target_slope": target}
    files = emit_plotdata(report, out, "alpha", svg=not p.get("no_svg"))
    summary = (f"alpha-dependence coefficients of the intermittent chain (gamma={model.gamma}): fitted "
               f"log-log slope on k in [4,32] is {slope:.3f} against the power-law exponent {target:.3f}.")
    return report, files, summary, ok


def _cmd_conditions(p, out):
    from .finite_chain import cond21_series, eta_exact, gordin_l1_stats, hh_series, mw_series

    _need(p, "chain")
    chain = _load_chain(p["chain"])
    kmax = int(p.get("kmax") or 200)
    eta, eta_rep = eta_exact(chain, kmax=max(kmax, 1000))
    c21 = cond21_series(chain, kmax)
    mw = mw_series(chain, kmax)
    hh = hh_series(chain, kmax)
    sup_norm, _ = gordin_l1_stats(chain, kmax, int(p.get("replicas") or 200), p["seed"])
    report = {
        "eta": eta,
        "covariance_summability": {"verdict": c21.verdict, "total": c21.total, "tail_bound": c21.tail_bound},
        "maxwell_woodroofe": {"verdict": mw.verdict, "total": mw.total, "tail_bound": mw.tail_bound},
        "hannan_heyde": {"verdict": hh.verdict, "total": hh.total, "tail_bound": hh.tail_bound},
        "gordin_l1": {"sup_norm": sup_norm, "verdict": "bounded" if math.isfinite(sup_norm) else "unbounded"},
        "series": {"covariance_summability": c21.to_dict(), "maxwell_woodroofe": mw.to_dict(),
                   "hannan_heyde": hh.to_dict(), "long_run_variance": eta_rep.to_dict()},
    }
    files = emit_plotdata(report, out, "conditions", svg=not p.get("no_svg"))
    summary = (f"Projective criteria of the chain: covariance summability {c21.verdict} (sum {c21.total:.6g}), "
               f"Maxwell-Woodroofe {mw.verdict}, Hannan-Heyde {hh.verdict}, Gordin L1 sup norm "
               f"{sup_norm:.6g}; long-run variance eta = {eta:.10g}.")
    return report, files, summary, True


def _cmd_quenched(p, out):
    from .quenched_mc import quenched_clt_report, run_replicas

    sampler, x0, info = _sampler(p)
    n = int(p.get("n") or 4096)
    R = int(p.get("replicas") or 1000)
    ens = run_replicas(sampler, x0, n, R, p["seed"])
    eta = float(p["eta"]) if p.get("eta") is not None else _eta_for(sampler, info)
    rep = quenched_clt_report(ens, eta)
    path = os.path.join(out, "replicas.csv")
    ens.to_csv(path)
    tol = float(p["ks_tol"]) if p.get("ks_tol") is not None else rep.ks_null_band
    ok = rep.ks <= tol if eta > 0 else rep.passed
    report = rep.to_dict()
    report["ks_tol"] = tol
    report["eta"] = eta
    summary = (f"Quenched CLT from x0={x0}: KS distance of S_n/sqrt(n) (n={n}, R={R}) to N(0, eta={eta:.6g}) "
               f"is {rep.ks:.4f}; null band {rep.ks_null_band:.4f}, acceptance tolerance {tol:.4f}.")
    return report, [path], summary, ok


def _cmd_fidis(p, out):
    from .quenched_mc import fidis_report, run_replicas

    sampler, x0, info = _sampler(p)
    n = int(p.get("n") or 4096)
    R = int(p.get("replicas") or 1000)
    times = _floats(p.get("times") or "0.5,1")
    weights = _floats(p.get("weights") or ",".join("1" for _ in times))
    from .quenched_mc import _snap_index

    knots = [_snap_index(n, t)[0] for t in times]
    skeleton = sorted({0} | set(knots) | {min(n, k + 1) for k in knots})
    ens = run_replicas(sampler, x0, n, R, p["seed"], skeleton=skeleton)
    eta = float(p["eta"]) if p.get("eta") is not None else _eta_for(sampler, info)
    rep = fidis_report(ens, times, weights, eta)
    corr_tol = float(p.get("corr_tol") or 0.05)
    ks_tol = float(p["ks_tol"]) if p.get("ks_tol") is not None else rep["ks_null_band"]
    ok = rep["max_offdiag_corr"] < corr_tol and rep["ks"] <= ks_tol
    rep.update(corr_tol=corr_tol, ks_tol=ks_tol, start=x0, n=n, replicas=R)
    summary = (f"Finite-dimensional laws of W_n at t={times}: KS {rep['ks']:.4f} against the Gaussian target, "
               f"largest increment correlation {rep['max_offdiag_corr']:.4f} (tolerance {corr_tol}).")
    return rep, [], summary, ok


def _cmd_blocks(p, out):
    from .finite_chain import block_diagnostics_exact
    from .quenched_mc import block_diagnostics_mc

    sampler, x0, info = _sampler(p)
    m = int(p.get("m") or 8)
    pp = int(p.get("p") or 64)
    eps = _floats(p.get("eps") or "0.5")
    R = int(p.get("replicas") or 1000)
    if info["kind"] == "finite_chain":
        bd = block_diagnostics_exact(sampler.chain, x0, m, pp, eps, R, p["seed"])
    else:
        bd = block_diagnostics_mc(sampler, x0, m, pp, eps, R, p["seed"])
    report = bd.to_dict()
    summary = (f"Blocking conditions C1-C4 with m={m}, p={pp} from x0={x0}: C1 {bd.c1_stat:.3e}, "
               f"C2 deviations {bd.c2_stats[0]:.3e} and {bd.c2_stats[1]:.3e}, C3 {bd.c3_stat}, C4 {bd.c4_stat}.")
    return report, [], summary, True


def _cmd_counterexample(p, out):
    from .counterexample import empirical_conditional_norms, realize, series_summary

    K = int(p.get("kmax") or 5)
    mode = p.get("mode") or "series"
    if mode == "series":
        reps = series_summary(K, int(p.get("n_max") or 4096))
        expected = {"covariance_summability": "convergent-certified", "gordin_l1": "divergent-evidence",
                    "maxwell_woodroofe": "divergent-evidence", "hannan_heyde": "divergent-evidence"}
        report = {name: {"verdict": r.verdict, "total": r.total} for name, r in reps.items()}
        report["series"] = {name: r.to_dict() for name, r in reps.items()}
        ok = all(reps[k].verdict == v for k, v in expected.items())
        files = emit_plotdata(report, out, "counterexample", svg=not p.get("no_svg"))
        summary = ("Counterexample series up to level K={}: covariance summability {}, Gordin L1 {}, "
                   "Maxwell-Woodroofe {}, Hannan-Heyde {}.").format(
            K, *(reps[k].verdict for k in ("covariance_summability", "gordin_l1",
                                           "maxwell_woodroofe", "hannan_heyde")))
        return report, files, summary, ok
    if mode != "realize":
        raise ConfigError("--mode must be series or realize")
    system = realize(K, p["seed"])
    ns = [int(v) for v in system.N]
    emp = empirical_conditional_norms(system, ns, int(p.get("replicas") or 20000), p["seed"])
    slack = [1.0 - system.max_drift_defect(k) / system.eps[k - 1] for k in range(1, K + 1)]
    report = {"condition": "gordin_l1", "K": K, "rotation_angle": system.alpha,
              "arc_starts": system.arc_starts, "arc_lengths": system.rho,
              "invariance_slack": slack, "empirical": emp}
    ok = min(slack) >= 0.5
    summary = (f"Realized counterexample with K={K}: E|E_0(S_n)| at n=N_k is "
               + ", ".join(f"{m:.3f}" for m in emp["mean"]) + f"; invariance slack at least {min(slack):.2f}.")
    return report, [], summary, ok


def _cmd_tailcheck(p, out):
    from .probkit import TailFunction, tail_condition_integral

    _need(p, "gamma")
    if p.get("table"):
        with open(p["table"]) as fh:
            H = TailFunction.from_dict(json.load(fh))
    else:
        _need(p, "q")
        H = TailFunction.power_law(p["q"], c=p.get("c") or 1.0, b=p.get("b") or 0.0, x0=p.get("x0") or 0.0)
    val = tail_condition_integral(H, p["gamma"])
    report = {"condition": "tail_integral", "tail": H.to_dict(), "gamma": p["gamma"], "integral": val,
              "finite": math.isfinite(val)}
    summary = (f"Tail-function integral int x H(x)^((1-2g)/(1-g)) dx for gamma={p['gamma']}: "
               + (f"{val:.10g} (finite)." if math.isfinite(val) else "divergent."))
    return report, [], summary, True


def _cmd_inequalities(p, out):
    from .finite_chain import FiniteChain, max_inequality_bruteforce
    from .probkit import FiniteProbSpace, check_truncation_inequalities

    rng = np.random.default_rng(p["seed"])
    n_chains = int(p.get("chains") or 100)
    n = int(p.get("n") or 6)
    worst = -math.inf
    chain_ok = 0
    for _ in range(n_chains):
        K = rng.random((3, 3)) + 0.05
        K /= K.sum(axis=1, keepdims=True)
        chain = FiniteChain(K, rng.normal(size=3))
        for lam in (0.0, 0.5):
            lhs, rhs = max_inequality_bruteforce(chain, int(rng.integers(3)), n, lam)
            worst = max(worst, lhs - rhs)
            chain_ok += lhs <= rhs + 1e-10
    n_spaces = int(p.get("spaces") or 1000)
    space_ok = 0
    for _ in range(n_spaces):
        size = int(rng.integers(1, 17))
        probs = rng.random(size) + 1e-3
        probs /= probs.sum()
        labels = rng.integers(0, int(rng.integers(1, 5)), size=size)
        blocks = [tuple(np.flatnonzero(labels == b)) for b in np.unique(labels)]
        space = FiniteProbSpace(probs, rng.normal(size=size) * rng.exponential(), blocks)
        eps = float(np.exp(rng.uniform(np.log(1e-2), np.log(10.0))))
        _, ok = check_truncation_inequalities(space, int(rng.choice([1, 2])), eps)
        space_ok += ok
    ok = chain_ok == 2 * n_chains and space_ok == n_spaces
    report = {"condition": ["maximal_inequality", "truncation_inequalities"],
              "maximal_cases": 2 * n_chains, "maximal_holding": int(chain_ok), "max_excess": worst,
              "truncation_cases": n_spaces, "truncation_holding": int(space_ok)}
    summary = (f"Brute-force inequality checks: maximal inequality held on {chain_ok}/{2 * n_chains} "
               f"enumerated cases, truncation inequalities on {space_ok}/{n_spaces} random spaces.")
    return report, [], summary, ok


HANDLERS = {
    "map-orbit": _cmd_map_orbit, "ulam": _cmd_ulam, "alpha": _cmd_alpha, "conditions": _cmd_conditions,
    "quenched": _cmd_quenched, "fidis": _cmd_fidis, "blocks": _cmd_blocks,
    "counterexample": _cmd_counterexample, "tailcheck": _cmd_tailcheck, "inequalities": _cmd_inequalities,
}


def run(config, out_dir=".", report_name=None, stream=None):
    """Execute a configuration; returns ``(exit_code, files)``."""
    stream = sys.stdout if stream is None else stream
    os.makedirs(out_dir, exist_ok=True)
    params = dict(config.params)
    params["threads"] = os.environ.get(THREADS_ENV) or os.cpu_count()
    try:
        report, files, summary, ok = HANDLERS[config.command](params, out_dir)
    except (QuenchlabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, []
    report = dict(_jsonable(report))
    report["config"] = config.to_dict()
    report["config_hash"] = config.digest()
    report["tool_version"] = __version__
    report["acceptance_passed"] = bool(ok)
    name = report_name or f"{config.command}_report.json"
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    print(summary, file=stream)
    return (EXIT_OK if ok else EXIT_CHECK), [path] + list(files)


def build_parser():
    parser = argparse.ArgumentParser(prog="quenchlab", description="Quenched limit theorem laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out-dir", default=".")
        sp.add_argument("--out", help="report file name inside --out-dir")
        sp.add_argument("--no-svg", action="store_true")

    def model_opts(sp):
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--cells", type=int)
        sp.add_argument("--grading", type=float)

    def sampler_opts(sp):
        model_opts(sp)
        sp.add_argument("--chain")
        sp.add_argument("--x0", type=float)
        sp.add_argument("--observable")
        sp.add_argument("--n", type=int)
        sp.add_argument("--replicas", type=int)
        sp.add_argument("--eta", type=float)
        sp.add_argument("--ks-tol", type=float)

    sp = sub.add_parser("map-orbit")
    common(sp)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--x0", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--threshold", type=float)

    sp = sub.add_parser("ulam")
    common(sp)
    model_opts(sp)
    sp.add_argument("--duality-tol", type=float)

    sp = sub.add_parser("alpha")
    common(sp)
    model_opts(sp)
    sp.add_argument("--chain")
    sp.add_argument("--kmax", type=int)

    sp = sub.add_parser("conditions")
    common(sp)
    sp.add_argument("--chain")
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--replicas", type=int)

    sp = sub.add_parser("quenched")
    common(sp)
    sampler_opts(sp)

    sp = sub.add_parser("fidis")
    common(sp)
    sampler_opts(sp)
    sp.add_argument("--times")
    sp.add_argument("--weights")
    sp.add_argument("--corr-tol", type=float)

    sp = sub.add_parser("blocks")
    common(sp)
    sampler_opts(sp)
    sp.add_argument("--m", type=int)
    sp.add_argument("--p", type=int)
    sp.add_argument("--eps")

    sp = sub.add_parser("counterexample")
    common(sp)
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--mode", choices=("series", "realize"))
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--replicas", type=int)

    sp = sub.add_parser("tailcheck")
    common(sp)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--c", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--x0", type=float)
    sp.add_argument("--table")

    sp = sub.add_parser("inequalities")
    common(sp)
    sp.add_argument("--chains", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--spaces", type=int)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    params = {k: v for k, v in vars(args).items() if k not in ("command", "out_dir", "out")}
    try:
        config = ExperimentConfig(args.command, params)
    except QuenchlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code, _ = run(config, args.out_dir, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
