"""A sequence satisfying the covariance-type condition while three classical
projective criteria fail.

Prints the exact series terms, then estimates E|E_0(S_n)| at n = N_K on the
realized shift-times-rotation system for growing K.
"""
from quenchlab.counterexample import (
    empirical_conditional_norms, realize, series_cond21, series_gordin_lowerbound,
    series_hh_lowerbound, series_mw_lowerbound,
)

c21 = series_cond21(100)
print(f"covariance terms: {c21.info['exact_terms'][:4]} ...  S_100 = {c21.partial_sums[-1]:.6f} ({c21.verdict})")
g = series_gordin_lowerbound(100)
print(f"Gordin lower-bound terms: {g.info['exact_terms'][:4]} ...  ({g.verdict})")
hh = series_hh_lowerbound(100)
print(f"Hannan-Heyde terms: {hh.info['exact_terms'][:4]} ... prefactor {hh.info['prefactor']:.4f} ({hh.verdict})")
d = series_mw_lowerbound(4096).info["doubling"]
print("Maxwell-Woodroofe dyadic increments: " + ", ".join(f"{n}: {v:.4f}" for n, v in d.items() if n >= 256))

for K in (2, 3, 4, 5):
    sys_ = realize(K, seed=0)
    est = empirical_conditional_norms(sys_, [4 ** K], 20_000, seed=100 + K)
    print(f"K = {K}: E|E_0(S_(4^K))| = {est['mean'][0]:.4f} +/- {est['stderr'][0]:.4f}, "
          f"largest drift defect / eps_K = {sys_.max_drift_defect(K) / sys_.eps[-1]:.3f}")
