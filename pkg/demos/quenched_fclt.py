"""Quenched invariance principle for the intermittent chain from one start.

Simulates Donsker paths from x0 = 0.3, compares the endpoint with
N(0, eta), checks that the increments over [0, 1/2] and [1/2, 1] are
uncorrelated, and shows the modulus of continuity shrinking with m.
A smaller replica count than the acceptance run keeps this under a minute.
"""
from quenchlab.intermittent import ObservableSpec, eta_ulam, ulam_build
from quenchlab.quenched_mc import (
    UlamChainSampler, fidis_report, quenched_clt_report, run_replicas, tightness_report,
)

model = ulam_build(0.25, 8192, 2.0)
obs = ObservableSpec.indicator(0.5)
eta, _ = eta_ulam(model, obs)
n = 2 ** 14
ens = run_replicas(UlamChainSampler(model, obs), 0.3, n, 2000, seed=11, m_grid=(4, 16, 64),
                   skeleton=[0, n // 2, n // 2 + 1, n])
rep = quenched_clt_report(ens, eta)
print(f"eta = {eta:.5f}; KS = {rep.ks:.4f} (band {rep.ks_null_band:.4f}); variance ratio {rep.variance_ratio:.3f}")
fd = fidis_report(ens, [0.5, 1.0], [1.0, -1.0], eta)
print(f"W(1/2) and W(1) - W(1/2): correlation {fd['max_offdiag_corr']:.4f}; "
      f"KS of the signed combination {fd['ks']:.4f}")
tab = tightness_report(ens)
for m, q in zip(tab["m"], tab["q95"]):
    print(f"  95% quantile of the path modulus at m = {m:>2}: {q:.3f}")
