"""The intermittent map with gamma = 1/4 through its Ulam discretization.

Builds the graded Ulam chain, prints the density exponent near the
neutral fixed point, the long-run variance of a centered indicator and
the first alpha-dependence coefficients.
"""
import numpy as np

from quenchlab.intermittent import (
    GammaMap, ObservableSpec, alpha_coeffs_ulam, duality_residuals, eta_ulam, loglog_slope,
    resolved_horizon, traj, ulam_build,
)

gamma = 0.25
model = ulam_build(gamma, 8192, 2.0)
e = model.edges
centers = 0.5 * (e[1:] + e[:-1])
sel = (centers > 1e-4) & (centers < 1e-2)
print(f"density log-log slope near 0: {loglog_slope(centers[sel], model.density[sel]):.3f} (exponent -gamma)")
print(f"duality residuals on the test dictionary: {np.array2string(duality_residuals(model), precision=2)}")
print(f"resolved horizon of the grid: {resolved_horizon(model):.0f} steps")

nu_half = model.nu_interval(0.0, 0.5)
_, sums = traj(GammaMap(gamma), 0.7, 10 ** 6, lambda x: (x <= 0.5).astype(float))
print(f"nu([0, 1/2]) = {nu_half:.4f}; Birkhoff average of one orbit = {sums[-1] / 1e6:.4f}")

eta, rep = eta_ulam(model, ObservableSpec.indicator(0.5))
print(f"eta for 1[0,1/2] - nu([0,1/2]): {eta:.5f} ({rep.verdict})")

alphas = alpha_coeffs_ulam(model, 32)
ks = np.arange(4, 33)
print(f"alpha(1..8) = {np.array2string(alphas[1:9], precision=3)}")
print(f"log-log slope on [4, 32] = {loglog_slope(ks, alphas[ks]):.2f}; "
      f"asymptotic exponent (gamma - 1)/gamma = {(gamma - 1) / gamma:.1f}")
