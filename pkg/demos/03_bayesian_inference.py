"""Bayesian estimation by Metropolis-Hastings with Gamma priors.

The sampler walks (ln alpha, ln beta) with adaptive step sizes during
burn-in, then freezes.  Posterior summaries, quantile credible intervals, a
credible ellipse, and a kernel-density grid for contour plotting all come
from the retained draws.
"""

import os

import numpy as np

from ltll import (
    LTLLParams,
    McmcConfig,
    PriorSpec,
    RngStream,
    credible_ellipse,
    draw_ltll,
    fit_mle,
    marginal_beta_log_kernel,
    posterior_density_grid,
    run_chain,
)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

truth = LTLLParams(2.0, 3.0, 1.0)
sample = draw_ltll(800, truth, RngStream(11, 0))

prior = PriorSpec.diffuse()  # Gamma(1, 0.01) on both parameters
cfg = McmcConfig(iterations=20000, burn_in=5000, thin=5, seed=123)
res = run_chain(sample, prior=prior, cfg=cfg)

print(f"acceptance rate {res.acceptance_rate:.3f}, "
      f"effective sample sizes ({res.ess_alpha:.0f}, {res.ess_beta:.0f})")
print(f"posterior mean  alpha={res.mean[0]:.4f} beta={res.mean[1]:.4f}")
print(f"posterior median alpha={res.median[0]:.4f} beta={res.median[1]:.4f}")
print(f"95% credible intervals: alpha {res.ci_alpha}, beta {res.ci_beta}")

mle = fit_mle(sample)
print(f"(MLE for reference: alpha={mle.alpha:.4f}, beta={mle.beta:.4f})")

# Joint credible ellipse from the posterior covariance.
ell = credible_ellipse(res, gamma=0.05)
inv = res.cov.inverse()
inside = np.mean([inv.quad_form(a - res.mean[0], b - res.mean[1]) <= ell.threshold
                  for a, b in res.draws])
print(f"\ncredible ellipse area {ell.area:.4f}; fraction of draws inside: {inside:.3f}")
np.savetxt(os.path.join(OUT, "credible_ellipse.csv"), ell.points,
           delimiter=",", header="alpha,beta", comments="")

# Density grid for contour plots (rows = alpha axis, columns = beta axis).
agrid, bgrid, dens = posterior_density_grid(res, shape=(64, 64))
grid_rows = [f"{a:.6g},{b:.6g},{dens[i, j]:.6g}"
             for i, a in enumerate(agrid) for j, b in enumerate(bgrid)]
with open(os.path.join(OUT, "posterior_density_grid.csv"), "w") as fh:
    fh.write("alpha,beta,density\n" + "\n".join(grid_rows) + "\n")
print(f"density grid written ({agrid.size}x{bgrid.size} cells)")

# The marginal shape kernel is a 1-d diagnostic surface evaluated on the
# truncation-normalized data; it is unimodal, but it is not the exact
# marginal of the joint posterior, so its peak need not match the chain.
w = sample.normalized()
grid = np.linspace(0.5, 8.0, 400)
kernel = np.array([marginal_beta_log_kernel(w.values, b, prior) for b in grid])
print(f"marginal-beta diagnostic kernel peaks at beta ~ {grid[np.argmax(kernel)]:.3f}")
