"""
Random dielectric samples
=========================

Place dielectric atoms at random in a ball around the source, solve the
coupled linear system exactly for each configuration, and average the decay
rate shift.  At low density the mean should approach the first-order value.
"""

import time

from localfield import ensemble

b, n_alpha = 0.5, 0.01

# A finite ball adds a deficit from the excluded core and an oscillating edge
# term.  Pick the radius near 9 where both cancel against the bulk value.
r0 = ensemble.matched_sample_radius(b, near=9.0)
print(f"matched sample radius: {r0:.4f}")
print(f"finite-ball first order there: {ensemble.finite_sample_first_order(b, r0):.6f}")

cfg = ensemble.EnsembleConfig(n_atoms=200, sample_radius=r0, exclusion_radius=b,
                              n_samples=100, seed=0)
params = ensemble.PhysicalParams.from_n_alpha(n_alpha, cfg.density)
print(f"density {cfg.density:.4f}, detuning {params.delta:.1f}, alpha {params.alpha:.4f}")

t = time.perf_counter()
stats = ensemble.monte_carlo_average(cfg, params)
print(f"{stats.n_samples} samples in {time.perf_counter() - t:.1f} s")
print(f"Re(mean)/N alpha = {stats.mean_shift.real / n_alpha:.3f} "
      f"+- {stats.std_error[0] / n_alpha:.3f}   (7/6 = {7 / 6:.3f})")

# The same seed gives the same numbers regardless of the thread count.
again = ensemble.monte_carlo_average(cfg, params, workers=1)
print("reproducible:", again.mean_shift == stats.mean_shift)
