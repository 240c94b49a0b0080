"""
First-order density correction
==============================

Sum the three sublevel paths source -> dielectric atom -> source, average over
directions, and integrate the resulting radial density with an exponential
convergence factor.  The damping is then removed by polynomial extrapolation.
"""

import numpy as np

from localfield import perturbation, radial

# The angular average leaves two radial pieces, an l = 0 and an l = 2 product
# of outgoing spherical Hankel functions, with these weights.
weights = perturbation.first_order_weights()
print("angular weights:", {k: round(v / np.pi, 6) for k, v in weights.items()}, "(units of pi)")

# Without damping the radial integrand oscillates and never settles.  With a
# factor exp(-eps * rho) each value is finite; watch it drift as eps shrinks.
plan = perturbation.RegularizationPlan()
for eps in plan.epsilons:
    s = sum(w * -radial.single_integral(la, lb, eps, rho_max=plan.rho_max).imag
            for (la, lb), w in weights.items())
    print(f"eps = {eps:5.3f}   damped coefficient = {s / (6 * np.pi):.9f}")

# Extrapolating the whole ladder to eps = 0 recovers the bulk coefficient.
c1 = perturbation.first_order_coefficient(plan)
print(f"extrapolated: {c1:.9f}   (7/6 = {7 / 6:.9f})")
