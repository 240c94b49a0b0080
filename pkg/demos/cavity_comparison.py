"""
Microscopic series against cavity models
========================================

Compare the microscopic expansion of the decay rate through second order with
the virtual and real cavity formulas built on the Lorentz-Lorenz permittivity.
"""

import numpy as np

from localfield import cavity, perturbation

# Taylor coefficients of each cavity model, read off a Cauchy integral.
for model in cavity.CavityModel:
    c = cavity.series_coefficients(model, 3)
    print(f"{model.value:8s}", "  ".join(f"{x:.6f}" for x in c))

c1 = perturbation.first_order_coefficient()
c2 = perturbation.total_second_order(True)
print(f"microscopic  1.000000  {c1:.6f}  {c2:.6f}")

# The rates themselves on a density grid.  Up to N alpha ~ 0.1 the three
# curves are hard to tell apart; the second-order term separates them later.
print(f"{'N alpha':>8} {'virtual':>10} {'real':>10} {'micro':>10}")
for x in np.arange(0.0, 0.31, 0.05):
    micro = 1 + c1 * x + c2 * x * x
    print(f"{x:8.2f} {cavity.decay_rate('virtual', x):10.6f} "
          f"{cavity.decay_rate('real', x):10.6f} {micro:10.6f}")
