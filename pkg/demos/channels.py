"""
Second-order channels and contact terms
=======================================

Each second-order channel is a product of three propagators.  Re-expanding
one of them about two centers turns the six-dimensional integral into a short
list of nested radial integrals.  The coincident-point region adds a separate
contact piece.
"""

from localfield import perturbation
from localfield.propagator import Channel

# The reduction for one channel: weights, radial orders and integration region.
for term in perturbation.reduce_channel_to_radial(Channel(1, 1)):
    print(f"  {term.weight:+.6f} * J({term.l_outer},{term.l_inner})  on {term.region}")

# Which factor gets re-expanded is a bookkeeping choice; the value is not.
for expand in ("middle", "first", "last"):
    v = perturbation.second_order_channel(Channel(1, 1), expand=expand).principal_value
    print(f"expand {expand:6s}: {v:.9f}")

# All nine channels with their contact terms.
print(f"{'channel':>8} {'principal':>12} {'contact':>12} {'total':>12}")
for ch, c in perturbation.all_channel_coefficients().items():
    print(f"{str(ch):>8} {c.principal_value:12.7f} {c.contact_value:12.7f} {c.total:12.7f}")

# Weighted sums over the symmetry classes.
print("sum without contacts:", round(perturbation.total_second_order(False), 7), "(71/72)")
print("sum with contacts:   ", round(perturbation.total_second_order(True), 7), "(17/24)")
