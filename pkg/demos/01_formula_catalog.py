"""
The finite-difference formula catalog
=====================================

Every rule the solver can run on is a named entry with exact rational
coefficients.  This script prints the catalog, then demonstrates what
"order" means by differentiating a cosine with each backward rule and
watching the error shrink as the sampling gap is refined.
"""

import numpy as np

from eigentrack.formulas import (BackwardFormula, catalog,
                                 check_zero_stability, derivative_estimate)

entries = catalog()

# --- the catalog ----------------------------------------------------------

print("backward derivative rules")
for name, rule in sorted(entries.items()):
    if isinstance(rule, BackwardFormula):
        coeffs = ",".join(str(c) for c in rule.coeffs)
        print(f"  {name}: ({coeffs}) / ({rule.denom} tau),"
              f" order {rule.order}")

print("\nlook-ahead recursions (these *predict* the next state)")
for name, rule in sorted(entries.items()):
    if not isinstance(rule, BackwardFormula):
        a = ", ".join(str(f) for f in rule.a)
        print(f"  {name}: z_next = {rule.c} tau zdot + weights ({a})")
        stab = check_zero_stability(rule)
        moduli = ", ".join(f"{m:.4f}" for m in stab.root_moduli)
        print(f"        root moduli {moduli}"
              f" -> {'stable' if stab.stable else 'UNSTABLE'}")

# --- what the order buys you ----------------------------------------------
# estimate d/dt cos(t) at t=1 from equally spaced samples, halving tau;
# an order-p rule should gain about 2**p per halving.

print("\nerror of d/dt cos(1.0), halving the sampling gap:")
print("tau        BDF4pt       BDF5pt")
truth = -np.sin(1.0)
for tau in (0.1, 0.05, 0.025, 0.0125):
    errs = []
    for name in ("BDF4pt", "BDF5pt"):
        rule = entries[name]
        hist = [np.cos(1.0 - i * tau) for i in range(rule.taps)]
        est = derivative_estimate(rule, hist, tau)
        errs.append(abs(est - truth))
    print("%-9g  %.3e    %.3e" % (tau, errs[0], errs[1]))

print("\nBDF4pt shrinks ~8x per halving (order 3),"
      " BDF5pt ~16x (order 4).")
