"""
Randomized functional-inequality checks
=======================================

The embedding, pointwise and Dirichlet Poincare inequalities used by the
energy estimates are checked on random smooth fields, and the De Giorgi
level is evaluated for a few hypotheses.
"""

####################################################################
# Inequality suite
# ----------------
# Each row carries the margin between the two sides; a negative margin would
# mean a violated inequality.
from collections import defaultdict

from burgers_iss.inequalities import DeGiorgiHypothesis, degiorgi_l0
from burgers_iss.runner import inequality_suite

worst = defaultdict(lambda: float("inf"))
for check, seed, detail, margin, satisfied in inequality_suite(n_seeds=50):
    worst[check] = min(worst[check], margin)
for check, margin in sorted(worst.items()):
    print(f"{check:10s} worst margin {margin:.4f}")

####################################################################
# De Giorgi level
# ---------------
# The level grows with the constant M and with the measure at the base level.
for M in (0.5, 1.0, 2.0, 4.0):
    hyp = DeGiorgiHypothesis(M=M, alpha=1.0, beta=2.0, k0=0.0, phi_k0=0.5)
    print(f"M = {M:3.1f}   l0 = {degiorgi_l0(hyp):.6f}")
