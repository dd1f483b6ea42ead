"""
Disturbed Burgers equation and its L2 estimate
==============================================

A viscous Burgers equation on [0, 1] is driven by a boundary disturbance at
x = 1 and a distributed forcing. This script simulates it and compares the
squared L2 norm of the state against the exponential ISS envelope.
"""

####################################################################
# Set up the scenario
# -------------------
# The disturbances are small enough for the admissibility condition to hold.
import numpy as np

from burgers_iss import iss
from burgers_iss.burgers import BurgersParams, simulate
from burgers_iss.numerics import l2_norm, make_grid
from burgers_iss.signals import ForcingSpec, InitialConditionSpec, SignalSpec

params = BurgersParams(mu=1.0, nu=1.0)
grid = make_grid(201)
u0 = InitialConditionSpec("bump", 1.0)
d = SignalSpec("ramped_cosine", 0.1)
f = ForcingSpec("separable", 0.05)

adm = iss.admissibility_theorem1(d, f, params)
print(f"admissibility value {adm.value:.5f} (threshold {adm.threshold:g})")

####################################################################
# Simulate
# --------
# The output stride keeps one state in every 100 steps; the disturbance
# histories are still accumulated at every step.
traj = simulate(params, u0, d, f, t_end=2.0, dt=1e-4, grid=grid, stride=100)
print(f"{len(traj)} stored states, final sup-norm {np.max(np.abs(traj.final)):.4e}")

####################################################################
# Compare with the L2 envelope
# ----------------------------
report = iss.evaluate_theorem1(traj, l2_norm(u0.sample(grid), grid), params)
print(report.summary())
for j in range(0, len(traj), 20):
    print(f"t = {traj.times[j]:4.2f}   |u|^2 = {report.lhs[j]:.4e}   bound = {report.rhs[j]:.4e}")
