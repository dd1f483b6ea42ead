"""Simulation and verification toolkit for input-to-state stability estimates.

Solvers for the viscous Burgers equation with boundary and in-domain
disturbances (:mod:`burgers_iss.burgers`) and for a backstepping-stabilized
reaction-diffusion equation (:mod:`burgers_iss.backstepping`), evaluators
comparing simulated trajectories with closed-form ISS bounds
(:mod:`burgers_iss.iss`), functional-inequality checkers
(:mod:`burgers_iss.inequalities`) and a scenario harness with a CLI
(``python -m burgers_iss``).
"""
from .backstepping import (GainConstants, Kernel, KernelDivergenceError,
                           ReactionDiffusionParams, compatible_initial_condition,
                           control_input, forward_transform, gain_constants,
                           inverse_transform, kernel_closed_form_constant,
                           simulate_closed_loop, simulate_open_loop, simulate_target_split,
                           solve_inverse_kernel, solve_kernel)
from .burgers import (BurgersParams, check_compatibility, simulate, simulate_splitting_A,
                      simulate_splitting_B, step)
from .config import ConfigError, ScenarioConfig, parse_config
from .inequalities import (DeGiorgiHypothesis, InequalityMargin, check_embedding,
                           check_poincare_dirichlet, check_pointwise, degiorgi_l0)
from .iss import BoundReport, LevelSetProfile
from .numerics import INF, Grid1D, derivative, l2_norm, lp_norm, make_grid, solve_tridiagonal
from .runner import RunArtifacts, run_scenario, sweep
from .signals import ForcingSpec, InitialConditionSpec, SignalSpec
from .stepping import DivergenceError, StabilityError, Trajectory

__version__ = "0.1.0"
