import math

import numpy as np
import pytest

from burgers_iss import iss
from burgers_iss.burgers import (BurgersParams, check_compatibility, simulate,
                                 simulate_splitting_A, simulate_splitting_B, step)
from burgers_iss.numerics import l2_norm, make_grid
from burgers_iss.signals import ForcingSpec, InitialConditionSpec, SignalSpec
from burgers_iss.stepping import DivergenceError, StabilityError

P = BurgersParams(1.0, 1.0)
ZERO_D, ZERO_F = SignalSpec(), ForcingSpec()
BUMP = InitialConditionSpec("bump", 1.0)
D = SignalSpec("ramped_cosine", 0.1)
F = ForcingSpec("separable", 0.05)
G = make_grid(101)


def test_params_positive():
    for mu, nu in ((0, 1), (1, 0), (-1, 1)):
        with pytest.raises(ValueError):
            BurgersParams(mu, nu)


class TestCompatibility:
    def test_families_pass_with_zero_residual(self):
        report = check_compatibility(BUMP, D, ZERO_F)
        assert len(report) == 8
        assert all(c.passed and c.residual == 0.0 for c in report)

    def test_all_zero(self):
        assert all(c.passed for c in check_compatibility(InitialConditionSpec(), ZERO_D, ZERO_F))

    def test_sine_curvature_passes(self):
        report = {c.name: c for c in check_compatibility(InitialConditionSpec("sine", 1.0),
                                                         ZERO_D, ZERO_F)}
        assert report["u0''(0)"].passed

    def test_quartic_bump_fails_curvature(self):
        A = 0.3
        report = {c.name: c for c in check_compatibility(InitialConditionSpec("quartic_bump", A),
                                                         ZERO_D, ZERO_F)}
        assert not report["u0''(0)"].passed
        assert report["u0''(0)"].residual == pytest.approx(2 * A)
        assert report["u0(0)"].passed


class TestStep:
    def test_zero_equilibrium(self):
        z = np.zeros(G.n_nodes)
        np.testing.assert_array_equal(step(z, P, z, z, 0.0, 1e-4, G), z)

    def test_boundary_values_imposed(self):
        u = BUMP.sample(G)
        new = step(u, P, np.zeros(G.n_nodes), np.zeros(G.n_nodes), 0.25, 1e-4, G)
        assert new[0] == 0.0 and new[-1] == 0.25

    def test_constant_forcing_stays_finite(self):
        f = np.full(G.n_nodes, 3.0)
        new = step(np.zeros(G.n_nodes), P, f, f, 0.0, 1e-4, G)
        assert np.all(np.isfinite(new))

    def test_heat_mode_decay(self):
        g = make_grid(201)
        u = np.sin(np.pi * g.x)
        z = np.zeros(g.n_nodes)
        dt = 1e-4
        for n in range(1000):
            u = step(u, P, z, z, 0.0, dt, g, convection=False, t_next=(n + 1) * dt)
        amp = u[100]
        assert abs(amp / math.exp(-math.pi ** 2 * 0.1) - 1) < 0.01

    def test_cfl_violation(self):
        with pytest.raises(StabilityError):
            step(np.full(G.n_nodes, 10.0), P, np.zeros(G.n_nodes), np.zeros(G.n_nodes),
                 0.0, 1e-2, G)

    def test_blow_up_guard(self):
        u = np.full(G.n_nodes, 1e9)
        with pytest.raises(DivergenceError) as exc:
            step(u, P, np.zeros(G.n_nodes), np.zeros(G.n_nodes), 0.0, 1e-4, G,
                 convection=False, t_next=0.5)
        assert exc.value.time == 0.5


class TestSimulate:
    def test_zero_data_zero_solution(self):
        traj = simulate(P, InitialConditionSpec(), ZERO_D, ZERO_F, 0.1, 1e-3, G)
        assert np.all(traj.fields == 0.0)
        assert len(traj) == 101

    def test_heat_limit_matches_eigenmode(self):
        g = make_grid(201)
        traj = simulate(P, np.sin(np.pi * g.x), ZERO_D, ZERO_F, 0.1, 1e-4, g, convection=False)
        ratio = traj.final[100] / math.exp(-math.pi ** 2 * 0.1)
        assert abs(ratio - 1) < 0.01

    def test_unforced_energy_decay(self):
        traj = simulate(P, BUMP, ZERO_D, ZERO_F, 1.0, 1e-4, G)
        u0_l2 = l2_norm(BUMP.sample(G), G)
        report = iss.evaluate_lemma5(traj, u0_l2, P)
        assert report.satisfied

    def test_boundary_exact_and_histories_monotone(self):
        traj = simulate(P, BUMP, D, F, 0.5, 1e-4, G, stride=7)
        assert np.all(traj.fields[:, 0] == 0.0)
        np.testing.assert_array_equal(traj.fields[:, -1], D(traj.times))
        np.testing.assert_array_equal(traj.boundary_history, D(traj.times))
        assert traj.times[-1] == pytest.approx(0.5)
        assert np.all(np.diff(traj.times) > 0)
        for hist in (traj.forcing_sup_history, traj.forcing_l2_history, traj.state_sup_history):
            assert np.all(np.diff(hist) >= 0)

    def test_forcing_l2_history(self):
        # int_0^T ||0.05 sin(pi x) sin^2 t||^2 dt = 0.0025 / 2 * int sin^4
        traj = simulate(P, BUMP, ZERO_D, F, 1.0, 1e-3, make_grid(401))
        exact = 0.0025 / 2 * (3 / 8 - math.sin(2) / 4 + math.sin(4) / 32)
        assert traj.forcing_l2_history[-1] == pytest.approx(exact, rel=1e-5)

    def test_stride_keeps_histories_per_step(self):
        full = simulate(P, BUMP, D, F, 0.2, 1e-4, G)
        thin = simulate(P, BUMP, D, F, 0.2, 1e-4, G, stride=50)
        np.testing.assert_array_equal(thin.fields, full.fields[::50])
        np.testing.assert_array_equal(thin.forcing_l2_history, full.forcing_l2_history[::50])

    def test_cfl_enforced(self):
        big = SignalSpec("ramped_cosine", 5.0)
        with pytest.raises(StabilityError):
            simulate(P, BUMP, big, ZERO_F, 3.0, 5e-3, make_grid(21))


class TestSplitting:
    def test_a_without_disturbance(self):
        w, v = simulate_splitting_A(P, BUMP, ZERO_D, ZERO_F, 0.3, 1e-4, G)
        u = simulate(P, BUMP, ZERO_D, ZERO_F, 0.3, 1e-4, G)
        assert np.all(w.fields == 0.0)
        np.testing.assert_allclose(v.fields, u.fields, atol=1e-15)

    def test_a_without_initial_data(self):
        w, v = simulate_splitting_A(P, InitialConditionSpec(), D, F, 0.3, 1e-4, G)
        u = simulate(P, InitialConditionSpec(), D, F, 0.3, 1e-4, G)
        assert np.all(v.fields == 0.0)
        np.testing.assert_allclose(w.fields, u.fields, atol=1e-15)

    def test_b_without_boundary_disturbance(self):
        w, v = simulate_splitting_B(P, BUMP, ZERO_D, F, 0.3, 1e-4, G)
        u = simulate(P, BUMP, ZERO_D, F, 0.3, 1e-4, G)
        assert np.all(w.fields == 0.0)
        np.testing.assert_allclose(v.fields, u.fields, atol=1e-15)

    def test_b_equals_a_without_forcing(self):
        wa, va = simulate_splitting_A(P, BUMP, D, ZERO_F, 0.3, 1e-4, G)
        wb, vb = simulate_splitting_B(P, BUMP, D, ZERO_F, 0.3, 1e-4, G)
        np.testing.assert_allclose(wa.fields, wb.fields, atol=1e-15)
        np.testing.assert_allclose(va.fields, vb.fields, atol=1e-15)

    @pytest.mark.parametrize("split", [simulate_splitting_A, simulate_splitting_B])
    def test_sum_matches_full_solution(self, split):
        w, v = split(P, BUMP, D, F, 0.5, 1e-4, G)
        u = simulate(P, BUMP, D, F, 0.5, 1e-4, G)
        assert np.max(np.abs(u.fields - (w + v).fields)) < 5e-3

    def test_maximum_principle_surrogate(self, split_b_run):
        w = split_b_run.trajectories["w"]
        assert np.max(np.abs(w.fields)) <= np.max(np.abs(w.boundary_history)) + 1e-6

    def test_full_resolution_boundaries(self, canonical_run):
        u = canonical_run.trajectories["u"]
        assert np.all(u.fields[:, 0] == 0.0)
        np.testing.assert_array_equal(u.fields[:, -1], u.boundary_history)
