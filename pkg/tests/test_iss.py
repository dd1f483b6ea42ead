import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burgers_iss import iss
from burgers_iss.backstepping import GainConstants, ReactionDiffusionParams
from burgers_iss.burgers import BurgersParams
from burgers_iss.numerics import INF, l2_norm, lp_norm, make_grid
from burgers_iss.signals import ForcingSpec, SignalSpec
from burgers_iss.stepping import Trajectory

P = BurgersParams(1.0, 1.0)
RD = ReactionDiffusionParams(1.0, 1.0, -10.0)
G = make_grid(51)


def make_traj(fields, times=None, d=None, fsup=None, fl2=None, grid=G):
    fields = np.atleast_2d(np.asarray(fields, dtype=float))
    m = fields.shape[0]
    times = np.linspace(0, 1, m) if times is None else times
    zero = np.zeros(m)
    usup = np.maximum.accumulate(np.max(np.abs(fields), axis=1))
    return Trajectory(grid, times, fields, zero if d is None else d,
                      zero if fsup is None else fsup, zero if fl2 is None else fl2, usup)


def random_traj(seed, m=20):
    rng = np.random.default_rng(seed)
    x = G.x
    fields = np.array([sum(rng.uniform(-1, 1) * np.sin(j * np.pi * x + rng.uniform(0, 3))
                           for j in range(1, 5)) for _ in range(m)])
    fields[0] = 0.0
    d = np.r_[0.0, rng.uniform(-1, 1, m - 1)]
    fsup = np.maximum.accumulate(np.r_[0.0, rng.uniform(0, 1, m - 1)])
    fl2 = np.cumsum(np.r_[0.0, rng.uniform(0, 1, m - 1)])
    return make_traj(fields, d=d, fsup=fsup, fl2=fl2)


class TestAdmissibility:
    def test_zero(self):
        a = iss.admissibility_theorem1(SignalSpec(), ForcingSpec(), P)
        assert a.value == 0.0 and a.passed

    def test_canonical(self):
        a = iss.admissibility_theorem1(SignalSpec("ramped_cosine", 0.1),
                                       ForcingSpec("separable", 0.05), P)
        assert a.value == pytest.approx(0.2 + 4 * math.sqrt(2) * 0.05, rel=1e-14)
        assert a.value == pytest.approx(0.4828, abs=5e-5)
        assert a.threshold == 1.0 and a.passed

    def test_large_disturbance_fails(self):
        a = iss.admissibility_theorem1(SignalSpec("smooth_step", 1.0), ForcingSpec(), P)
        assert a.sup_d == 1.0 and not a.passed
        assert not iss.admissibility_theorem2(SignalSpec("smooth_step", 1.0), P).passed

    def test_finite_horizon(self):
        a = iss.admissibility_theorem1(SignalSpec("ramped_cosine", 0.1), ForcingSpec(), P,
                                       horizon=2.0)
        assert a.value == pytest.approx(0.1 * (1 - math.cos(2.0)))


class TestBoundReport:
    def test_margin_and_satisfaction(self):
        r = iss.BoundReport("x", [0, 1], [1.0, 2.0], [1.5, 1.99995], tol=1e-4)
        np.testing.assert_allclose(r.margin, [0.5, -5e-5])
        assert r.min_margin == pytest.approx(-5e-5) and r.satisfied
        assert not iss.BoundReport("x", [0, 1], [1.0, 2.0], [1.5, 1.9], tol=1e-4).satisfied

    def test_rhs_must_be_finite(self):
        with pytest.raises(ValueError):
            iss.BoundReport("x", [0.0], [0.0], [math.inf], tol=0.0)

    def test_csv(self):
        r = iss.BoundReport("x", [0.0, 0.1], [1.0, 1 / 3], [2.0, 1.0], tol=0.0)
        lines = r.to_csv().split("\n")
        assert lines[0] == "t,lhs,rhs,margin"
        assert lines[2] == "0.10000000000000001,0.33333333333333331,1,0.66666666666666674"
        assert r.to_csv().endswith("\n") and "\r" not in r.to_csv()

    def test_relative_margin(self):
        r = iss.BoundReport("x", [0, 1, 2], [0.0, 1.0, 0.0], [0.0, 2.0, 1.0], 0.0, relative=True)
        np.testing.assert_allclose(r.margin, [0.0, 0.5, 1.0])


class TestTheorems:
    def test_theorem1_zero(self):
        r = iss.evaluate_theorem1(make_traj(np.zeros((5, 51))), 0.0, P)
        assert np.all(r.margin == 0.0)

    def test_theorem1_initial_margin(self):
        u0 = np.sin(np.pi * G.x)
        r = iss.evaluate_theorem1(make_traj(u0), l2_norm(u0, G), P)
        assert r.margin[0] == pytest.approx(l2_norm(u0, G) ** 2, rel=1e-12)

    def test_theorem2_eps_range(self):
        traj = make_traj(np.zeros((3, 51)))
        for eps in (0.0, 1.0, 1.5, -0.1):
            with pytest.raises(ValueError):
                iss.evaluate_theorem2(traj, 0.0, P, eps)

    def test_theorem2_without_forcing(self):
        traj = random_traj(1)
        traj = make_traj(traj.fields, d=traj.boundary_history)
        r = iss.evaluate_theorem2(traj, 0.3, P, eps=0.25)
        maxd = np.maximum.accumulate(np.abs(traj.boundary_history))
        np.testing.assert_allclose(r.rhs, 2 * 0.09 * np.exp(-0.75 * traj.times) + 2 * maxd ** 2)

    def test_theorem2_default_eps(self):
        traj = random_traj(2)
        np.testing.assert_array_equal(iss.evaluate_theorem2(traj, 0.3, P).rhs,
                                      iss.evaluate_theorem2(traj, 0.3, P, 0.5).rhs)

    def test_canonical_runs(self, canonical_run):
        reports = {r.name: r for r in canonical_run.reports}
        assert reports["theorem1"].satisfied and reports["theorem1"].min_margin > 0
        assert reports["theorem2"].satisfied and reports["theorem2"].min_margin > 0
        u = canonical_run.trajectories["u"]
        u0_l2 = l2_norm(u.initial, u.grid)
        assert reports["theorem1"].margin[0] == pytest.approx(u0_l2 ** 2, rel=1e-12)


class TestLemmas:
    def test_zero_data(self):
        traj = make_traj(np.zeros((4, 51)))
        for r in (iss.evaluate_lemma4(traj, P), iss.evaluate_lemma5(traj, 0.0, P),
                  iss.evaluate_lemma6(traj, P), iss.evaluate_lemma7(traj, 0.0, P)):
            assert np.all(r.margin == 0.0)

    def test_lemma5_initial_equality(self):
        u0 = G.x ** 3 * (1 - G.x) ** 3
        r = iss.evaluate_lemma5(make_traj(u0), l2_norm(u0, G), P)
        assert r.margin[0] >= -1e-10

    def test_lemma4_reduces_to_lemma6_without_forcing(self, split_b_run):
        w = split_b_run.trajectories["w"]
        r4, r6 = iss.evaluate_lemma4(w, P), iss.evaluate_lemma6(w, P)
        np.testing.assert_array_equal(r4.rhs, r6.rhs)
        assert r4.satisfied

    def test_pipeline_runs(self, split_a_run, split_b_run):
        for art in (split_a_run, split_b_run):
            for r in art.reports:
                assert r.satisfied, r.summary()

    def test_lemma4_positive_after_start(self, split_a_run):
        r = next(r for r in split_a_run.reports if r.name == "lemma4")
        assert r.margin[0] == 0.0
        assert np.all(r.margin[1:] > 0)


class TestReactionDiffusionBounds:
    def test_prop2_zero(self):
        traj = make_traj(np.zeros((3, 51)))
        r = iss.evaluate_prop2(traj, 0.0, GainConstants(5.0, 2.0, 1.5, 1.0), RD)
        assert np.all(r.margin == 0.0)

    def test_prop2_initial(self):
        u0 = np.sin(np.pi * G.x)
        r = iss.evaluate_prop2(make_traj(u0), 1.0, GainConstants(5.0, 2.0, 1.5, 1.0), RD)
        assert r.rhs[0] == 5.0 and r.lhs[0] == pytest.approx(1.0)

    def test_prop2_pipeline(self, closed_loop_run):
        r = closed_loop_run.reports[0]
        assert r.name == "prop2" and r.min_margin > 0

    def test_lyapunov_p1_rate(self):
        t = np.linspace(0, 1, 11)
        fields = np.outer(np.exp(-3 * t), np.sin(np.pi * G.x))
        r = iss.lyapunov_lp_decay(make_traj(fields, times=t), RD, 1)
        np.testing.assert_allclose(r.rhs, r.lhs[0] * np.exp(-2 * (1.0 + 2.0) * t))

    def test_lyapunov_zero(self):
        r = iss.lyapunov_lp_decay(make_traj(np.zeros((3, 51))), RD, 2)
        assert np.all(r.lhs == 0) and r.satisfied

    def test_lyapunov_rejects_bad_order(self):
        with pytest.raises(ValueError):
            iss.lyapunov_lp_decay(make_traj(np.zeros((2, 51))), RD, 1.5)

    def test_lp_below_sup_on_h(self, target_split_run):
        h = target_split_run.trajectories["h"]
        for j in range(0, len(h), 4000):
            for p in (1, 2, 4, 8):
                assert lp_norm(h.fields[j], h.grid, 2 * p) <= lp_norm(h.fields[j], h.grid,
                                                                      INF) * (1 + 1e-12)


class TestMonotonicity:
    @pytest.mark.parametrize("seed", range(5))
    def test_rhs_grows_with_disturbance(self, seed):
        traj = random_traj(seed)
        big = make_traj(traj.fields, d=2 * traj.boundary_history,
                        fsup=2 * traj.forcing_sup_history, fl2=4 * traj.forcing_l2_history)
        pairs = [
            (iss.evaluate_theorem1(traj, 0.5, P), iss.evaluate_theorem1(big, 0.5, P)),
            (iss.evaluate_theorem2(traj, 0.5, P), iss.evaluate_theorem2(big, 0.5, P)),
            (iss.evaluate_lemma4(traj, P), iss.evaluate_lemma4(big, P)),
            (iss.evaluate_lemma6(traj, P), iss.evaluate_lemma6(big, P)),
            (iss.evaluate_lemma7(traj, 0.5, P), iss.evaluate_lemma7(big, 0.5, P)),
            (iss.evaluate_prop2(traj, 1.0, GainConstants(4, 2, 1, 1), RD),
             iss.evaluate_prop2(big, 1.0, GainConstants(4, 2, 1, 1), RD)),
        ]
        for small, large in pairs:
            assert np.all(large.rhs >= small.rhs)


class TestLevelSets:
    def test_zero_field(self):
        prof = iss.level_set_profile(make_traj(np.zeros((3, 51))), [0.1])
        assert prof.phi[0] == 0.0

    def test_sine_count(self):
        prof = iss.level_set_profile(make_traj(np.sin(np.pi * G.x)), [0.0])
        # every interior node is positive: (n - 2) h = 1 - h
        assert prof.phi[0] == pytest.approx(1 - G.h, rel=1e-14)

    def test_levels_must_increase(self):
        with pytest.raises(ValueError):
            iss.level_set_profile(make_traj(np.zeros(51)), [0.2, 0.1])

    @settings(max_examples=50)
    @given(st.integers(0, 10_000), st.lists(st.floats(-2, 2), min_size=2, max_size=12,
                                           unique=True))
    def test_phi_nonincreasing_and_bounded(self, seed, levels):
        prof = iss.level_set_profile(random_traj(seed, 6), sorted(levels))
        assert np.all(np.diff(prof.phi) <= 0)
        assert np.all((prof.phi >= 0) & (prof.phi <= 1))

    def test_vanishing_level(self):
        prof = iss.level_set_profile(make_traj(np.sin(np.pi * G.x)), [0.5, 0.99, 1.0, 1.5])
        assert prof.vanishing_level() == 1.0

    def test_lemma4_level_pipeline(self, split_a_run):
        w = split_a_run.trajectories["w"]
        k_star = iss.lemma4_level(w, P)
        assert k_star == pytest.approx(0.1 * (1 - math.cos(2)) + 4 * math.sqrt(2) * 0.05,
                                       rel=1e-6)
        assert iss.level_set_profile(w, [k_star]).phi[0] <= w.grid.h


class TestChebyshevLink:
    def test_zero_field(self):
        m = iss.check_chebyshev_link(make_traj(np.zeros((2, 51))), 0.0, 0.5)
        assert m.lhs == 0.0 and m.rhs == 0.0

    def test_constant_field(self):
        c, k, h = 2.0, 0.5, 1.0
        m = iss.check_chebyshev_link(make_traj(np.full(51, c)), k, h)
        assert m.rhs == pytest.approx((c - k) ** 2)
        assert m.lhs == pytest.approx((h - k) ** 2 * (1 - G.h))
        assert m.satisfied

    def test_invalid_levels(self):
        with pytest.raises(ValueError):
            iss.check_chebyshev_link(make_traj(np.zeros(51)), 1.0, 1.0)

    @pytest.mark.parametrize("seed", range(100))
    def test_random(self, seed):
        rng = np.random.default_rng(seed)
        k = rng.uniform(-1.5, 1.5)
        h = k + rng.uniform(1e-3, 2)
        assert iss.check_chebyshev_link(random_traj(seed), k, h).margin >= -1e-10
