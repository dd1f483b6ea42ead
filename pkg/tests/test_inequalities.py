import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from burgers_iss.inequalities import (BoundaryError, DeGiorgiHypothesis, HypothesisError,
                                      InequalityMargin, IntervalError, PointError,
                                      check_embedding, check_poincare_dirichlet, check_pointwise,
                                      degiorgi_l0, random_sine_series, random_trig_polynomial)
from burgers_iss.numerics import INF, derivative, l2_norm, lp_norm, make_grid

G = make_grid(2001)
valid_hyp = st.builds(DeGiorgiHypothesis,
                      M=st.floats(1e-3, 1e3), alpha=st.floats(1e-2, 10),
                      beta=st.floats(1.01, 10), k0=st.floats(-10, 10),
                      phi_k0=st.floats(0, 1))


class TestDeGiorgi:
    def test_unit_case(self):
        assert degiorgi_l0(DeGiorgiHypothesis(M=1, alpha=2, beta=2, k0=0, phi_k0=1)) == 4.0

    def test_zero_measure(self):
        assert degiorgi_l0(DeGiorgiHypothesis(M=3.7, alpha=0.4, beta=1.5, k0=1, phi_k0=0)) == 0.0

    def test_second_hand_value(self):
        # 2^(3/2) * 2 * 4^2 = 64 sqrt(2)
        l0 = degiorgi_l0(DeGiorgiHypothesis(M=2, alpha=1, beta=3, k0=0, phi_k0=4))
        assert l0 == pytest.approx(64 * math.sqrt(2), rel=1e-12)

    @pytest.mark.parametrize("kw", [dict(M=0), dict(M=-1), dict(alpha=0), dict(beta=1),
                                    dict(beta=0.5), dict(phi_k0=-0.1)])
    def test_rejects_bad_hypothesis(self, kw):
        args = dict(M=1, alpha=1, beta=2, k0=0, phi_k0=1) | kw
        with pytest.raises(HypothesisError):
            DeGiorgiHypothesis(**args)

    @given(valid_hyp, st.floats(1.0, 10.0), st.floats(1.0, 10.0))
    def test_monotone_in_M_and_phi(self, hyp, sM, sphi):
        base = degiorgi_l0(hyp)
        bigger_M = DeGiorgiHypothesis(hyp.M * sM, hyp.alpha, hyp.beta, hyp.k0, hyp.phi_k0)
        bigger_phi = DeGiorgiHypothesis(hyp.M, hyp.alpha, hyp.beta, hyp.k0, hyp.phi_k0 * sphi)
        assert degiorgi_l0(bigger_M) >= base
        assert degiorgi_l0(bigger_phi) >= base


class TestMargin:
    def test_satisfied_iff_margin_above_tol(self):
        assert InequalityMargin(1.0, 1.0 - 5e-7).satisfied
        assert not InequalityMargin(1.0, 1.0 - 2e-6).satisfied
        assert InequalityMargin(2.0, 5.0).margin == 3.0


class TestEmbedding:
    def test_constant(self):
        m = check_embedding(np.ones(G.n_nodes), G, 0, 1, 2)
        assert m.lhs == pytest.approx(1.0, abs=1e-12)
        assert m.rhs == pytest.approx(math.sqrt(2), abs=1e-12)
        assert m.margin == pytest.approx(math.sqrt(2) - 1, abs=1e-12)

    def test_linear(self):
        m = check_embedding(G.x, G, 0, 1, 2)
        assert m.lhs == pytest.approx(math.sqrt(1 / 3), abs=1e-6)
        assert m.rhs == pytest.approx(math.sqrt(5 / 3), abs=1e-6)

    def test_sine_p4(self):
        m = check_embedding(np.sin(np.pi * G.x), G, 0, 1, 4)
        # (int sin^4)^(1/4) = (3/8)^(1/4); rhs = sqrt(1 + pi^2 / 2)
        assert m.lhs == pytest.approx((3 / 8) ** 0.25, abs=1e-6)
        assert m.rhs == pytest.approx(math.sqrt(1 + math.pi ** 2 / 2), abs=1e-6)
        assert m.satisfied

    def test_general_interval_scaling(self):
        # u(y) = y on [2, 5] sampled through the map y = 2 + 3x
        a, b = 2.0, 5.0
        u = a + (b - a) * G.x
        m = check_embedding(u, G, a, b, 2)
        l2sq = (b ** 3 - a ** 3) / 3
        assert m.lhs == pytest.approx(math.sqrt(l2sq), rel=1e-6)
        assert m.rhs == pytest.approx(math.sqrt(b - a) * math.sqrt(2 / (b - a) * l2sq
                                                                   + (b - a) * (b - a)), rel=1e-6)

    def test_bad_interval(self):
        with pytest.raises(IntervalError):
            check_embedding(np.ones(G.n_nodes), G, 1, 1, 2)

    @pytest.mark.parametrize("seed", range(40))
    @pytest.mark.parametrize("p", [1, 2, 4, 8])
    def test_random_trig(self, seed, p):
        rng = np.random.default_rng(seed)
        a = rng.uniform(-2, 2)
        b = a + rng.uniform(0.1, 3)
        assert check_embedding(random_trig_polynomial(rng, G), G, a, b, p).margin >= -1e-6


class TestPointwise:
    def test_constant(self):
        m = check_pointwise(np.ones(G.n_nodes), G, 0, 1, 0.37)
        assert (m.lhs, m.rhs) == (pytest.approx(1.0), pytest.approx(2.0))

    def test_linear_at_right_end(self):
        m = check_pointwise(G.x, G, 0, 1, 1)
        assert m.lhs == pytest.approx(1.0, abs=1e-15)
        assert m.rhs == pytest.approx(5 / 3, abs=1e-6)

    def test_zero(self):
        m = check_pointwise(np.zeros(G.n_nodes), G, 0, 1, 0.5)
        assert m.lhs == m.rhs == m.margin == 0.0

    def test_point_outside(self):
        with pytest.raises(PointError):
            check_pointwise(np.ones(G.n_nodes), G, 0, 1, 1.5)

    @pytest.mark.parametrize("seed", range(100))
    def test_random_trig(self, seed):
        rng = np.random.default_rng(1000 + seed)
        a = rng.uniform(-2, 2)
        b = a + rng.uniform(0.1, 3)
        c = rng.uniform(a, b)
        assert check_pointwise(random_trig_polynomial(rng, G), G, a, b, c).margin >= -1e-6

    @pytest.mark.parametrize("seed", range(20))
    def test_sup_form(self, seed):
        u = random_trig_polynomial(np.random.default_rng(seed), G)
        energy = 2 * l2_norm(u, G) ** 2 + l2_norm(derivative(u, G), G) ** 2
        assert lp_norm(u, G, INF) ** 2 <= energy + 1e-6


class TestPoincare:
    def test_sine(self):
        m = check_poincare_dirichlet(np.sin(np.pi * G.x), G)
        assert m.lhs == pytest.approx(0.5, abs=1e-6)
        assert m.rhs == pytest.approx(math.pi ** 2 / 4, abs=1e-5)

    def test_zero(self):
        m = check_poincare_dirichlet(np.zeros(G.n_nodes), G)
        assert m.lhs == m.rhs == 0.0

    def test_parabola(self):
        m = check_poincare_dirichlet(G.x * (1 - G.x), G)
        assert m.lhs == pytest.approx(1 / 30, abs=1e-7)
        assert m.rhs == pytest.approx(1 / 6, abs=1e-7)

    def test_nonzero_boundary(self):
        with pytest.raises(BoundaryError):
            check_poincare_dirichlet(np.ones(G.n_nodes), G)

    @pytest.mark.parametrize("seed", range(100))
    def test_random_sine_series(self, seed):
        v = random_sine_series(np.random.default_rng(seed), G)
        assert check_poincare_dirichlet(v, G).margin >= -1e-6
