from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmfix.errors import EmptyPrefix, ExpressionDomainError, NegativeArgument, NonPositivePoint
from pmfix.gauges import (
    CLASSES,
    DEFAULT_GRID,
    GridSpec,
    classify,
    compose_bound_check,
    expsat,
    from_expression,
    liminf_seq,
    limsup_right,
    limsup_seq,
    limsup_sym,
    linear,
    parse_gauge,
    psi_inf_profile,
    rational,
    zero,
)

S_GRID = DEFAULT_GRID.s_grid()


class TestEvaluation:
    def test_values(self):
        assert linear(0.5).eval(2.0) == 1.0
        assert rational().eval(1.0) == 0.5
        assert expsat().eval(0.0) == 0.0
        assert expsat().eval(1.0) == pytest.approx(1 - np.exp(-1))
        assert zero().eval(3.0) == 0.0

    def test_linear_is_exact(self):
        g = linear(0.3)
        for t in (0.1, 1.7, 1e5):
            assert g.eval(t) == 0.3 * t

    def test_negative_argument(self):
        with pytest.raises(NegativeArgument):
            linear(0.5).eval(-1.0)

    def test_user_expression_domain(self):
        g = from_expression("t/(t-1)")
        with pytest.raises(ExpressionDomainError):
            g.eval(1.0)

    @pytest.mark.parametrize("spec,family", [("linear:0.5", "linear"), ("rational", "rational"),
                                             ("expsat", "expsat"), ("expr:t/2", "expr")])
    def test_parse_gauge(self, spec, family):
        assert parse_gauge(spec).family == family

    @pytest.mark.parametrize("spec", ["linear", "linear:x", "linear:-1", "bogus", "expr:t *"])
    def test_parse_gauge_rejects(self, spec):
        with pytest.raises(ValueError):
            parse_gauge(spec)


class TestLimits:
    def test_linear_right_limit(self):
        est = limsup_right(linear(0.5), 1.0)
        assert est.value == pytest.approx(0.5, abs=1e-6)
        assert est.closed_form == 0.5

    def test_rational_right_limit(self):
        assert limsup_right(rational(), 1.0).value == pytest.approx(0.5, abs=1e-6)

    def test_identity_boundary(self):
        est = limsup_right(linear(1.0), 1.0)
        assert est.value == pytest.approx(1.0, abs=1e-6)
        assert est.value >= 1.0

    def test_traces_are_monotone(self):
        for g in (linear(0.5), rational(), expsat()):
            assert np.all(np.diff(limsup_right(g, 2.0).trace) <= 0)
            assert np.all(np.diff(psi_inf_profile(g).trace) >= 0)

    def test_non_positive_point(self):
        with pytest.raises(NonPositivePoint):
            limsup_right(linear(0.5), 0.0)
        with pytest.raises(NonPositivePoint):
            limsup_sym(linear(0.5), -1.0)

    @pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.9, 1.0, 1.5])
    def test_linear_closed_form_on_whole_grid(self, alpha):
        # the estimate overshoots by alpha times the finest window, at most alpha * 2**-20
        g = linear(alpha)
        for s in S_GRID[::37]:
            est = limsup_right(g, s).value
            assert alpha * s <= est <= alpha * s + alpha * 2.0**-20

    def test_sandwich(self):
        for g in (linear(0.5), rational(), expsat()):
            for s in S_GRID[::41]:
                r, sym = limsup_right(g, s).value, limsup_sym(g, s).value
                assert g.eval(s) <= r <= sym
                assert sym <= s + 1e-6 * max(1.0, s)

    def test_psi_profiles(self):
        lin = psi_inf_profile(linear(0.5))
        np.testing.assert_allclose(lin.trace, 0.5 * np.asarray(DEFAULT_GRID.alphas), rtol=1e-12)
        rat = psi_inf_profile(rational())
        a = np.asarray(DEFAULT_GRID.alphas)
        np.testing.assert_allclose(rat.trace, a * a / (1 + a), rtol=1e-12)
        exp = psi_inf_profile(expsat())
        at100 = exp.trace[list(DEFAULT_GRID.alphas).index(100.0)]
        assert at100 < 1e-6

    def test_right_limit_dominates_sequences_from_the_right(self):
        # limsup of phi along t_n decreasing to s never beats the grid estimate
        for g in (linear(0.7), rational(), expsat()):
            for s in (0.01, 1.0, 30.0):
                ts = s + min(1.0, s) * 2.0 ** -np.arange(1, 60)
                assert limsup_seq(g.values(ts), 10) <= limsup_right(g, s).value + 1e-9

    def test_two_sided_dominates_sequences_converging_from_both_sides(self):
        for g in (linear(0.7), rational()):
            s = 2.0
            ts = s + (-1.0) ** np.arange(60) * 2.0 ** -np.arange(1, 61)
            assert limsup_seq(g.values(ts), 10) <= limsup_sym(g, s).value + 1e-9

    def test_psi_liminf_along_divergent_sequences(self):
        ts = np.geomspace(10, 1e5, 200)
        assert liminf_seq(expsat().psi(ts), 50) <= psi_inf_profile(expsat()).value + 1e-12
        for alpha in (0.0, 0.5, 0.9):
            assert liminf_seq(linear(alpha).psi(ts), 50) > 0


class TestClassify:
    @pytest.mark.parametrize("g", [linear(0.5), rational()])
    def test_all_classes_grid_certified(self, g):
        cls = classify(g)
        for name in CLASSES:
            assert cls[name].passed, name
            assert cls[name].basis == "grid"
            assert cls[name].unresolved == 0

    def test_expsat_fails_only_semi_coercive(self):
        cls = classify(expsat())
        assert [c for c in CLASSES if not cls.passes(c)] == ["psi_semi_coercive"]

    def test_identity_fails(self):
        cls = classify(linear(1.0))
        assert not any(cls.passes(c) for c in CLASSES)

    def test_unresolvable_user_gauge_fails(self):
        cls = classify(from_expression("t"))
        assert not cls.passes("normal")

    def test_user_gauge_with_margin_passes(self):
        cls = classify(from_expression("t/(1+t)"))
        assert all(cls.passes(c) for c in CLASSES)

    def test_non_normal_at_zero(self):
        cls = classify(from_expression("t/2 + 1"))
        assert not cls.passes("normal")
        assert not cls.passes("limit_normal")

    def test_deterministic(self):
        assert classify(rational()).to_dict() == classify(rational()).to_dict()

    def test_custom_grid(self):
        grid = GridSpec(s_min=1e-3, s_max=10.0, n_points=32, halvings=10)
        assert classify(linear(0.5), grid).passes("limit_normal")


class TestSequences:
    def test_limsup_examples(self):
        n = np.arange(1, 1001)
        assert limsup_seq(1 + 1 / n, 100) == pytest.approx(1 + 1 / 901)
        assert limsup_seq([3.0] * 10, 5) == 3.0
        assert limsup_seq((-1.0) ** n / n + 2, 100) == pytest.approx(2 + 1 / 902)
        assert liminf_seq(1 + 1 / n, 100) == pytest.approx(1.001)

    def test_errors(self):
        with pytest.raises(EmptyPrefix):
            limsup_seq([], 1)
        with pytest.raises(ValueError):
            liminf_seq([1.0], 2)

    def test_compose_examples(self):
        n = np.arange(1, 1001)
        res = compose_bound_check(1 + 1 / n, 2 + (-1.0) ** n / n, np.ones(1000), 100)
        assert res.passed and res.lhs == pytest.approx(3.0, abs=0.01)
        res = compose_bound_check([1.0] * 5, [2.0] * 5, [3.0] * 5, 3)
        assert res.passed and res.lhs == res.rhs == 4.0
        res = compose_bound_check(1 / n, 1 / n, 1 / n, 100)
        assert res.passed and res.lhs <= 0.003

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=60),
           st.integers(1, 60))
    def test_compose_bound_holds_for_monotone_composer(self, rows, window):
        window = min(window, len(rows))
        a, b, c = (np.array(col) for col in zip(*rows))
        assert compose_bound_check(a, b, c, window).passed
