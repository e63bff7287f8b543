"""Benchmark problems, utilities, and dominance machinery."""

import math

import numpy as np
import pytest

from prefpareto import problems as P


class TestProblemSpec:
    def test_invalid_dimensions_rejected(self):
        with pytest.raises(P.ProblemError):
            P.ProblemSpec("bad", 0, 2, np.zeros((0, 2)), ("min", "min"))
        with pytest.raises(P.ProblemError):
            P.ProblemSpec("bad", 3, 1, np.tile([0.0, 1.0], (3, 1)), ("min",))

    def test_degenerate_bounds_rejected(self):
        bounds = np.array([[0.0, 1.0], [0.5, 0.5]])
        with pytest.raises(P.ProblemError):
            P.ProblemSpec("bad", 2, 2, bounds, ("min", "min"))

    def test_catalog_shapes(self):
        for name, d, m in [
            ("dtlz7-5-3", 5, 3),
            ("dtlz2-9-6", 9, 6),
            ("wfg3-14-9", 14, 9),
            ("carcab-7-9", 7, 9),
        ]:
            prob = P.make_problem(name)
            assert (prob.d, prob.m) == (d, m)
            assert prob.bounds.shape == (d, 2)
            assert len(prob.orientation) == m

    def test_unknown_id_rejected(self):
        with pytest.raises(P.ProblemError):
            P.make_problem("zdt1-30-2")

    def test_wfg_position_split(self):
        # k must be a multiple of m-1 leaving an even distance count
        assert P.wfg_position_count(14, 9) == 8
        assert P.wfg_position_count(6, 3) == 2
        with pytest.raises(P.ProblemError):
            P.wfg_position_count(3, 3)


class TestEvaluateObjectives:
    def test_dtlz2_midpoint(self):
        """All-0.5 input puts DTLZ2 on its unit-sphere front at 45 degrees."""
        prob = P.make_problem("dtlz2-9-2")
        f = P.evaluate_objectives(prob, np.full(9, 0.5))
        expected = math.cos(math.pi / 4.0)
        np.testing.assert_allclose(f, [expected, expected], atol=1e-12)

    def test_dtlz2_front_membership(self):
        """Distance variables at 0.5 give sum of squared objectives = 1."""
        prob = P.make_problem("dtlz2-9-6")
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = rng.uniform(size=9)
            x[5:] = 0.5
            f = P.evaluate_objectives(prob, x)
            assert abs(np.sum(f**2) - 1.0) < 1e-10

    def test_dtlz7_zero_distance(self):
        """With distance variables at 0 the last objective follows the
        published h-formula with unit base distance term."""
        prob = P.make_problem("dtlz7-5-2")
        x = np.array([0.3, 0.0, 0.0, 0.0, 0.0])
        f = P.evaluate_objectives(prob, x)
        f2_hand = 2.0 * (2.0 - 0.3 / 2.0 * (1.0 + math.sin(3.0 * math.pi * 0.3)))
        np.testing.assert_allclose(f, [0.3, f2_hand], atol=1e-12)

    def test_wfg3_lower_corner(self):
        """Hand evaluation of the WFG3 transformation chain at z = 0."""
        prob = P.make_problem("wfg3-14-9")
        f = P.evaluate_objectives(prob, np.zeros(14))
        expected = [2.0 / 3.0] * 8 + [2.0 / 3.0 + 18.0]
        np.testing.assert_allclose(f, expected, atol=1e-12)

    def test_wfg3_upper_corner(self):
        """Hand evaluation at z_i = 2i (all normalized inputs equal 1)."""
        prob = P.make_problem("wfg3-14-9")
        f = P.evaluate_objectives(prob, 2.0 * np.arange(1, 15, dtype=float))
        expected = (
            [2.0 / 3.0 + 2.0 * (5.0 / 6.0) ** 7]
            + [2.0 / 3.0 + 2.0 * j * ((5.0 / 6.0) ** (8 - j)) / 6.0 for j in range(2, 9)]
            + [2.0 / 3.0]
        )
        np.testing.assert_allclose(f, expected, atol=1e-12)

    def test_wfg3_front_identity(self):
        """Optimal distance inputs (0.35 normalized) zero the base distance
        term, so sum_j f_j / (2j) telescopes to exactly 1."""
        prob = P.make_problem("wfg3-14-9")
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = rng.uniform(0.0, 2.0 * np.arange(1, 15))
            x[8:] = 0.7 * np.arange(9, 15)
            f = P.evaluate_objectives(prob, x)
            assert abs(np.sum(f / (2.0 * np.arange(1, 10))) - 1.0) < 1e-10

    def test_carcab_shape_and_weight(self):
        prob = P.make_problem("carcab-7-9")
        x = np.array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
        f = P.evaluate_objectives(prob, x)
        assert f.shape == (9,)
        # weight response is affine with known coefficients
        assert abs(f[0] - (1.98 + 4.9 + 6.67 + 6.98 + 4.01 + 1.78 + 1e-5 + 2.73)) < 1e-12

    def test_deterministic(self):
        prob = P.make_problem("wfg3-14-9")
        rng = np.random.default_rng(5)
        x = rng.uniform(0.0, 2.0 * np.arange(1, 15))
        a = P.evaluate_objectives(prob, x)
        b = P.evaluate_objectives(prob, x)
        assert np.array_equal(a, b)

    def test_dimension_mismatch(self):
        prob = P.make_problem("dtlz2-9-2")
        with pytest.raises(P.ProblemError):
            P.evaluate_objectives(prob, np.zeros(4))

    def test_out_of_bounds(self):
        prob = P.make_problem("dtlz2-9-2")
        x = np.full(9, 0.5)
        x[0] = 1.5
        with pytest.raises(P.ProblemError):
            P.evaluate_objectives(prob, x)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(7)
        for name in ["dtlz7-5-3", "dtlz2-9-6", "wfg3-14-9", "carcab-7-9"]:
            prob = P.make_problem(name)
            X = rng.uniform(prob.lower, prob.upper, size=(10, prob.d))
            F = P.evaluate_objectives_batch(prob, X)
            for i in range(10):
                np.testing.assert_array_equal(F[i], P.evaluate_objectives(prob, X[i]))


class TestTrueUtility:
    def test_linear_sum(self):
        assert P.true_utility(P.linear_sum(), [1.0, 2.0, 3.0]) == 6.0

    def test_cubic_zero_at_ideal(self):
        z = [0.0, 0.2, 0.0, 0.2, 0.0, 0.2]
        assert P.true_utility(P.cubic_norm_to_ideal(z), np.array(z)) == 0.0

    def test_softmin_constant_vector(self):
        """Algebraic simplification: u(c * ones(m)) = c - log(m)/theta."""
        for m in (2, 5, 9):
            for c in (-3.0, 0.0, 1.7):
                u = P.true_utility(P.soft_min_exponential(4.0), np.full(m, c))
                assert abs(u - (c - math.log(m) / 4.0)) < 1e-12

    def test_softmin_bounds(self):
        """min(y) - log(m)/theta <= u(y) <= min(y) for all y."""
        rng = np.random.default_rng(13)
        spec = P.soft_min_exponential(4.0)
        for _ in range(200):
            y = rng.normal(scale=5.0, size=rng.integers(2, 10))
            u = P.true_utility(spec, y)
            assert y.min() - math.log(len(y)) / 4.0 - 1e-12 <= u <= y.min() + 1e-12

    def test_linear_additive(self):
        rng = np.random.default_rng(17)
        spec = P.linear_sum()
        for _ in range(100):
            a = rng.normal(size=4)
            b = rng.normal(size=4)
            assert abs(
                P.true_utility(spec, a + b)
                - P.true_utility(spec, a)
                - P.true_utility(spec, b)
            ) < 1e-9

    def test_all_kinds_monotone(self):
        """Every utility kind is non-decreasing under coordinate-wise
        improvement in canonical maximization form."""
        rng = np.random.default_rng(19)
        tables = P.load_piecewise_tables()
        specs = [
            (P.linear_sum(), 6),
            (P.cubic_norm_to_ideal([0.0, 0.2] * 3), 6),
            (P.soft_min_exponential(4.0), 6),
            (P.piecewise_linear_sum(tables[:6]), 6),
        ]
        for spec, m in specs:
            for _ in range(300):
                y = rng.normal(scale=10.0, size=m)
                eps = np.abs(rng.normal(scale=1.0, size=m)) * rng.integers(0, 2, size=m)
                assert P.true_utility(spec, y + eps) >= P.true_utility(spec, y) - 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(P.ProblemError):
            P.true_utility(P.cubic_norm_to_ideal([0.0, 0.2]), np.zeros(3))

    def test_nonfinite_rejected(self):
        with pytest.raises(P.ProblemError):
            P.true_utility(P.linear_sum(), [1.0, np.inf])

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(23)
        specs = [
            P.linear_sum(),
            P.cubic_norm_to_ideal(rng.normal(size=5)),
            P.soft_min_exponential(2.5),
            P.piecewise_linear_sum(P.load_piecewise_tables()[:5]),
        ]
        Y = rng.normal(scale=20.0, size=(40, 5))
        for spec in specs:
            batch = P.true_utility_batch(spec, Y)
            scalar = np.array([P.true_utility(spec, y) for y in Y])
            np.testing.assert_allclose(batch, scalar, atol=1e-12)

    def test_invalid_theta(self):
        with pytest.raises(P.ProblemError):
            P.soft_min_exponential(0.0)

    def test_piecewise_validation(self):
        with pytest.raises(P.ProblemError):
            P.PiecewiseTable(np.array([0.0, 0.0, 1.0]), np.ones(4))
        with pytest.raises(P.ProblemError):
            P.PiecewiseTable(np.array([0.0, 1.0]), np.array([1.0, -1.0, 1.0]))


class TestParetoDominance:
    def test_trivial_cases(self):
        assert P.pareto_dominates([1.0, 1.0], [0.0, 0.0])
        assert not P.pareto_dominates([1.0, 0.0], [1.0, 0.0])
        assert not P.pareto_dominates([1.0, 0.0], [0.0, 1.0])
        assert not P.pareto_dominates([0.0, 1.0], [1.0, 0.0])

    def test_orientation(self):
        # under minimization, smaller is better
        assert P.pareto_dominates([0.0, 0.0], [1.0, 1.0], ("min", "min"))
        assert P.pareto_dominates([0.0, 1.0], [1.0, 1.0], ("min", "max"))

    def test_shape_mismatch(self):
        with pytest.raises(P.ProblemError):
            P.pareto_dominates([1.0], [1.0, 2.0])

    def test_irreflexive_asymmetric(self):
        rng = np.random.default_rng(29)
        for _ in range(500):
            a = rng.integers(0, 3, size=3).astype(float)
            b = rng.integers(0, 3, size=3).astype(float)
            assert not P.pareto_dominates(a, a)
            if P.pareto_dominates(a, b):
                assert not P.pareto_dominates(b, a)

    def test_transitive(self):
        rng = np.random.default_rng(31)
        for _ in range(2000):
            a, b, c = rng.integers(0, 3, size=(3, 3)).astype(float)
            if P.pareto_dominates(a, b) and P.pareto_dominates(b, c):
                assert P.pareto_dominates(a, c)


class TestNonDominatedFilter:
    def test_trivial(self):
        assert list(P.non_dominated_filter([[1.0, 1.0], [0.0, 0.0]])) == [0]
        assert list(P.non_dominated_filter([[1.0, 0.0]])) == [0]

    def test_incomparable_triple(self):
        idx = P.non_dominated_filter([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        assert list(idx) == [0, 1, 2]

    def test_empty_rejected(self):
        with pytest.raises(P.ProblemError):
            P.non_dominated_filter(np.zeros((0, 2)))

    def test_matches_pairwise_oracle(self):
        """Every survivor is undominated per an O(n^2) pairwise check, and
        the survivors are mutually non-dominated."""
        rng = np.random.default_rng(37)
        for _ in range(20):
            n = int(rng.integers(1, 200))
            m = int(rng.integers(2, 5))
            pts = rng.normal(size=(n, m))
            if rng.random() < 0.5:
                pts = np.round(pts, 1)  # encourage ties
            keep = set(P.non_dominated_filter(pts))
            for i in range(n):
                dominated = any(
                    P.pareto_dominates(pts[j], pts[i]) for j in range(n) if j != i
                )
                assert (i not in keep) == dominated
            for i in keep:
                for j in keep:
                    if i != j:
                        assert not P.pareto_dominates(pts[i], pts[j])


class TestSerialization:
    def test_spec_yaml_round_trip(self, tmp_path):
        prob = P.make_problem("wfg3-14-9")
        util = P.soft_min_exponential(4.0)
        path = tmp_path / "spec.yaml"
        P.save_specs(path, prob, util)
        prob2, util2 = P.load_specs(path)
        assert (prob2.name, prob2.d, prob2.m) == (prob.name, prob.d, prob.m)
        assert prob2.orientation == prob.orientation
        np.testing.assert_array_equal(prob2.bounds, prob.bounds)
        assert util2.kind == util.kind
        assert util2.params["theta"] == 4.0

    def test_piecewise_table_round_trip(self, tmp_path):
        tables = P.load_piecewise_tables()
        assert len(tables) == 9
        path = tmp_path / "tables.txt"
        P.dump_piecewise_tables(tables, path)
        loaded = P.load_piecewise_tables(path)
        for a, b in zip(tables, loaded):
            np.testing.assert_array_equal(a.breakpoints, b.breakpoints)
            np.testing.assert_array_equal(a.slopes, b.slopes)

    def test_all_utility_dicts_round_trip(self):
        specs = [
            P.linear_sum(),
            P.cubic_norm_to_ideal([0.0, 0.2, 0.0]),
            P.soft_min_exponential(4.0),
            P.piecewise_linear_sum(P.load_piecewise_tables()[:3]),
        ]
        rng = np.random.default_rng(41)
        for spec in specs:
            back = P.utility_from_dict(P.utility_to_dict(spec))
            y = rng.normal(size=3)
            assert P.true_utility(back, y) == P.true_utility(spec, y)

    def test_default_pairings(self):
        assert P.default_utility(P.make_problem("dtlz7-5-3")).kind == "linear-sum"
        dt2 = P.default_utility(P.make_problem("dtlz2-9-6"))
        assert dt2.kind == "cubic-norm-to-ideal"
        np.testing.assert_array_equal(
            dt2.params["ideal"], [0.0, 0.2, 0.0, 0.2, 0.0, 0.2]
        )
        assert P.default_utility(P.make_problem("wfg3-14-9")).params["theta"] == 4.0
        assert P.default_utility(P.make_problem("carcab-7-9")).kind == "piecewise-linear-sum"
