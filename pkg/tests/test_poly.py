import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zkpcp.errors import ArityMismatch, BadIndex
from zkpcp.field import gf
from zkpcp.poly import (DegreeBounds, IncompleteTable, InconsistentConstraints, MultiPoly, PointConstraint,
                        PointNotInGrid, PolySim, affine_solution_set, lagrange_basis, lde_from_table, partial_sum,
                        poly_random, poly_reverse_vars, polysim_step, read_grid, sum_over_grid,
                        univariate_fit_check, vanishing_poly, write_grid)


def brute_eval(p: MultiPoly, x):
    F = p.F
    acc = 0
    for e, c in zip(*p.terms()):
        t = c
        for xi, ei in zip(x, e):
            t = F.mul(t, F.pow(xi, ei))
        acc = F.add(acc, t)
    return acc


def x1x2_plus_x1(F):
    return MultiPoly.from_terms(F, 2, DegreeBounds.uniform(2, 3), {(1, 1): 1, (1, 0): 1})


class TestEvaluation:
    def test_examples(self, gf17):
        p = x1x2_plus_x1(gf17)
        assert p.evaluate((1, 1)) == 2
        assert MultiPoly.zero(gf17, 2, DegreeBounds.uniform(2, 1)).evaluate((5, 9)) == 0
        with pytest.raises(ArityMismatch):
            p.evaluate((1,))

    @pytest.mark.parametrize("F", [gf(7), gf(2, e=4)], ids=str)
    def test_grid_and_batch_match_direct(self, F, rng):
        p = poly_random(F, 3, DegreeBounds.individual(2, 1, 3), rng)
        grid = p.evaluate_grid()
        pts = F.random(rng, (30, 3))
        batch = p.evaluate_many(pts)
        for x, v in zip(pts, batch):
            assert v == brute_eval(p, x) == grid[tuple(x)]

    def test_total_degree_space(self, rng):
        F = gf(5)
        b = DegreeBounds.total_degree(2)
        assert b.count(3) == 10
        p = poly_random(F, 3, b, rng)
        assert p.total_degree() <= 2


class TestLagrange:
    def test_linear_indicator(self):
        F = gf(5)
        L = lagrange_basis(F, [[0, 1]], (1,))
        assert L.terms() == ([(1,)], [1])

    def test_product_indicator(self):
        F = gf(5)
        L = lagrange_basis(F, [[0, 1], [0, 1]], (1, 1))
        assert L.terms() == ([(1, 1)], [1])

    def test_degree_two_indicator(self):
        F = gf(7)
        L = lagrange_basis(F, [[0, 1, 2]], (0,))
        assert [L.evaluate((x,)) for x in range(3)] == [1, 0, 0]
        assert L.individual_degrees() == (2,)

    def test_point_not_in_grid(self):
        with pytest.raises(PointNotInGrid):
            lagrange_basis(gf(5), [[0, 1]], (3,))

    @pytest.mark.parametrize("S", [[[0, 1], [2, 3, 4]], [[0, 1, 2, 3]] * 2, [[1, 5], [0, 2], [3, 4]]])
    def test_indicator_exhaustive(self, S):
        F = gf(7)
        for a in itertools.product(*S):
            L = lagrange_basis(F, S, a)
            for b in itertools.product(*S):
                assert L.evaluate(b) == (1 if b == a else 0)


def test_vanishing_poly():
    F = gf(7)
    assert vanishing_poly(F, [0, 1]).evaluate((3,)) == 6
    assert vanishing_poly(F, [0, 1, 2]).evaluate((3,)) == 6
    Z = vanishing_poly(F, [2, 4, 5])
    assert [x for x in range(7) if Z.evaluate((x,)) == 0] == [2, 4, 5]


class TestPartialSum:
    def test_example(self, gf17):
        g1 = partial_sum(x1x2_plus_x1(gf17), [0, 1], 1)
        assert g1.terms() == ([(1,)], [3])

    def test_constant(self, gf17):
        c = MultiPoly.constant(gf17, 3, 5)
        g = partial_sum(c, [0, 1, 2], 1)
        assert g.evaluate((4,)) == 5 * 9 % 17

    def test_antisymmetric_full_sum(self, gf17):
        p = MultiPoly.from_terms(gf17, 2, DegreeBounds.uniform(2, 1), {(1, 0): 1, (0, 1): 16})
        assert sum_over_grid(p, [0, 1, 3], [0, 1]) == 0

    def test_bad_index(self, gf17):
        with pytest.raises(BadIndex):
            partial_sum(x1x2_plus_x1(gf17), [0, 1], 2)

    def test_telescoping(self, rng):
        F = gf(11)
        H = [0, 1, 4]
        p = poly_random(F, 4, DegreeBounds.uniform(4, 3), rng)
        for i in range(1, 3):
            gi = partial_sum(p, H, i)
            gn = partial_sum(p, H, i + 1)
            for _ in range(5):
                x = tuple(int(v) for v in F.random(rng, i))
                assert F.sum(gn.evaluate(x + (h,)) for h in H) == gi.evaluate(x)


class TestSumOverGrid:
    def test_example(self):
        F = gf(7)
        p = MultiPoly.from_terms(F, 2, DegreeBounds.uniform(2, 1), {(1, 0): 1, (0, 1): 1})
        s = sum_over_grid(p, [0, 1], [1])
        assert sorted(zip(*s.terms())) == [((0,), 1), ((1,), 2)]

    def test_vanishing_factor(self, rng):
        F = gf(7)
        H = [0, 1, 2]
        Z = vanishing_poly(F, H).coeffs
        q = poly_random(F, 2, DegreeBounds.uniform(2, 2), rng)
        p = q.mul_univariate(0, Z)
        assert sum_over_grid(p, H, [0, 1]) == 0

    def test_matches_brute_force(self, rng):
        for trial in range(100):
            F = gf(5) if trial % 2 else gf(2, e=3)
            m = 1 + trial % 3
            H = [0, 1, 3][: 2 + trial % 2]
            p = poly_random(F, m, DegreeBounds.uniform(m, 2), rng)
            which = [j for j in range(m) if (trial >> j) & 1] or [0]
            got = sum_over_grid(p, H, which)
            rest = [j for j in range(m) if j not in which]
            x = F.random(rng, len(rest))
            total = 0
            for hs in itertools.product(H, repeat=len(which)):
                pt = [0] * m
                for j, h in zip(which, hs):
                    pt[j] = h
                for j, v in zip(rest, x):
                    pt[j] = int(v)
                total = F.add(total, p.evaluate(pt))
            assert (got if not rest else got.evaluate(x)) == total


class TestLde:
    def test_identity(self):
        F = gf(5)
        assert lde_from_table(F, [0, 1], [0, 1]).terms() == ([(1,)], [1])

    def test_and(self):
        F = gf(5)
        assert lde_from_table(F, [[0, 0], [0, 1]], [0, 1]).terms() == ([(1, 1)], [1])

    def test_indicator(self):
        F = gf(7)
        L = lde_from_table(F, {(0,): 1, (1,): 0, (2,): 0}, [0, 1, 2])
        assert L == lagrange_basis(F, [[0, 1, 2]], (0,))

    def test_incomplete(self):
        with pytest.raises(IncompleteTable):
            lde_from_table(gf(5), {(0,): 1}, [0, 1])

    def test_agrees_on_grid(self, rng):
        F = gf(2, e=4, subfield_f=2)
        H = list(F.subfield_elements())
        vals = F.random(rng, (4, 4, 4))
        p = lde_from_table(F, vals, H)
        assert max(p.individual_degrees()) <= 3
        for idx in itertools.product(range(4), repeat=3):
            assert p.evaluate([H[i] for i in idx]) == vals[idx]


class TestReverse:
    def test_examples(self, gf17):
        x1 = MultiPoly.from_terms(gf17, 2, DegreeBounds.uniform(2, 1), {(1, 0): 1})
        assert poly_reverse_vars(x1).terms() == ([(0, 1)], [1])
        sym = MultiPoly.from_terms(gf17, 2, DegreeBounds.uniform(2, 1), {(1, 1): 3})
        assert poly_reverse_vars(sym) == sym

    def test_involution(self, rng):
        F = gf(13)
        for _ in range(100):
            p = poly_random(F, 3, DegreeBounds.individual(1, 2, 3), rng)
            r = poly_reverse_vars(p)
            assert poly_reverse_vars(r) == p
            x = F.random(rng, 3)
            assert r.evaluate(x) == p.evaluate(x[::-1])


class TestRandom:
    def test_constants_uniform(self, rng):
        F = gf(3)
        counts = Counter(int(poly_random(F, 1, DegreeBounds.total_degree(0), rng).coeffs[0]) for _ in range(3000))
        assert set(counts) == {0, 1, 2}

    def test_linear_uniform_chisquare(self, rng):
        from scipy.stats import chisquare
        F = gf(3)
        b = DegreeBounds.individual(1)
        c = F.random(rng, (100_000, 2))  # same sampler path as poly_random, batched
        assert poly_random(F, 1, b, rng).coeffs.shape == (2,)
        codes = c[:, 0] * 3 + c[:, 1]
        obs = np.bincount(codes, minlength=9)
        assert chisquare(obs).pvalue > 1e-3

    def test_full_degree_always_passes(self, rng):
        F = gf(7)
        p = poly_random(F, 1, DegreeBounds.individual(6), rng)
        assert univariate_fit_check(F, p.evaluate_grid(), 6).is_degree_le_d


class TestFit:
    def test_member(self, gf17):
        r = univariate_fit_check(gf17, [3 * x % 17 for x in range(17)], 3)
        assert r.is_degree_le_d and r.distance == 0
        assert r.nearest.terms() == ([(1,)], [3])

    def test_square_vs_linear(self):
        F = gf(5)
        vals = [x * x % 5 for x in range(5)]
        r = univariate_fit_check(F, vals, 1)
        best = min(sum((a + b * x) % 5 != vals[x] for x in range(5)) for a in range(5) for b in range(5))
        assert not r.is_degree_le_d
        assert r.distance == Fraction(best, 5) > 0
        assert tuple(r.nearest.coeffs) == (0, 1)  # lexicographically first optimum

    def test_constant(self):
        assert univariate_fit_check(gf(7), [4] * 7, 0).is_degree_le_d

    def test_subset_strategy_matches_enumeration(self, rng):
        F = gf(13)
        for _ in range(5):
            vals = F.random(rng, 13)
            vals[:7] = [(2 * x * x + 5) % 13 for x in range(7)]
            r = univariate_fit_check(F, vals, 2)
            best = max(sum(((a + b * x + c * x * x) % 13) == vals[x] for x in range(13))
                       for a in range(13) for b in range(13) for c in range(13))
            assert r.distance == Fraction(13 - best, 13)


class TestPolySim:
    def test_examples(self):
        F = gf(3)
        b = DegreeBounds.total_degree(1)
        S = [PointConstraint((0,), 1)]
        rng = np.random.default_rng(0)
        assert all(polysim_step(F, 1, b, S, (0,), rng) == 1 for _ in range(20))
        assert PolySim(F, 1, b, rng, S).distribution((1,)) == {v: Fraction(1, 3) for v in range(3)}
        with pytest.raises(InconsistentConstraints):
            polysim_step(F, 1, DegreeBounds.total_degree(0), [PointConstraint((0,), 1), PointConstraint((1,), 2)],
                         (2,), rng)

    @pytest.mark.parametrize("bounds,m", [(DegreeBounds.total_degree(1), 1), (DegreeBounds.total_degree(2), 1),
                                          (DegreeBounds.individual(1, 1), 2)])
    def test_matches_enumerated_conditionals(self, bounds, m):
        F = gf(3)
        exps = bounds.monomials(m)
        pts = list(itertools.product(range(3), repeat=m))
        polys = [np.array(c) for c in itertools.product(range(3), repeat=len(exps))]

        def ev(c, x):
            return int(sum(int(ci) * np.prod([xi ** int(e) for xi, e in zip(x, ex)]) for ci, ex in zip(c, exps)) % 3)

        table = {tuple(c): [ev(c, x) for x in pts] for c in polys}
        # every one- and two-point conditioning versus enumeration
        for i, a in enumerate(pts):
            for va in range(3):
                consistent = [v for v in table.values() if v[i] == va]
                sim = PolySim(F, m, bounds, None, [PointConstraint(a, va)])
                x0, K = affine_solution_set(F, m, bounds, [PointConstraint(a, va)])
                assert len(consistent) == 3 ** len(K)
                for j, b in enumerate(pts):
                    emp = Counter(v[j] for v in consistent)
                    expect = {k: Fraction(n, len(consistent)) for k, n in emp.items()}
                    assert sim.distribution(b) == expect

    def test_sequential_joint_equals_sampling(self):
        """Exact branch enumeration of the lazy sampler versus the joint law of
        (Q(a1), Q(a2), Q(a3)) over all Q in the space."""
        F = gf(3)
        for bounds, m, queries in [(DegreeBounds.total_degree(2), 1, [(0,), (2,), (1,)]),
                                   (DegreeBounds.individual(1, 1), 2, [(0, 0), (1, 1), (1, 0), (0, 1), (2, 2)])]:
            exps = bounds.monomials(m)
            joint_true = Counter()
            for c in itertools.product(range(3), repeat=len(exps)):
                p = MultiPoly.from_terms(F, m, bounds, {tuple(e): v for e, v in zip(exps, c)})
                joint_true[tuple(p.evaluate(q) for q in queries)] += Fraction(1, 3 ** len(exps))
            joint_sim = Counter()

            def walk(prefix, prob):
                if len(prefix) == len(queries):
                    joint_sim[tuple(prefix)] += prob
                    return
                sim = PolySim(F, m, bounds, None, [PointConstraint(q, v) for q, v in zip(queries, prefix)])
                for v, pv in sim.distribution(queries[len(prefix)]).items():
                    walk(prefix + [v], prob * pv)

            walk([], Fraction(1))
            assert joint_sim == joint_true


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_json_roundtrip(seed):
    F = gf(2, e=5)
    p = poly_random(F, 2, DegreeBounds.total_degree(3), np.random.default_rng(seed))
    assert MultiPoly.from_json(p.to_json()) == p


def test_grid_file_roundtrip(tmp_path, rng):
    F = gf(2, e=4)
    vals = F.random(rng, (16, 16, 3))
    write_grid(tmp_path / "g.bin", F, 2, vals)
    G, m, back = read_grid(tmp_path / "g.bin")
    assert G == F and m == 2 and np.array_equal(back, vals)
