import math
from fractions import Fraction

import numpy as np
import pytest

from zkpcp.errors import DegreeTooHigh, InvalidInstance
from zkpcp.field import gf
from zkpcp.harness.forgeries import cascade_accept_probability, cascade_forgery, shift_polynomial
from zkpcp.oracles import table_oracle
from zkpcp.poly import DegreeBounds, MultiPoly, poly_random, sum_over_grid
from zkpcp.sumcheck_rsc import RscCoins, SumInstance, rsc_decide, rsc_prove, rsc_verify, rsc_view_distance


def micro():
    F = gf(17)
    p = MultiPoly.from_terms(F, 2, DegreeBounds.total_degree(3), {(1, 1): 1, (1, 0): 1})
    return SumInstance(F, 2, 3, (0, 1), 3), p


def oracles(inst, p, proof):
    return table_oracle("F", p.evaluate_grid(), inst.q, inst.m), proof.oracle()


class TestInstance:
    def test_invariants(self):
        F = gf(17)
        with pytest.raises(InvalidInstance):
            SumInstance(F, 1, 3, (0, 1), 0)
        with pytest.raises(InvalidInstance):
            SumInstance(F, 2, 2, (0, 1), 0)  # d < |H|+1
        with pytest.raises(InvalidInstance):
            SumInstance(F, 3, 3, (0, 1), 0, delta=Fraction(1, 2))  # 9/17 >= 1/2
        assert SumInstance(F, 2, 2, (0, 1), 0, strict=False).d == 2

    def test_delta_rm(self):
        inst, _ = micro()
        assert inst.delta_rm == Fraction(1, 5)


class TestProver:
    def test_example(self):
        inst, p = micro()
        proof = rsc_prove(inst, p)
        assert [int(v) for v in proof.table[:, 0]] == [3 * a % 17 for a in range(17)]

    def test_zero(self):
        inst, _ = micro()
        z = MultiPoly.zero(inst.F, 2, DegreeBounds.total_degree(3))
        assert not rsc_prove(inst.with_gamma(0), z).table.any()

    def test_constant(self):
        inst, _ = micro()
        one = MultiPoly.constant(inst.F, 2, 1, DegreeBounds.total_degree(3))
        assert np.all(rsc_prove(inst, one).table == 2)

    def test_degree_too_high(self):
        inst, _ = micro()
        p = MultiPoly.from_terms(inst.F, 2, DegreeBounds.total_degree(4), {(2, 2): 1})
        with pytest.raises(DegreeTooHigh):
            rsc_prove(inst, p)

    def test_bundle_matches_partial_sums(self, rng):
        F = gf(13)
        H = (0, 1, 5)
        p = poly_random(F, 4, DegreeBounds.total_degree(4), rng)
        inst = SumInstance(F, 4, 4, H, sum_over_grid(p, H, range(4)), strict=False)
        T = rsc_prove(inst, p).table
        for _ in range(20):
            c1, c2, a = (int(v) for v in F.random(rng, 3))
            g1 = sum_over_grid(p, H, [1, 2, 3]).evaluate((a,))
            g2 = sum_over_grid(p, H, [2, 3]).evaluate((c1, a))
            g3 = sum_over_grid(p, H, [3]).evaluate((c1, c2, a))
            assert tuple(T[c1, c2, a]) == (g1, g2, g3)


class TestVerifier:
    def test_complete_exhaustive(self):
        inst, p = micro()
        Fo, po = oracles(inst, p, rsc_prove(inst, p))
        for seed in range(10):
            rng = np.random.default_rng(seed)
            for c in range(17):
                coins = RscCoins((c,), RscCoins.sample(inst, rng).lines)
                res = rsc_verify(inst, Fo, po, coins)
                assert res.verdict, res.failed

    def test_complete_exhaustive_m3(self):
        F = gf(23)
        H = (0, 1)
        rng = np.random.default_rng(2)
        p = poly_random(F, 3, DegreeBounds.total_degree(3), rng)
        inst = SumInstance(F, 3, 3, H, sum_over_grid(p, H, range(3)))
        Fo, po = oracles(inst, p, rsc_prove(inst, p))
        for c1 in range(23):
            for c2 in range(23):
                assert rsc_verify(inst, Fo, po, RscCoins((c1, c2))).verdict

    def test_zero_proof_nonzero_gamma(self):
        inst, p = micro()
        Fo = table_oracle("F", p.evaluate_grid(), 17, 2)
        po = table_oracle("pi", np.zeros((17, 1), dtype=np.int64), 17, 1)
        for c in range(17):
            assert rsc_verify(inst, Fo, po, RscCoins((c,))).failed == "sum[g1]"

    def test_cascade_rejects_at_rate(self):
        inst, p = micro()
        false = inst.with_gamma(4)
        forged = cascade_forgery(false, p, 4)
        Fo, po = table_oracle("F", p.evaluate_grid(), 17, 2), forged.oracle()
        rej = sum(not rsc_verify(false, Fo, po, RscCoins((c,))).verdict for c in range(17))
        assert rej / 17 == pytest.approx(1 - cascade_accept_probability(false))
        assert rej / 17 >= 1 - inst.m * inst.d / inst.q

    def test_cascade_m4_exact_rate(self):
        F = gf(31)
        H = (0, 1)
        rng = np.random.default_rng(5)
        p = poly_random(F, 4, DegreeBounds.total_degree(3), rng)
        inst = SumInstance(F, 4, 3, H, F.add(sum_over_grid(p, H, range(4)), 1), strict=False)
        forged = cascade_forgery(inst, p, inst.gamma)
        Fo, po = table_oracle("F", p.evaluate_grid(), 31, 4), forged.oracle()
        acc = 0
        for _ in range(400):
            coins = RscCoins(tuple(int(v) for v in F.random(rng, 3)))
            r = rsc_verify(inst, Fo, po, coins)
            assert r.verdict or r.failed == "final[F]"
            acc += r.verdict
        expect = cascade_accept_probability(inst)
        assert abs(acc / 400 - expect) < 4 * math.sqrt(expect * (1 - expect) / 400)

    def test_replay_determinism(self):
        inst, p = micro()
        Fo, po = oracles(inst, p, rsc_prove(inst, p))
        coins = RscCoins.sample(inst, np.random.default_rng(9))
        a = rsc_verify(inst, Fo, po, coins)
        b = rsc_verify(inst, Fo, po, coins)
        assert a.view.key() == b.view.key()
        assert rsc_decide(inst, a.answers, coins) is None


def test_shift_polynomial():
    F = gf(17)
    U, roots = shift_polynomial(F, (0, 1), 3)
    from zkpcp.poly import upoly_eval
    assert len(roots) == 3 and all(upoly_eval(F, U, r) == 0 for r in roots)
    assert F.add(upoly_eval(F, U, 0), upoly_eval(F, U, 1)) == 1


class TestViewDistance:
    def test_honest_zero(self):
        inst, p = micro()
        Fo, po = oracles(inst, p, rsc_prove(inst, p))
        coins = RscCoins.sample(inst, np.random.default_rng(1))
        r = rsc_verify(inst, Fo, po, coins)
        assert rsc_view_distance(inst, r.answers, coins).value == 0

    def test_structured_matches_exhaustive_micro(self):
        F = gf(5)
        H = (0, 1)
        p = MultiPoly.from_terms(F, 2, DegreeBounds.total_degree(1), {(1, 0): 1, (0, 1): 2})
        inst = SumInstance(F, 2, 1, H, sum_over_grid(p, H, [0, 1]), strict=False)
        table = rsc_prove(inst, p).table.copy()
        table[3, 0] = F.add(int(table[3, 0]), 1)  # one corrupted g1 value
        Fo, po = table_oracle("F", p.evaluate_grid(), 5, 2), table_oracle("pi", table, 5, 1)
        rng = np.random.default_rng(4)
        for c in range(5):
            coins = RscCoins((c,), RscCoins.sample(inst, rng, ldt_reps=1).lines)
            r = rsc_verify(inst, Fo, po, coins)
            s = rsc_view_distance(inst, r.answers, coins)
            e = rsc_view_distance(inst, r.answers, coins, strategy="exhaustive")
            assert s.exact and e.exact and s.value == e.value == Fraction(1, 15)

    def test_structured_matches_exhaustive_random_views(self):
        F = gf(3)
        H = (0, 1)
        inst = SumInstance(F, 2, 1, H, 1, strict=False)
        rng = np.random.default_rng(8)
        for _ in range(40):
            coins = RscCoins((int(rng.integers(3)),), RscCoins.sample(inst, rng, ldt_reps=1).lines)
            answers = [(int(v),) for v in rng.integers(0, 3, 3)] + [int(v) for v in rng.integers(0, 3, 6)]
            s = rsc_view_distance(inst, answers, coins)
            e = rsc_view_distance(inst, answers, coins, strategy="exhaustive")
            assert s.value == e.value

    def test_far_input_positive_mean(self):
        F = gf(11)
        H = (0, 1)
        inst = SumInstance(F, 2, 3, H, 1, delta=Fraction(3, 5))
        zero = table_oracle("pi", np.zeros((11, 1), dtype=np.int64), 11, 1)
        rng = np.random.default_rng(0)
        p = poly_random(F, 2, DegreeBounds.total_degree(3), rng)
        Fo = table_oracle("F", p.evaluate_grid(), 11, 2)
        total = Fraction(0)
        for c in range(11):
            coins = RscCoins((c,), RscCoins.sample(inst, rng).lines)
            r = rsc_verify(inst, Fo, zero, coins)
            total += rsc_view_distance(inst, r.answers, coins).value
        assert total / 11 > 0
