import itertools
import logging
from fractions import Fraction

import numpy as np
import pytest

from zkpcp.adversary import ScriptedAdversary
from zkpcp.errors import BudgetExceeded, SearchSpaceTooLarge
from zkpcp.field import gf
from zkpcp.osat_pcp import (OSatInstance, OsatCoins, OsatRealBatch, OsatSimBatch, RandomProofBatch,
                            TauSummand, TooManyVariables, WidthMismatch, WitnessInvalid, arithmetize_B,
                            balance_reps, c_read_points, claim_equivalence_bruteforce,
                            claim_equivalence_report, commit_witness, commitment_hiding_tv,
                            decommit, gamma_lex, hybrid_h0_h1_check, osat_check_direct,
                            osat_encode_from_3sat, osat_params, osat_prove, osat_prove_unchecked,
                            osat_simulate, osat_summand_tau, osat_verify_batch, osat_verify_proof,
                            osat_view_length, random_3cnf, selector, summand_g, summand_h)
from zkpcp.poly import DegreeBounds, MultiPoly, poly_random
from zkpcp.sumcheck_zk import SUM

logging.getLogger("zkpcp").setLevel(logging.ERROR)

PHI_SAT = [(1, 2, 2), (-1, -2, -2)]
UNSAT_CLAUSES = ((5, 6, 7), (-5, -6, -7))


@pytest.fixture(scope="module")
def sat_inst():
    inst, tr = osat_encode_from_3sat(PHI_SAT, r=1, s=1)
    return inst, tr([1, 0])


@pytest.fixture(scope="module")
def micro16(sat_inst):
    inst, A = sat_inst
    return inst, A, osat_params(inst, gf(2, e=4), (0, 1), k=3)


@pytest.fixture(scope="module")
def micro4(sat_inst):
    inst, A = sat_inst
    return inst, A, osat_params(inst, gf(2, e=2), (0, 1), k=1)


def all_oracles(s):
    return [np.array(A) for A in itertools.product((0, 1), repeat=1 << s)]


def grid_points(params):
    sel = list(itertools.product(params.H, repeat=params.m1 + 3 * params.m2))
    return np.array([w + a for w in sel for a in itertools.product((0, 1), repeat=3)], dtype=np.int64)


class TestInstance:
    def test_single_clause_all_true(self):
        inst, tr = osat_encode_from_3sat([(1, 2, 3)], s=2)
        assert osat_check_direct(inst, tr([1, 1, 1]))
        assert osat_check_direct(inst, np.ones(4, dtype=np.int64))

    def test_contradiction_has_no_oracle(self):
        inst, _ = osat_encode_from_3sat([(1,), (-1,)], s=2)
        assert not any(osat_check_direct(inst, A) for A in all_oracles(2))

    def test_round_trip_against_phi(self, rng):
        for _ in range(10):
            phi = random_3cnf(4, 5, rng)
            inst, tr = osat_encode_from_3sat(phi, num_vars=4, s=2)
            for bits in itertools.product((0, 1), repeat=4):
                phi_sat = all(any((lit > 0) == bool(bits[abs(lit) - 1]) for lit in c) for c in phi)
                assert osat_check_direct(inst, tr(bits)) == phi_sat

    def test_too_many_variables(self):
        with pytest.raises(TooManyVariables):
            osat_encode_from_3sat([(1, 2, 5)], s=2)

    def test_accept_all_and_contradiction(self):
        accept_all = OSatInstance(1, 1, ())
        contra = OSatInstance(1, 1, ((1,), (-1,)))
        for A in all_oracles(1):
            assert osat_check_direct(accept_all, A)
            assert not osat_check_direct(contra, A)

    def test_require_3cnf(self):
        OSatInstance(1, 1, ((1, 2, 3),), require_3cnf=True)
        with pytest.raises(ValueError):
            OSatInstance(1, 1, ((1, 2),), require_3cnf=True)
        with pytest.raises(ValueError):
            OSatInstance(1, 1, ((8, 1, 2),))

    def test_unsat_clauses(self):
        inst = OSatInstance(1, 1, UNSAT_CLAUSES)
        assert not any(osat_check_direct(inst, A) for A in all_oracles(1))

    def test_json_round_trip(self, sat_inst):
        inst, _ = sat_inst
        assert OSatInstance.from_json(inst.to_json()) == inst


class TestArithmetisation:
    def cube(self, n):
        return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)

    def test_constant_true(self, gf16):
        inst = OSatInstance(1, 1, ())
        for mode in ("multilinear", "formula"):
            assert not arithmetize_B(inst, mode, gf16)(self.cube(7)).any()

    def test_single_clause(self, gf16, rng):
        inst = OSatInstance(1, 1, ((1, 2, 3),))
        bh = arithmetize_B(inst, "multilinear", gf16)
        F = gf16
        pts = F.random(rng, (50, 7))
        expect = F.vmul(F.vmul(F.vsub(1, pts[:, 0]), F.vsub(1, pts[:, 1])), F.vsub(1, pts[:, 2]))
        assert np.array_equal(bh(pts), expect)

    def test_modes_agree_on_cube(self, gf16, rng):
        inst, _ = osat_encode_from_3sat(random_3cnf(2, 3, rng), num_vars=2, r=2, s=1)
        cube = self.cube(inst.n_vars)
        ml = arithmetize_B(inst, "multilinear", gf16)(cube)
        fm = arithmetize_B(inst, "formula", gf16)
        assert np.array_equal(ml, fm(cube))
        assert np.array_equal(ml, (~inst.truth_table).astype(np.int64))
        assert fm.d_B == sum(len(c) for c in inst.clauses)

    def test_multilinear_is_multilinear(self, gf16, rng):
        inst = OSatInstance(1, 1, ((1, -4, 6), (2, 3, -7)))
        bh = arithmetize_B(inst, "multilinear", gf16)
        F = gf16
        x = F.random(rng, 7)
        for j in range(7):
            pts = np.repeat(x[None, :], F.order, axis=0)
            pts[:, j] = np.arange(F.order)
            vals = bh(pts)
            # affine in coordinate j: v(t) = v(0) + t (v(1) - v(0))
            pred = F.vadd(vals[0], F.vmul(np.arange(F.order), F.vsub(vals[1], vals[0])))
            assert np.array_equal(vals, pred)


class TestGamma:
    def test_binary_identity(self, gf16):
        assert gamma_lex(gf16, (0, 1), 2).map((0, 1)) == "01"

    def test_extension_on_grid(self, gf16):
        g = gamma_lex(gf16, (0, 1, 2, 3), 2)
        for pt in itertools.product((0, 1, 2, 3), repeat=2):
            bits = [int(b) for b in g.map(pt)]
            assert list(g(np.array([pt]))[0]) == bits

    def test_bijection_size_four(self, gf16):
        g = gamma_lex(gf16, (0, 1, 2, 3), 1)
        assert sorted(g.map((h,)) for h in (0, 1, 2, 3)) == ["00", "01", "10", "11"]

    def test_width_mismatch(self, gf16):
        with pytest.raises(WidthMismatch):
            gamma_lex(gf16, (0, 1, 2), 1)
        with pytest.raises(WidthMismatch):
            gamma_lex(gf16, (0, 1), 2, width=3)


class TestSummands:
    def test_g_zero_where_B_true(self, micro16, rng):
        inst, A, p = micro16
        ahat = poly_random(p.F, p.m2, DegreeBounds.uniform(p.m2, p.deg_C), rng)
        g = summand_g(ahat, p)
        pts = grid_points(p)
        ok = inst.truth_table[[int("".join(map(str, r)), 2) for r in pts]]
        assert not g(pts[ok]).any()

    def test_g_zero_when_factor_vanishes(self, micro16, rng):
        _, _, p = micro16
        F = p.F
        ahat = poly_random(F, p.m2, DegreeBounds.uniform(p.m2, p.deg_C), rng)
        for _ in range(20):
            w = F.random(rng, p.n_w)
            w[p.a_index(2)] = F.sub(1, ahat.evaluate(w[p.b_slice(2)]))
            assert summand_g(ahat, p)(w[None, :])[0] == 0

    def test_g_grid_sum_zero_for_witness(self, micro16, rng):
        _, A, p = micro16
        ahat = decommit(commit_witness(A, p, rng), p)
        assert not summand_g(ahat, p)(grid_points(p)).any()

    def test_sum_g_h_identity(self, micro16, rng):
        _, _, p = micro16
        F = p.F
        cs = np.array(list(itertools.product(p.H, repeat=3 * p.k)), dtype=np.int64)
        for _ in range(3):
            chat = poly_random(F, p.c_vars, p.c_bounds, rng)
            g, h = summand_g(decommit(chat, p), p), summand_h(chat, p)
            W = np.concatenate([F.random(rng, (10, p.n_w)), grid_points(p)[:10]])
            for w in W:
                X = np.concatenate([np.repeat(w[None, :], len(cs), axis=0), cs], axis=1)
                assert F.vsum(h(X)) == g(w[None, :])[0]

    def test_h_correction_only_at_zero(self, micro4, rng):
        _, _, p = micro4
        F = p.F
        chat = poly_random(F, p.c_vars, p.c_bounds, rng)
        zero = MultiPoly.zero(F, p.c_vars, p.c_bounds)
        hz = summand_h(zero, p)
        for _ in range(20):
            x = F.random(rng, p.M)
            x[p.c_slice(1)] = 1
            x[p.c_slice(2)] = 1
            x[p.c_slice(3)] = 1
            assert hz(x[None, :])[0] == 0
        del chat

    def test_selector_collapses_on_grid(self, micro4):
        _, _, p = micro4
        pts = grid_points(p)
        for tau in pts[::7]:
            vals = selector(p, pts, tau)
            assert vals.sum() == 1 and vals[np.all(pts == tau, axis=1)][0] == 1


class TestCommitment:
    def test_decommitment_identity(self, micro16, rng):
        _, A, p = micro16
        chat = commit_witness(A, p, rng)
        ahat = decommit(chat, p)
        for b in itertools.product(p.H, repeat=p.m2):
            assert ahat.evaluate(b) == A[int(p.gamma2.map(b), 2)]

    def test_two_seeds(self, micro16):
        _, A, p = micro16
        c1 = commit_witness(A, p, np.random.default_rng(1))
        c2 = commit_witness(A, p, np.random.default_rng(2))
        assert not np.array_equal(c1.coeffs, c2.coeffs)
        grid = list(itertools.product(p.H, repeat=p.m2))
        a1, a2 = decommit(c1, p), decommit(c2, p)
        assert [a1.evaluate(b) for b in grid] == [a2.evaluate(b) for b in grid]

    def test_marginal_uniform_by_enumeration(self, micro4):
        _, A, p = micro4
        for pt in [(2, 3), (1, 2), (0, 1)]:
            tv = commitment_hiding_tv(p, A, A, [pt])
            assert tv == 0
        from zkpcp.osat_pcp import _answer_law, constrained_space, decommit_targets
        X = constrained_space(p, decommit_targets(A, p))
        law = _answer_law(p.F, X, p.c_exps, [(2, 3)])
        assert law == {(v,): Fraction(1, 4) for v in range(4)}

    def test_hiding_all_single_queries(self, micro4):
        _, _, p = micro4
        A1, A2 = np.array([0, 0]), np.array([1, 0])
        for pt in itertools.product(range(4), repeat=2):
            assert commitment_hiding_tv(p, A1, A2, [pt]) == 0

    def test_full_grid_leaks(self, micro4):
        _, _, p = micro4
        A1, A2 = np.array([0, 0]), np.array([1, 0])
        with pytest.raises(ValueError):
            commitment_hiding_tv(p, A1, A2, [(0, 0), (0, 1)])
        assert commitment_hiding_tv(p, A1, A2, [(0, 0), (0, 1)], check_bound=False) == 1


class TestTauSummand:
    def test_partial_matches_dense(self, micro4, rng):
        _, A, p = micro4
        F = p.F
        chat = commit_witness(A, p, rng)
        tau = tuple(int(v) for v in F.random(rng, p.n_w))
        _, ev = osat_summand_tau(chat, p, tau)
        ts = TauSummand(p, tau, chat.coeffs.reshape(1, -1))
        for _ in range(15):
            spec = [int(v) for v in F.random(rng, p.M)]
            summed = sorted(rng.choice(p.M, size=int(rng.integers(0, 7)), replace=False))
            for j in summed:
                spec[j] = SUM
            pts = []
            for hs in itertools.product(p.H, repeat=len(summed)):
                x = list(spec)
                for j, h in zip(summed, hs):
                    x[j] = h
                pts.append(x)
            assert ts.partial(tuple(spec))[0] == F.vsum(ev(np.array(pts)))

    def test_honest_sum_zero(self, micro4, rng):
        _, A, p = micro4
        F = p.F
        chat = commit_witness(A, p, rng)
        grid = np.array(list(itertools.product(p.H, repeat=p.M)), dtype=np.int64)
        for _ in range(50):
            tau = tuple(int(v) for v in F.random(rng, p.n_w))
            inst_t, ev = osat_summand_tau(chat, p, tau)
            assert inst_t.gamma == 0 and F.vsum(ev(grid)) == 0
            assert TauSummand(p, tau, chat.coeffs.reshape(1, -1)).partial((SUM,) * p.M)[0] == 0

    def test_unsat_family_has_nonzero_grid_tau(self, rng):
        inst = OSatInstance(1, 1, UNSAT_CLAUSES)
        p = osat_params(inst, gf(2, e=2), (0, 1), k=1)
        taus = grid_points(p)
        for table in itertools.product(range(4), repeat=2):
            chat = commit_witness(np.array(table), p, rng)
            coeffs = chat.coeffs.reshape(1, -1)
            assert any(TauSummand(p, tuple(t), coeffs).partial((SUM,) * p.M)[0] for t in taus)

    def test_read_points(self, micro4):
        _, _, p = micro4
        x = tuple(range(p.M))
        pts = c_read_points(p, x)
        assert pts[0] == (x[1], x[7]) and pts[2] == (x[3], x[9])


class TestProver:
    def test_determinism(self, micro16):
        inst, A, p = micro16
        a, b = osat_prove(inst, A, p, 99), osat_prove(inst, A, p, 99)
        assert a.pi_C.tobytes() == b.pi_C.tobytes()
        idx = tuple(range(p.M - 1))
        tau = tuple(range(p.n_w))
        assert np.array_equal(a.pi_tau(tau).pi_sigma(idx), b.pi_tau(tau).pi_sigma(idx))
        assert np.array_equal(a.pi_tau(tau).pi_sigma(idx), a.pi_tau(tau).pi_sigma(idx))

    def test_witness_invalid(self, micro16):
        inst, _, p = micro16
        with pytest.raises(WitnessInvalid):
            osat_prove(inst, np.array([1, 1]), p, 1)

    def test_pi_C_is_chat(self, micro16, rng):
        inst, A, p = micro16
        proof = osat_prove(inst, A, p, 5)
        for _ in range(10):
            x = tuple(int(v) for v in p.F.random(rng, p.c_vars))
            assert proof.pi_C[x] == proof.chat.evaluate(x)


class TestVerifier:
    def test_balance(self, micro16):
        _, _, p = micro16
        r1, r3 = balance_reps(p)
        coins = OsatCoins.sample(p, np.random.default_rng(0))
        n = osat_view_length(p, coins)
        ldt = r1 * p.F.order
        assert (r1, r3) == (5, 1)
        assert 3 * ldt >= n and 3 * (n - ldt) >= n

    def test_completeness_sequential(self, micro16, rng):
        inst, A, p = micro16
        for seed in range(4):
            proof = osat_prove(inst, A, p, seed)
            coins = OsatCoins.sample(p, rng)
            res = osat_verify_proof(inst, p, proof, coins, allow_small_field=True)
            assert res.verdict, res.failed
            assert len(res.view.answers) == osat_view_length(p, coins)

    def test_completeness_batch(self, micro16, rng):
        _, A, p = micro16
        for _ in range(5):
            ok, _ = osat_verify_batch(p, OsatRealBatch.sample(p, A, rng, 20), OsatCoins.sample(p, rng))
            assert ok.all()

    def test_batch_matches_sequential(self, micro16, rng):
        _, _, p = micro16
        bad = np.array([1, 1])
        for seed in range(4):
            proof = osat_prove_unchecked(bad, p, seed)
            be = OsatRealBatch(p, proof.coeffs[None, :], np.array([proof.master], dtype=np.uint64))
            coins = OsatCoins.sample(p, rng)
            ok, why = osat_verify_batch(p, be, coins)
            res = osat_verify_proof(None, p, proof, coins, allow_small_field=True)
            assert (bool(ok[0]), why[0]) == (res.verdict, res.failed)

    def test_random_pi_C_fails_ldt(self, rng):
        inst, _ = osat_encode_from_3sat(PHI_SAT, r=1, s=1)
        p = osat_params(inst, gf(2, e=4), (0, 1), k=1)
        ok, why = osat_verify_batch(p, RandomProofBatch(p, rng, 200), OsatCoins.sample(p, rng, r1=1, r3=1))
        assert np.mean([w is not None and w.startswith("ldt-C") for w in why]) >= 0.9

    def test_wrong_witness_rejected(self, rng):
        inst = OSatInstance(1, 1, UNSAT_CLAUSES)
        p = osat_params(inst, gf(2, e=4), (0, 1), k=3)
        rej = []
        for _ in range(30):
            ok, _ = osat_verify_batch(p, OsatRealBatch.sample(p, np.array([1, 0]), rng, 2), OsatCoins.sample(p, rng))
            rej.append(1 - ok.mean())
        assert np.mean(rej) >= 0.5


class TestSimulator:
    def test_zero_query(self, micro16, rng):
        inst, _, p = micro16
        view = osat_simulate(inst, p, ScriptedAdversary(budget=0), rng)
        assert view.answers == []

    def test_budget_refused(self, micro16, rng):
        inst, _, p = micro16
        with pytest.raises(BudgetExceeded):
            osat_simulate(inst, p, ScriptedAdversary(budget=p.hiding_bound), rng)

    def test_reads_bounded(self, micro16, rng):
        _, _, p = micro16
        sim = OsatSimBatch(p, rng, 3)
        for i in range(p.hiding_bound - 1):
            sim.answer("pi_C", (i, 0, 0, 1))
        sim.answer("pi_C", (0, 0, 0, 1))
        with pytest.raises(BudgetExceeded):
            sim.answer("pi_C", (9, 9, 9, 9))

    def test_mixed_view_shapes(self, micro16, rng):
        inst, _, p = micro16
        tau = tuple(range(p.n_w))
        script = [("pi_C", (1, 2, 3, 4)), ("pi_sigma", (tau, tuple(range(p.M - 1)))),
                  ("pi_P", (tau, tuple(range(p.M))))]
        view = osat_simulate(inst, p, ScriptedAdversary(budget=3, script=script), rng)
        assert [len(a[2]) if isinstance(a[2], tuple) else 1 for a in view.answers] == [1, p.M + 1, p.M + 1]

    def test_honest_layers_sum_correctly(self, micro16, rng):
        """Both backends give a first layer whose H-sum is the claimed 0."""
        _, A, p = micro16
        F = p.F
        tau = tuple(int(v) for v in F.random(rng, p.n_w))
        idx = tuple(int(v) for v in F.random(rng, p.M - 2))
        for be in (OsatRealBatch.sample(p, A, rng, 50), OsatSimBatch(p, rng, 50)):
            layer = [be.answer("pi_sigma", (tau, idx + (h,)))[:, 0] for h in p.H]
            assert not F.vadd(layer[0], layer[1]).any()

    def test_hybrid_h0_h1(self, micro4):
        _, _, p = micro4
        pts = [(1, 2), (2, 3), (3, 3)]
        queriers = [
            lambda ans: pts[len(ans)] if len(ans) < 3 else None,
            lambda ans: None if len(ans) >= 3 else ((0, 0) if not ans else (ans[-1], (ans[-1] + 1) % 4)),
        ]
        assert hybrid_h0_h1_check(p, queriers)


class TestClaim:
    def test_satisfiable(self, micro4):
        inst, _, p = micro4
        rep = claim_equivalence_report(inst, p)
        assert rep.holds and rep.satisfiable and rep.witness_table is not None

    def test_unsatisfiable(self):
        inst = OSatInstance(1, 1, UNSAT_CLAUSES)
        rep = claim_equivalence_report(inst, osat_params(inst, gf(2, e=2), (0, 1), k=1))
        assert rep.holds and not rep.satisfiable and rep.witness_table is None

    def test_accept_all(self):
        inst = OSatInstance(2, 2, ())
        assert claim_equivalence_bruteforce(inst, osat_params(inst, gf(2, e=2), (0, 1), k=1))

    def test_s_too_large(self):
        inst = OSatInstance(1, 3, ())
        with pytest.raises(SearchSpaceTooLarge):
            claim_equivalence_bruteforce(inst, osat_params(inst, gf(2, e=2), (0, 1), k=1))
