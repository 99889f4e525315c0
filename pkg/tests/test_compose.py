import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zkpcp.adversary import FunctionAdversary, ScriptedAdversary, run_adversary
from zkpcp.compose import (Circuit, DistanceTargetUnreachable, EccSpec, FnOracle, LocalBudgetExceeded, LocalMap,
                           MissingAnswer, ProximityExceedsRobustness, InnerPcpp, alphabet_reduce, bits_to_int,
                           chain_maps, compile_function, compose, decision_to_circuit, derived_oracles, echo_inner,
                           ecc_generate, ecc_map, equality_circuit, identity_map, int_to_bits,
                           lifted_exact_check, lifted_hybrid_adversary, lifted_simulator, localmap_apply,
                           localmap_reads, pass_through_inner, replay, shift_pair_system)
from zkpcp.errors import BudgetExceeded

X = 2


@pytest.fixture(scope="module")
def outer():
    return shift_pair_system(5)


@pytest.fixture(scope="module")
def ecc3():
    return ecc_generate(3)


def table_proof(tab):
    return {"Pi": FnOracle("Pi", lambda i: tab[int(i)])}


class TestLocalMaps:
    def test_identity(self, outer):
        base = outer.prove(X, 1)
        assert localmap_apply(identity_map(), base, "Pi", 3) == base["Pi"].peek(3)
        assert localmap_reads(identity_map(), base, "Pi", 3) == 1

    def test_ecc_one_read_per_bit(self, outer, ecc3):
        base = outer.prove(X, 4)
        f = ecc_map(ecc3)
        for oid, j in [("blocks", 0), ("blocks", 2), ("tau", 0), ("tau", 11)]:
            assert localmap_reads(f, base, oid, ("Pi", 1, j)) == 1

    def test_budget_enforced(self, outer):
        greedy = LocalMap(lambda oid, idx, read: read("Pi", 0) + read("Pi", 1), 1, "greedy")
        with pytest.raises(LocalBudgetExceeded):
            localmap_apply(greedy, outer.prove(X, 0), "D", 0)

    def test_chain_budget_is_product(self, outer):
        two = LocalMap(lambda oid, idx, read: (read("Pi", idx), read("Pi", (idx + 1) % 5)), 2, "pair")
        # a map that reads two "pair" symbols of the intermediate proof
        top = LocalMap(lambda oid, idx, read: (read("P2", idx), read("P2", (idx + 2) % 5)), 2, "top")
        chained = chain_maps(top, two)
        assert chained.budget == 4
        base = outer.prove(X, 3)
        assert localmap_reads(chained, base, "T", 0) == 4
        sym = localmap_apply(chained, base, "T", 0)
        assert sym == ((3, 0), (2, 4))

    def test_composed_map_reads_q_out(self, outer):
        comp = compose(outer, echo_inner())
        f = comp.local_map(X)
        for c in range(5):
            base = outer.prove(X, c)
            assert [localmap_reads(f, base, "pi_in", (r, 0)) for r in range(5)] == [outer.q] * 5

    def test_pass_through_inner_reads_nothing(self, outer):
        comp = compose(outer, pass_through_inner())
        base = outer.prove(X, 0)
        assert all(localmap_reads(comp.local_map(X), base, "pi_in", (r, 0)) == 0 for r in range(5))


def chain_adversary(budget=2):
    """Reads pi_in for a coin-chosen r, then Pi at a position picked from it."""

    def step(coins, answers):
        if not answers:
            return ("pi_in", (coins, 0))
        if len(answers) == 1:
            return ("Pi", (answers[0][0] + 2) % 5)
        return None

    return FunctionAdversary(budget=budget, name="chain", step=step, coin_fn=lambda rng: int(rng.integers(5)))


class TestHybrid:
    def test_identity_transcript(self, outer):
        adv = ScriptedAdversary(budget=3, name="s", script=[("Pi", 0), ("Pi", 4), ("Pi", 2)])
        base = outer.prove(X, 2)
        direct = run_adversary(adv, base, ())
        hyb = run_adversary(lifted_hybrid_adversary(adv, identity_map()), outer.prove(X, 2), ())
        assert hyb.answers == direct.answers

    def test_ecc_single_query(self, outer, ecc3):
        adv = ScriptedAdversary(budget=1, name="one", script=[("tau", ("Pi", 2, 5))])
        hyb = lifted_hybrid_adversary(adv, ecc_map(ecc3))
        view = run_adversary(hyb, outer.prove(X, 1), ())
        assert len(view.answers) == 1 and view.answers[0][:2] == ("Pi", 2)

    def test_query_bound_product(self, outer):
        comp = compose(outer, echo_inner())
        adv = chain_adversary()
        hyb = lifted_hybrid_adversary(adv, comp.local_map(X))
        assert hyb.budget == adv.budget * outer.q
        for coins in range(5):
            view = run_adversary(hyb, outer.prove(X, 1), coins)
            assert len(view.answers) <= adv.budget * outer.q

    def test_budget_propagates(self, outer):
        adv = ScriptedAdversary(budget=1, name="over", script=[("Pi", 0), ("Pi", 1)])
        with pytest.raises(BudgetExceeded):
            run_adversary(adv, outer.prove(X, 0), ())


class TestLiftedSimulator:
    def test_identity_equals_base(self, outer):
        adv = ScriptedAdversary(budget=2, name="s", script=[("Pi", 1), ("Pi", 3)])
        for c in range(5):
            base = outer.simulate(X, adv, c, ())
            lifted = lifted_simulator(lambda a, cn: outer.simulate(X, a, c, cn), identity_map(), adv, ())
            assert lifted.answers == base.answers

    def test_replay_deterministic(self, outer):
        comp = compose(outer, echo_inner())
        f = comp.local_map(X)
        q0 = {("Pi", i): (1 + X * i) % 5 for i in range(5)}
        adv = chain_adversary()
        assert replay(adv, f, 3, q0).answers == replay(adv, f, 3, q0).answers

    def test_missing_answer(self, outer):
        adv = ScriptedAdversary(budget=1, name="s", script=[("Pi", 4)])
        with pytest.raises(MissingAnswer):
            replay(adv, identity_map(), (), {("Pi", 0): 1})

    def test_exact_composed(self, outer):
        comp = compose(outer, echo_inner())
        assert lifted_exact_check(outer, X, comp.local_map(X), lambda b: ["Pi", "pi_in"], chain_adversary(), range(5))

    def test_exact_alphabet_reduced(self, outer, ecc3):
        def step(coins, answers):
            if len(answers) == 0:
                return ("tau", ("Pi", coins, 4))
            if len(answers) == 1:
                return ("blocks", ("Pi", (coins + 1 + answers[0]) % 5, 2))
            return None

        adv = FunctionAdversary(budget=2, name="bits", step=step)
        assert lifted_exact_check(outer, X, ecc_map(ecc3), lambda b: ["blocks", "tau"], adv, range(5))

    def test_exact_check_detects_leak(self, outer):
        # a "simulator" with the wrong shift is caught by the exact comparison
        leaky = shift_pair_system(5)
        leaky.simulate = lambda x, adv, c, coins: run_adversary(adv, leaky.prove(x + 1, c), coins)
        adv = ScriptedAdversary(budget=2, name="s", script=[("Pi", 0), ("Pi", 1)])
        assert not lifted_exact_check(leaky, X, identity_map(), lambda b: ["Pi"], adv, [()])


class TestEcc:
    def test_toy_code(self):
        toy = EccSpec.from_parity([[1], [1]])
        assert toy.b == 3 and toy.distance == 2 and toy.method == "exhaustive"
        assert {toy.encode_int(v) for v in range(4)} == {(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)}

    @pytest.mark.parametrize("a", [1, 2, 3, 5, 8, 12])
    def test_generated(self, a):
        e = ecc_generate(a, seed=7)
        assert e.b == 4 * a
        assert e.relative_distance >= Fraction(1, 8)
        assert e.method == "exhaustive"
        assert not e.encode(np.zeros(a, dtype=int)).any()
        G = e.generator
        assert np.array_equal(G[:, :a], np.eye(a, dtype=int))

    def test_systematic(self, ecc3):
        for v in range(8):
            assert list(ecc3.encode_int(v)[:3]) == list(int_to_bits(v, 3))

    def test_large_a_monte_carlo(self):
        e = ecc_generate(24, seed=1)
        assert e.method == "monte-carlo" and e.b == 96

    def test_unreachable_target(self):
        with pytest.raises(DistanceTargetUnreachable) as info:
            ecc_generate(4, target=Fraction(1, 2))
        assert info.value.best is not None

    def test_bad_a(self):
        with pytest.raises(ValueError):
            ecc_generate(65)

    def test_json_roundtrip(self, ecc3):
        back = EccSpec.from_json(ecc3.to_json())
        assert np.array_equal(back.generator, ecc3.generator) and back.distance == ecc3.distance

    @given(st.integers(0, 7), st.integers(0, 7))
    def test_linear(self, u, v):
        e = ecc_generate(3)
        lhs = tuple(a ^ b for a, b in zip(e.encode_int(u), e.encode_int(v)))
        assert lhs == e.encode_int(u ^ v)


class TestAlphabetReduction:
    def test_wrong_width(self, outer):
        with pytest.raises(ValueError):
            alphabet_reduce(outer, ecc_generate(4))

    def test_query_count(self, outer, ecc3):
        ar = alphabet_reduce(outer, ecc3)
        assert ar.q == outer.q * (3 + 12)
        assert len(ar.queries(X, 0)) == ar.q

    def test_honest_accepts(self, outer, ecc3):
        ar = alphabet_reduce(outer, ecc3)
        for c in range(5):
            proof = ar.prove(X, c)
            assert all(ar.verify(X, proof, r) for r in range(5))

    def test_single_bit_flips_reject(self, outer, ecc3):
        ar = alphabet_reduce(outer, ecc3)
        honest = ar.prove(X, 2)
        for r in range(5):
            for oid, idx in ar.queries(X, r):
                flipped = {k: FnOracle(k, (lambda i, k=k, oid=oid, idx=idx:
                                           honest[k].peek(i) ^ (1 if (k, i) == (oid, idx) else 0)))
                           for k in honest}
                assert not ar.verify(X, flipped, r), (r, oid, idx)

    def test_never_increases_acceptance(self, outer, ecc3, rng):
        ar = alphabet_reduce(outer, ecc3)
        for _ in range(60):
            bits = {k: {} for k in ("blocks", "tau")}
            tab = [int(v) for v in rng.integers(0, 8, size=5)]
            honest = derived_oracles(ecc_map(ecc3), table_proof(tab), ("blocks", "tau"))
            p_flip = float(rng.uniform(0, 0.2))

            def sym(k, i, honest=honest, bits=bits, p=p_flip):
                if i not in bits[k]:
                    bits[k][i] = honest[k].peek(i) ^ int(rng.uniform() < p)
                return bits[k][i]

            cheat = {k: FnOracle(k, lambda i, k=k: sym(k, i)) for k in ("blocks", "tau")}
            acc = sum(ar.verify(X, cheat, r) for r in range(5))
            decoded = [bits_to_int([sym("blocks", ("Pi", i, j)) for j in range(3)]) for i in range(5)]
            assert acc <= sum(outer.verify(X, table_proof(decoded), r) for r in range(5))


class TestCompose:
    def test_verdict_equivalence_all_proofs(self, outer):
        comp = compose(outer, pass_through_inner())
        f = comp.local_map(X)
        for tab in itertools.product(range(8), repeat=5):
            base = table_proof(tab)
            derived = {"Pi": base["Pi"], "pi_in": FnOracle("pi_in", lambda idx: localmap_apply(f, base, "pi_in", idx))}
            for r in range(5):
                assert comp.verify(X, derived, (r, 0)) == outer.verify(X, base, r)

    def test_query_counts(self, outer):
        assert compose(outer, pass_through_inner()).q == outer.q
        assert compose(outer, echo_inner()).q == 2

    def test_completeness(self, outer):
        for inner in (pass_through_inner(), echo_inner()):
            comp = compose(outer, inner)
            for c in range(5):
                proof = comp.prove(X, c)
                assert all(comp.verify(X, proof, co) for co in comp.coins(X))

    def test_echo_soundness_matches_outer(self, outer):
        comp = compose(outer, echo_inner())
        bad = comp.prove(X + 1, 0)  # proof for the wrong shift
        assert not any(comp.verify(X, bad, co) for co in comp.coins(X))

    def test_proximity_check(self, outer):
        inner = pass_through_inner()
        inner.delta = Fraction(3, 4)
        with pytest.raises(ProximityExceedsRobustness):
            compose(outer, inner)

    def test_sample_coins(self, outer, rng):
        comp = compose(outer, echo_inner())
        for _ in range(20):
            assert comp.sample(rng) in comp.coins(X)

    def test_custom_inner_interface(self, outer):
        # inner that only checks the first input position is in range: weaker, never stronger, than outer
        inner = InnerPcpp("lax", lambda c, read, n: (lambda i: None), lambda n, r: [("input", 0)],
                          lambda c, ans, r: ans[0] < 5, lambda n: [0])
        comp = compose(outer, inner)
        assert comp.q == 1 and comp.verify(X, comp.prove(X, 1), (0, 0))


class TestCircuits:
    @pytest.mark.parametrize("n", [1, 3, 4])
    def test_equality(self, n):
        c = equality_circuit(n)
        X_ = np.array(list(itertools.product((0, 1), repeat=2 * n)))
        want = (X_[:, :n] == X_[:, n:]).all(axis=1)
        assert np.array_equal(c.evaluate(X_), want)
        assert {op for op, _ in c.gates} <= {"XOR", "OR", "NOT"}

    def test_decision_agreement(self, outer):
        for r in range(5):
            c = decision_to_circuit(outer.decide, X, r, 2, 3)
            for a, b in itertools.product(range(8), repeat=2):
                bits = list(int_to_bits(a, 3)) + list(int_to_bits(b, 3))
                assert c.evaluate(bits) == outer.decide(X, [a, b], r)

    def test_restriction_hardwires(self, outer):
        # full circuit over (x bits, answer bits); restricting x reproduces the fixed-x circuit
        def full(bits):
            x = bits_to_int(bits[:3])
            return x < 5 and outer.decide(x, [bits_to_int(bits[3:6]), bits_to_int(bits[6:9])], 0)

        big = compile_function(full, 9)
        X_ = np.array(list(itertools.product((0, 1), repeat=6)))
        for x in range(5):
            small = big.restrict(dict(enumerate(int(b) for b in int_to_bits(x, 3))))
            assert small.n_inputs == 6
            want = decision_to_circuit(outer.decide, x, 0, 2, 3).evaluate(X_)
            assert np.array_equal(small.evaluate(X_), want)

    def test_sixteen_inputs(self):
        fn = lambda b: (bits_to_int(b[:8]) * 3 + 1) % 7 == bits_to_int(b[8:]) % 7  # noqa: E731
        c = compile_function(fn, 16)
        X_ = np.array(list(itertools.product((0, 1), repeat=16)), dtype=bool)
        want = np.array([fn(tuple(int(v) for v in row)) for row in X_])
        assert np.array_equal(c.evaluate(X_), want)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.booleans(), min_size=2 ** n,
                                                                              max_size=2 ** n))),
           st.data())
    def test_compile_and_restrict(self, nt, data):
        n, table = nt
        fn = lambda b: table[bits_to_int(b)]  # noqa: E731
        c = compile_function(fn, n)
        rows = list(itertools.product((0, 1), repeat=n))
        assert [bool(c.evaluate(list(r))) for r in rows] == table
        fixed = data.draw(st.dictionaries(st.integers(0, n - 1), st.integers(0, 1)))
        rc = c.restrict(fixed)
        free = [j for j in range(n) if j not in fixed]
        for r in itertools.product((0, 1), repeat=len(free)):
            full = [0] * n
            for j, v in fixed.items():
                full[j] = v
            for j, v in zip(free, r):
                full[j] = v
            got = rc.evaluate(np.array([r], dtype=bool).reshape(1, len(free)))[0]
            assert bool(got) == table[bits_to_int(full)]

    def test_unknown_gate(self):
        c = Circuit(1, [("NAND", (0, 0))], 1)
        with pytest.raises(ValueError):
            c.evaluate([1])
