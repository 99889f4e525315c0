"""Adapters presenting the Oracle-3SAT proof system as a PcpSystem.

The flattened system addresses every field element of a vector symbol
separately, so its alphabet is one field element written in bits; it is
1-locally computable from the native proof, and its simulator is the
native simulator lifted through that map.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..adversary import run_adversary
from ..compose import FnOracle, LocalMap, PcpSystem, lifted_simulator
from ..osat_pcp import (OSatParams, OsatCoins, OsatSimBatch, backend_oracles, osat_decide, osat_prove_unchecked,
                        osat_query_list)


def field_bits(params: OSatParams) -> int:
    return max(1, math.ceil(math.log2(params.F.order)))


def flatten_map(params: OSatParams) -> LocalMap:
    """("pi_C", point) passes through; (oid, ((tau, x), j)) is coordinate j
    of the native symbol at (tau, x).  One native read per symbol."""

    def fn(oid, idx, read):
        if oid == "pi_C":
            return int(read("pi_C", idx))
        (tau, x), j = idx
        return int(np.asarray(read(oid, (tau, x))).reshape(-1)[j])

    return LocalMap(fn, 1, "flatten")


def flat_queries(params: OSatParams, coins: OsatCoins) -> list[tuple]:
    out = []
    width = params.M + 1
    for oid, idx in osat_query_list(params, coins):
        if oid == "pi_C":
            out.append((oid, idx))
        else:
            out += [(oid, (idx, j)) for j in range(width)]
    return out


def unflatten(params: OSatParams, coins: OsatCoins, answers) -> list:
    width = params.M + 1
    out, pos = [], 0
    for oid, _ in osat_query_list(params, coins):
        if oid == "pi_C":
            out.append(int(answers[pos]))
            pos += 1
        else:
            out.append(tuple(int(v) for v in answers[pos:pos + width]))
            pos += width
    return out


def native_proof_oracles(params: OSatParams, witness, seed: int) -> dict:
    proof = osat_prove_unchecked(witness, params, seed)
    handles = proof.oracles()
    cache: dict = {}

    def sym(oid, idx):
        key = (oid, repr(idx))
        if key not in cache:
            cache[key] = handles[oid].peek(idx)
        return cache[key]

    return {oid: FnOracle(oid, lambda idx, oid=oid: sym(oid, idx)) for oid in handles}


def osat_pcp_system(params: OSatParams, witness) -> PcpSystem:
    """Flattened Oracle-3SAT PZK-PCP.  ``witness`` is the oracle table the
    prover commits to (a wrong one gives the wrong-witness forgery).  The
    prover randomness is an integer seed; coins are OsatCoins."""
    f = flatten_map(params)

    def prove(x, seed):
        native = native_proof_oracles(params, witness, int(seed))
        return {oid: FnOracle(oid, lambda idx, oid=oid: f.fn(oid, idx, lambda o, i: native[o].query(i)))
                for oid in native}

    def decide(x, answers, coins):
        return osat_decide(params, unflatten(params, coins, answers), coins) is None

    def simulate(x, adversary, seed, coins):
        def sim0(adv, cn):
            backend = OsatSimBatch(params, np.random.default_rng(int(seed)), 1)
            return run_adversary(adv, backend_oracles(params, backend), cn)

        return lifted_simulator(sim0, f, adversary, coins)

    def coins(x):
        raise ValueError("Oracle-3SAT coins are sampled, not enumerated")

    n_queries = len(flat_queries(params, OsatCoins.sample(params, np.random.default_rng(0))))
    sys = PcpSystem("oracle-3sat", prove, lambda x, c: flat_queries(params, c), decide, coins, n_queries,
                    field_bits(params), Fraction(0), Fraction(0), params.hiding_bound - 1, None, simulate,
                    lambda rng: OsatCoins.sample(params, rng))
    sys.params.update(stage_parameters(params))
    return sys


def osat_randomness_elements(params: OSatParams) -> int:
    """Field elements in one OsatCoins draw: a point and a direction per
    line, tau and the sumcheck coins per repetition."""
    coins = OsatCoins.sample(params, np.random.default_rng(0))
    total = 2 * params.c_vars * len(coins.ldt_lines)
    for tau, zc in coins.reps:
        total += len(tau) + len(zc.c) + 2 * params.M * (len(zc.f_lines) + len(zc.p_lines))
    return total


def stage_parameters(params: OSatParams) -> dict:
    coins = OsatCoins.sample(params, np.random.default_rng(0))
    r1, r3 = len(coins.ldt_lines), len(coins.reps)
    return {
        "field": params.F.order, "H": list(params.H), "k": params.k, "M": params.M, "n_w": params.n_w,
        "c_vars": params.c_vars, "ldt_lines": r1, "sumcheck_reps": r3,
        "queries_native": len(osat_query_list(params, coins)),
        "queries_flat": len(flat_queries(params, coins)),
        "randomness_bits": osat_randomness_elements(params) * field_bits(params),
        "alphabet_bits": field_bits(params), "query_bound": params.hiding_bound - 1,
    }
