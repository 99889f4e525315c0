"""Locally computable proofs, ZK lifting, alphabet reduction and composition.

A ``PcpSystem`` is a non-adaptive verifier given by a query algorithm and a
decision predicate, plus a prover and (optionally) a simulator.  Derived
systems (alphabet-reduced, composed) hold proofs that are locally computable
from a base proof; a ``LocalMap`` computes one derived symbol with a counted
number of base reads, which is what lifts a base simulator to the derived
system.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .adversary import Adversary
from .errors import BudgetExceeded, ZkpcpError
from .oracles import VerifierView


class LocalBudgetExceeded(ZkpcpError, RuntimeError):
    """A local map read more base symbols than its budget (a bug)."""


class MissingAnswer(ZkpcpError, KeyError):
    """Replay needed a base answer the simulator never produced (a bug)."""


class ProximityExceedsRobustness(ZkpcpError, ValueError):
    pass


class DistanceTargetUnreachable(ZkpcpError, ValueError):
    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


# --- oracles over arbitrary index sets ------------------------------------

class FnOracle:
    """A proof oracle given by a function of the index; counts its reads."""

    def __init__(self, oid: str, fn: Callable, budget: int | None = None):
        self.id = oid
        self.fn = fn
        self.budget = budget
        self.served = 0

    def query(self, idx):
        if self.budget is not None and self.served >= self.budget:
            raise BudgetExceeded(f"oracle {self.id!r}: budget {self.budget} exhausted")
        self.served += 1
        return self.fn(idx)

    peek = lambda self, idx: self.fn(idx)  # noqa: E731


def read_all(oracles: Mapping, queries: Sequence[tuple]) -> list:
    return [oracles[oid].query(idx) for oid, idx in queries]


# --- systems ------------------------------------------------------------

@dataclass
class PcpSystem:
    """Prover ``prove(x, rand) -> {oid: FnOracle}``; verifier
    ``queries(x, r)`` and ``decide(x, answers, r)``; ``coins`` enumerates the
    verifier randomness (micro systems) and ``prover_space`` the prover's.
    ``simulate(x, adversary, rand, coins)`` returns a VerifierView."""
    name: str
    prove: Callable
    queries: Callable
    decide: Callable
    coins: Callable[[Any], Iterable]
    q: int
    alphabet_bits: int | None = None
    rho: Fraction = Fraction(0)
    delta: Fraction = Fraction(0)
    q_star: int | None = None
    prover_space: Callable[[Any], Iterable] | None = None
    simulate: Callable | None = None
    sample_coins: Callable | None = None
    params: dict = field(default_factory=dict)
    circuit_cache: dict = field(default_factory=dict, repr=False)

    def verify(self, x, oracles: Mapping, r) -> bool:
        return bool(self.decide(x, read_all(oracles, self.queries(x, r)), r))

    def sample(self, rng: np.random.Generator):
        if self.sample_coins is not None:
            return self.sample_coins(rng)
        coins = list(self.coins(None))
        return coins[int(rng.integers(len(coins)))]


def shift_pair_system(q: int = 5) -> PcpSystem:
    """Micro outer system over GF(q), q prime.  Input x in GF(q); the
    proof is a table Pi on GF(q) with honest Pi(i) = c + x*i for a uniform c.
    Coins r in GF(q): read Pi(r) and Pi(r+1), accept iff they differ by x.
    Symbols are written in ceil(log2 q) bits; an out-of-range symbol rejects.
    The simulator samples its own c, so it is perfect for any query count."""
    bits = max(1, (q - 1).bit_length())

    def prove(x, c):
        return {"Pi": FnOracle("Pi", lambda i: (c + x * int(i)) % q)}

    def queries(x, r):
        return [("Pi", r % q), ("Pi", (r + 1) % q)]

    def decide(x, answers, r):
        a, b = (int(v) for v in answers)
        return a < q and b < q and (b - a) % q == x % q

    def simulate(x, adversary, c, coins):
        from .adversary import run_adversary
        return run_adversary(adversary, prove(x, c), coins)

    return PcpSystem("shift-pair", prove, queries, decide, lambda x: range(q), 2, bits, Fraction(1, 2),
                     Fraction(0), None, lambda x: range(q), simulate, params={"q": q})


# --- local maps -------------------------------------------------------------

@dataclass
class LocalMap:
    """``fn(oid, idx, read)`` computes a derived symbol; ``read(base_oid,
    base_idx)`` is the only access to the base proof."""
    fn: Callable
    budget: int
    name: str = "map"


def localmap_apply(f: LocalMap, base: Mapping, oid: str, idx):
    """One derived symbol, with the per-invocation read budget asserted."""
    used = [0]

    def read(boid, bidx):
        used[0] += 1
        if used[0] > f.budget:
            raise LocalBudgetExceeded(f"{f.name}: more than {f.budget} base reads for {oid}{idx}")
        return base[boid].query(bidx)

    return f.fn(oid, idx, read)


def localmap_reads(f: LocalMap, base: Mapping, oid: str, idx) -> int:
    """How many base reads one invocation makes."""
    counter = {k: FnOracle(k, v.peek if hasattr(v, "peek") else v.query) for k, v in base.items()}
    localmap_apply(f, counter, oid, idx)
    return sum(o.served for o in counter.values())


def identity_map() -> LocalMap:
    return LocalMap(lambda oid, idx, read: read(oid, idx), 1, "identity")


def chain_maps(outer: LocalMap, inner: LocalMap) -> LocalMap:
    """Symbols of ``outer`` computed from a proof that is itself derived
    through ``inner``: budget multiplies."""

    def fn(oid, idx, read):
        return outer.fn(oid, idx, lambda o, i: inner.fn(o, i, read))

    return LocalMap(fn, outer.budget * inner.budget, f"{outer.name}*{inner.name}")


def derived_oracles(f: LocalMap, base: Mapping, oids: Iterable[str]) -> dict[str, FnOracle]:
    return {oid: FnOracle(oid, lambda idx, oid=oid: localmap_apply(f, base, oid, idx)) for oid in oids}


# --- lifting adversaries and simulators ---------------------------------------

class _NeedRead(Exception):
    def __init__(self, query):
        self.query = query


@dataclass
class HybridAdversary(Adversary):
    """Runs V* against the derived proof, computing each derived answer
    through ``f`` from base reads; as a base adversary it issues those reads.
    Pure in (coins, base answers): the run is replayed from the start."""
    vstar: Adversary | None = None
    f: LocalMap | None = None

    def sample_coins(self, rng):
        return self.vstar.sample_coins(rng)

    def _replay(self, coins, base_answers: list):
        pos = [0]
        issued: list = []

        def read(boid, bidx):
            if pos[0] < len(base_answers):
                issued.append((boid, bidx))
                pos[0] += 1
                return base_answers[pos[0] - 1]
            raise _NeedRead((boid, bidx))

        derived: list = []
        while True:
            q = self.vstar.next_query(coins, derived)
            if q is None:
                return None, derived
            derived.append(self.f.fn(q[0], q[1], read))

    def next_query(self, coins, answers):
        try:
            self._replay(coins, answers)
        except _NeedRead as need:
            return need.query
        return None

    def derived_view(self, coins, base_answers) -> list:
        return self._replay(coins, base_answers)[1]


def lifted_hybrid_adversary(vstar: Adversary, f: LocalMap) -> HybridAdversary:
    return HybridAdversary(budget=vstar.budget * f.budget, name=f"hybrid({vstar.name})", vstar=vstar, f=f)


def replay(vstar: Adversary, f: LocalMap, coins, q0: Mapping) -> VerifierView:
    """Run V* answering every derived query through f from the base answer
    set q0 ((oid, idx) -> symbol)."""

    def read(boid, bidx):
        key = (boid, _key(bidx))
        if key not in q0:
            raise MissingAnswer(f"base answer {key} was never produced")
        return q0[key]

    answers: list = []
    records: list = []
    while True:
        q = vstar.next_query(coins, answers)
        if q is None:
            return VerifierView(coins, records)
        if len(answers) >= vstar.budget:
            raise BudgetExceeded(f"{vstar.name}: query {len(answers) + 1} exceeds budget {vstar.budget}")
        sym = f.fn(q[0], q[1], read)
        answers.append(sym)
        records.append((q[0], q[1], sym))


def _key(idx):
    if isinstance(idx, np.ndarray):
        return tuple(idx.tolist())
    if isinstance(idx, (list, tuple)):
        return tuple(_key(v) for v in idx)
    return idx


def lifted_simulator(sim0: Callable[[Adversary, Any], VerifierView], f: LocalMap, vstar: Adversary,
                     coins) -> VerifierView:
    """``sim0(adversary, coins)`` simulates the base system; run it on the
    hybrid adversary, then replay V* from the base answers it produced."""
    hybrid = lifted_hybrid_adversary(vstar, f)
    base_view = sim0(hybrid, coins)
    q0 = {(oid, _key(idx)): sym for oid, idx, sym in base_view.answers}
    return replay(vstar, f, coins, q0)


def real_derived_view(f: LocalMap, base: Mapping, vstar: Adversary, coins, oids: Iterable[str]) -> VerifierView:
    from .adversary import run_adversary
    return run_adversary(vstar, derived_oracles(f, base, oids), coins)


def view_law(views: Iterable[tuple[Fraction, VerifierView]]) -> dict:
    out: dict = {}
    for w, v in views:
        k = tuple((o, _key(i), _key(s)) for o, i, s in v.answers)
        out[k] = out.get(k, Fraction(0)) + w
    return out


def lifted_exact_check(system: PcpSystem, x, f: LocalMap, derive: Callable[[Mapping], Mapping],
                       vstar: Adversary, coins_list: Sequence) -> bool:
    """Exact equality of the real derived view law (over all prover
    randomness) and the lifted simulator's law (over all simulator
    randomness), for each adversary coin value."""
    rands = list(system.prover_space(x))
    w = Fraction(1, len(rands))
    for coins in coins_list:
        real = view_law((w, real_derived_view(f, system.prove(x, c), vstar, coins, derive(system.prove(x, c))))
                        for c in rands)
        sim = view_law((w, lifted_simulator(lambda adv, cn, c=c: system.simulate(x, adv, c, cn), f, vstar, coins))
                       for c in rands)
        if real != sim:
            return False
    return True


# --- error-correcting codes --------------------------------------------------

@dataclass
class EccSpec:
    a: int
    b: int
    parity: np.ndarray          # (a, b - a) bits
    distance: int
    method: str                 # "exhaustive" or "monte-carlo"
    seed: int | None = None

    @classmethod
    def from_parity(cls, P, seed=None) -> "EccSpec":
        P = np.asarray(P, dtype=np.int64) & 1
        a = P.shape[0]
        spec = cls(a, a + P.shape[1], P, 0, "", seed)
        spec.distance, spec.method = measure_distance(spec)
        return spec

    @property
    def generator(self) -> np.ndarray:
        return np.concatenate([np.eye(self.a, dtype=np.int64), self.parity], axis=1)

    def encode(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64) & 1
        return (bits @ self.generator) & 1

    def encode_int(self, v: int) -> tuple[int, ...]:
        if self.a <= 16:
            table = self.__dict__.get("_table")
            if table is None:
                msgs = (np.arange(1 << self.a)[:, None] >> np.arange(self.a - 1, -1, -1)) & 1
                table = self.__dict__["_table"] = [tuple(int(t) for t in row) for row in self.encode(msgs)]
            return table[int(v)]
        return tuple(int(t) for t in self.encode(int_to_bits(v, self.a)))

    @property
    def relative_distance(self) -> Fraction:
        return Fraction(self.distance, self.b)

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "generator": self.generator.reshape(-1).tolist(),
                "distance": self.distance, "method": self.method, "seed": self.seed}

    @classmethod
    def from_json(cls, obj) -> "EccSpec":
        G = np.array(obj["generator"], dtype=np.int64).reshape(obj["a"], obj["b"])
        return cls(obj["a"], obj["b"], G[:, obj["a"]:], obj["distance"], obj["method"], obj.get("seed"))


def int_to_bits(v: int, n: int) -> np.ndarray:
    return np.array([(int(v) >> (n - 1 - j)) & 1 for j in range(n)], dtype=np.int64)


def bits_to_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | (int(b) & 1)
    return out


def measure_distance(spec: EccSpec, samples: int = 1 << 16, rng=None) -> tuple[int, str]:
    """Minimum weight of a nonzero codeword: exhaustive for a <= 20, else
    the minimum over random messages (an upper bound on the distance)."""
    G = spec.generator
    rows = [int("".join(map(str, r)), 2) for r in G]
    if spec.a <= 20:
        best = spec.b
        cw = 0
        for i in range(1, 1 << spec.a):
            cw ^= rows[(i & -i).bit_length() - 1]  # Gray-code step
            best = min(best, bin(cw).count("1"))
        return best, "exhaustive"
    rng = rng if rng is not None else np.random.default_rng(0)
    msgs = rng.integers(0, 2, size=(samples, spec.a))
    msgs = msgs[msgs.any(axis=1)]
    return int(((msgs @ G) & 1).sum(axis=1).min()), "monte-carlo"


def ecc_generate(a: int, seed: int = 0, target: Fraction = Fraction(1, 8)) -> EccSpec:
    """Systematic [I | P] code with b = 4a and P pseudorandom from the seed;
    retried with the next seed until the relative distance reaches target."""
    if not 1 <= a <= 64:
        raise ValueError("a must lie in 1..64")
    best = None
    for s in range(seed, seed + 64):
        P = np.random.default_rng(s).integers(0, 2, size=(a, 3 * a))
        spec = EccSpec.from_parity(P, seed=s)
        if best is None or spec.distance > best.distance:
            best = spec
        if spec.relative_distance >= target:
            return spec
    raise DistanceTargetUnreachable(f"no code with relative distance {target} in 64 seeds", best)


# --- alphabet reduction -----------------------------------------------------

def ecc_map(ecc: EccSpec) -> LocalMap:
    """Bits of the reduced proof: ("blocks", (oid, idx, j)) is bit j of the
    base symbol, ("tau", (oid, idx, j)) bit j of its encoding.  One base read."""

    def fn(oid, idx, read):
        base_oid, base_idx, j = idx
        sym = int(read(base_oid, base_idx))
        if oid == "blocks":
            return (sym >> (ecc.a - 1 - j)) & 1
        return int(ecc.encode_int(sym)[j])

    return LocalMap(fn, 1, "ecc")


def alphabet_reduce(sys: PcpSystem, ecc: EccSpec) -> PcpSystem:
    """Binary-alphabet system: for every base query read the a bits of the
    block and the b bits of tau, run the base decision on the blocks and
    check tau equals the encoding of each block."""
    if sys.alphabet_bits != ecc.a:
        raise ValueError(f"base alphabet has {sys.alphabet_bits} bits, code expects {ecc.a}")
    f = ecc_map(ecc)
    a, b = ecc.a, ecc.b

    def prove(x, rand):
        base = sys.prove(x, rand)
        return derived_oracles(f, base, ("blocks", "tau"))

    def queries(x, r):
        out = []
        for oid, idx in sys.queries(x, r):
            out += [("blocks", (oid, idx, j)) for j in range(a)]
            out += [("tau", (oid, idx, j)) for j in range(b)]
        return out

    def decide(x, answers, r):
        blocks = []
        per = a + b
        for t in range(len(answers) // per):
            chunk = [int(v) for v in answers[t * per:(t + 1) * per]]
            sym = bits_to_int(chunk[:a])
            if tuple(chunk[a:]) != ecc.encode_int(sym):
                return False
            blocks.append(sym)
        return bool(sys.decide(x, blocks, r))

    def simulate(x, adversary, rand, coins):
        return lifted_simulator(lambda adv, cn: sys.simulate(x, adv, rand, cn), f, adversary, coins)

    return PcpSystem(f"ecc({sys.name})", prove, queries, decide, sys.coins, sys.q * (a + b), 1, sys.rho,
                     sys.delta, None if sys.q_star is None else sys.q_star, sys.prover_space, simulate,
                     sys.sample_coins, {"base": sys.name, "a": a, "b": b, "ecc_distance": ecc.distance})


# --- circuits -----------------------------------------------------------------

@dataclass
class Circuit:
    """Straight-line circuit over AND/OR/NOT/XOR.  Wires 0..n_inputs-1 are
    inputs; gate g writes wire n_inputs + g.  ``consts`` maps wire -> bit."""
    n_inputs: int
    gates: list = field(default_factory=list)   # (op, (wire, ...))
    output: int = 0
    consts: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.gates)

    def _add(self, op, *args) -> int:
        self.gates.append((op, tuple(args)))
        return self.n_inputs + len(self.gates) - 1

    def const(self, bit: int) -> int:
        for w, v in self.consts.items():
            if v == bit:
                return w
        w = self._add("CONST", int(bit))
        self.consts[w] = int(bit)
        return w

    def evaluate(self, bits) -> np.ndarray:
        """(N, n_inputs) bits -> (N,) bools; a 1-d input gives a scalar."""
        X = np.atleast_2d(np.asarray(bits, dtype=bool))
        wires = [X[:, j] for j in range(self.n_inputs)]
        for op, args in self.gates:
            if op == "CONST":
                wires.append(np.full(len(X), bool(args[0])))
            elif op == "NOT":
                wires.append(~wires[args[0]])
            elif op == "AND":
                wires.append(wires[args[0]] & wires[args[1]])
            elif op == "OR":
                wires.append(wires[args[0]] | wires[args[1]])
            elif op == "XOR":
                wires.append(wires[args[0]] ^ wires[args[1]])
            else:
                raise ValueError(f"unknown gate {op}")
        out = wires[self.output]
        return bool(out[0]) if np.asarray(bits).ndim == 1 else out

    def restrict(self, fixed: Mapping[int, int]) -> "Circuit":
        """Hard-wire the inputs in ``fixed``; the rest are renumbered in order."""
        free = [j for j in range(self.n_inputs) if j not in fixed]
        out = Circuit(len(free))
        wire: dict[int, int] = {}
        known: dict[int, int] = {}
        for new, j in enumerate(free):
            wire[j] = new
        for j, v in fixed.items():
            known[j] = int(v) & 1
        for g, (op, args) in enumerate(self.gates):
            w = self.n_inputs + g
            if op == "CONST":
                known[w] = args[0]
                continue
            vals = [known.get(a) for a in args]
            if all(v is not None for v in vals):
                known[w] = {"NOT": lambda v: 1 - v[0], "AND": lambda v: v[0] & v[1],
                            "OR": lambda v: v[0] | v[1], "XOR": lambda v: v[0] ^ v[1]}[op](vals)
                continue
            if op == "NOT":
                wire[w] = out._add("NOT", wire[args[0]])
                continue
            live = [wire[a] for a, v in zip(args, vals) if v is None]
            c = next((v for v in vals if v is not None), None)
            if c is None:
                wire[w] = out._add(op, *live)
            elif op == "AND":
                if c:
                    wire[w] = live[0]
                else:
                    known[w] = 0
            elif op == "OR":
                if c:
                    known[w] = 1
                else:
                    wire[w] = live[0]
            else:
                wire[w] = out._add("NOT", live[0]) if c else live[0]
        if self.output in known:
            out.output = out.const(known[self.output])
        else:
            out.output = wire[self.output]
        return out


def compile_function(fn: Callable[[tuple], bool], n: int) -> Circuit:
    """Circuit for a boolean function of n bits by Shannon expansion on the
    first variable, sharing equal subfunctions (a reduced decision diagram
    written as mux gates)."""
    if n > 20:
        raise ValueError("compile_function enumerates 2^n inputs; n must be <= 20")
    table = np.array([bool(fn(bits)) for bits in itertools.product((0, 1), repeat=n)], dtype=bool)
    c = Circuit(n)
    memo: dict = {}
    nots: dict[int, int] = {}

    def build(tt: np.ndarray, var: int) -> int:
        key = (var, tt.tobytes())
        if key in memo:
            return memo[key]
        if not tt.any() or tt.all():
            w = c.const(int(tt[0]))
        else:
            half = len(tt) // 2
            lo, hi = tt[:half], tt[half:]
            if np.array_equal(lo, hi):
                w = build(lo, var + 1)
            else:
                wl, wh = build(lo, var + 1), build(hi, var + 1)
                if var not in nots:
                    nots[var] = c._add("NOT", var)
                w = c._add("OR", c._add("AND", var, wh), c._add("AND", nots[var], wl))
        memo[key] = w
        return w

    c.output = build(table, 0)
    return c


def equality_circuit(nbits: int) -> Circuit:
    """Inputs (u, v) of nbits each; output 1 iff u == v: XOR per bit, OR
    tree, NOT (a NOR of the XORs)."""
    c = Circuit(2 * nbits)
    xs = [c._add("XOR", j, nbits + j) for j in range(nbits)]
    while len(xs) > 1:
        nxt = [c._add("OR", xs[i], xs[i + 1]) for i in range(0, len(xs) - 1, 2)]
        if len(xs) % 2:
            nxt.append(xs[-1])
        xs = nxt
    c.output = c._add("NOT", xs[0])
    return c


def answers_to_bits(answers: Sequence[int], width: int) -> tuple[int, ...]:
    out: list[int] = []
    for a in answers:
        out += [int(b) for b in int_to_bits(int(a), width)]
    return tuple(out)


def decision_to_circuit(D: Callable, x, r, q: int, width: int) -> Circuit:
    """The decision at fixed (x, r) as a circuit over the q*width answer bits."""

    def fn(bits):
        answers = [bits_to_int(bits[i * width:(i + 1) * width]) for i in range(q)]
        return D(x, answers, r)

    return compile_function(fn, q * width)


@dataclass
class OpaqueCircuit:
    """A decision too large to compile, used through the same interface."""
    fn: Callable[[Sequence], bool]
    size: int = 0

    def evaluate_answers(self, answers) -> bool:
        return bool(self.fn(answers))


def restricted_decision(outer: PcpSystem, x, r, compile_limit: int = 16):
    """C_out,r: compiled when the answer bits are few, else opaque."""
    cache = outer.circuit_cache
    key = (repr(x), repr(r))
    if key in cache:
        return cache[key]
    if outer.alphabet_bits is not None and outer.q * outer.alphabet_bits <= compile_limit:
        width, n = outer.alphabet_bits, outer.q * outer.alphabet_bits
        circ = decision_to_circuit(outer.decide, x, r, outer.q, width)
        table = circ.evaluate(np.array(list(itertools.product((0, 1), repeat=n))))
        out = OpaqueCircuit(lambda ans: bool(table[bits_to_int(answers_to_bits(ans, width))]), circ.size)
        out.circuit = circ
    else:
        out = OpaqueCircuit(lambda ans: outer.decide(x, list(ans), r))
    if len(cache) > 4096:
        cache.clear()
    cache[key] = out
    return out


# --- inner verifiers and composition ----------------------------------------------

@dataclass
class InnerPcpp:
    """Inner proof of proximity for "the input oracle satisfies circuit C".
    ``prove(circuit, input_read, q_in)`` returns a proof function
    idx -> symbol that reads the input through ``input_read``;
    ``queries(q_in, r_in)`` lists ("input", j) / ("proof", idx);
    ``decide(circuit, answers, r_in)``."""
    name: str
    prove: Callable
    queries: Callable
    decide: Callable
    coins: Callable[[int], Iterable]
    delta: Fraction = Fraction(0)
    proof_reads: Callable[[int], int] = lambda q_in: 0


def pass_through_inner() -> InnerPcpp:
    """Reads the whole input view, has an empty proof, evaluates C."""
    return InnerPcpp("pass-through", lambda circ, read, n: (lambda idx: None),
                     lambda n, r_in: [("input", j) for j in range(n)],
                     lambda circ, answers, r_in: circ.evaluate_answers(answers),
                     lambda n: [0])


def echo_inner() -> InnerPcpp:
    """Proof: one symbol holding the whole input view (q_out input reads to
    materialize).  Verifier: reads it and one input position r_in, accepts
    iff C accepts the symbol and it agrees with the input there."""

    def prove(circ, read, n):
        return lambda idx: tuple(read(j) for j in range(n))

    def decide(circ, answers, r_in):
        sym, inp = answers
        return bool(circ.evaluate_answers(sym)) and sym[r_in] == inp

    return InnerPcpp("echo", prove, lambda n, r_in: [("proof", 0), ("input", r_in)], decide,
                     lambda n: range(n), Fraction(0), lambda n: n)


def compose(outer: PcpSystem, inner: InnerPcpp) -> PcpSystem:
    """Composed system: proof (outer oracles, pi_in) with pi_in(r, idx) the
    inner proof for C_out,r, materialized lazily from the outer proof;
    coins (r_out, r_in)."""
    if inner.delta > outer.rho:
        raise ProximityExceedsRobustness(f"inner proximity {inner.delta} exceeds outer robustness {outer.rho}")
    q_out = outer.q

    def local_map(x) -> LocalMap:
        def fn(oid, idx, read):
            if oid != "pi_in":
                return read(oid, idx)
            r, inner_idx = idx
            qs = outer.queries(x, r)
            circ = restricted_decision(outer, x, r)
            return inner.prove(circ, lambda j: read(*qs[j]), q_out)(inner_idx)

        return LocalMap(fn, max(1, q_out), "compose")

    def prove(x, rand):
        base = outer.prove(x, rand)
        f = local_map(x)
        return {**{oid: FnOracle(oid, lambda i, oid=oid: base[oid].query(i)) for oid in base},
                "pi_in": FnOracle("pi_in", lambda idx: localmap_apply(f, base, "pi_in", idx))}

    def queries(x, coins):
        r, r_in = coins
        qs = outer.queries(x, r)
        out = []
        for kind, j in inner.queries(q_out, r_in):
            out.append(qs[j] if kind == "input" else ("pi_in", (r, j)))
        return out

    def decide(x, answers, coins):
        r, r_in = coins
        return inner.decide(restricted_decision(outer, x, r), answers, r_in)

    def coins(x):
        return [(r, r_in) for r in outer.coins(x) for r_in in inner.coins(q_out)]

    def sample(rng):
        r = outer.sample(rng)
        inner_coins = list(inner.coins(q_out))
        return (r, inner_coins[int(rng.integers(len(inner_coins)))])

    def simulate(x, adversary, rand, adv_coins):
        return lifted_simulator(lambda adv, cn: outer.simulate(x, adv, rand, cn), local_map(x), adversary,
                                adv_coins)

    n_inner = len(inner.queries(q_out, next(iter(inner.coins(q_out)))))
    sys = PcpSystem(f"{outer.name}∘{inner.name}", prove, queries, decide, coins, n_inner, outer.alphabet_bits,
                    Fraction(0), Fraction(0), None, outer.prover_space, simulate, sample,
                    {"outer": outer.name, "inner": inner.name, "q_out": q_out, "q_composed": n_inner,
                     "local_budget": max(1, q_out)})
    sys.local_map = local_map
    return sys
