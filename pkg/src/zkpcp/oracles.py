"""Queryable proof and input oracles, transcripts, views and view distances."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, OutOfDomain, SearchSpaceTooLarge, ZkpcpError


class DuplicateId(ZkpcpError, ValueError):
    pass


class LengthMismatch(ZkpcpError, ValueError):
    pass


@dataclass(frozen=True)
class Domain:
    """A product grid F^m (``size`` = field order), an index range, or a
    family of grids: pairs (tag in F^m, point in F^inner)."""
    kind: str  # "grid" | "range" | "family"
    size: int
    m: int = 1
    inner: int = 0

    @classmethod
    def grid(cls, q: int, m: int) -> "Domain":
        return cls("grid", q, m)

    @classmethod
    def range(cls, n: int) -> "Domain":
        return cls("range", n, 1)

    @classmethod
    def family(cls, q: int, m: int, inner: int) -> "Domain":
        return cls("family", q, m, inner)

    def _grid_point(self, idx, m):
        try:
            t = tuple(int(v) for v in idx)
        except TypeError:
            raise OutOfDomain(idx) from None
        if len(t) != m or any(not 0 <= v < self.size for v in t):
            raise OutOfDomain(idx)
        return t

    def normalize(self, idx):
        if self.kind == "family":
            try:
                tag, pt = idx
            except (TypeError, ValueError):
                raise OutOfDomain(idx) from None
            return self._grid_point(tag, self.m), self._grid_point(pt, self.inner)
        if self.kind == "range":
            try:
                i = int(idx)
            except (TypeError, ValueError):
                raise OutOfDomain(idx) from None
            if not 0 <= i < self.size:
                raise OutOfDomain(idx)
            return i
        return self._grid_point(idx, self.m)

    def __len__(self) -> int:
        if self.kind == "family":
            return self.size ** (self.m + self.inner)
        return self.size ** self.m if self.kind == "grid" else self.size

    def points(self) -> Iterable:
        if self.kind == "range":
            return range(self.size)
        if self.kind == "family":
            tags = itertools.product(range(self.size), repeat=self.m)
            return ((t, x) for t in tags for x in itertools.product(range(self.size), repeat=self.inner))
        return itertools.product(range(self.size), repeat=self.m)


def _plain(sym):
    if isinstance(sym, np.ndarray):
        return tuple(int(v) for v in sym.reshape(-1)) if sym.ndim else int(sym)
    if isinstance(sym, (tuple, list)):
        return tuple(int(v) for v in sym)
    return int(sym)


@dataclass
class QueryRecord:
    oracle: str
    index: Any
    answer: Any
    seq: int

    def to_json(self) -> dict:
        idx = list(self.index) if isinstance(self.index, tuple) else self.index
        ans = list(self.answer) if isinstance(self.answer, tuple) else self.answer
        return {"oracle": self.oracle, "index": idx, "answer": ans, "seq": self.seq}


class Transcript:
    def __init__(self):
        self.records: list[QueryRecord] = []

    def append(self, oracle: str, index, answer) -> None:
        self.records.append(QueryRecord(oracle, index, answer, len(self.records)))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def answers(self) -> list:
        return [r.answer for r in self.records]

    def dumps(self) -> str:
        return "".join(json.dumps(r.to_json()) + "\n" for r in self.records)

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())


class OracleHandle:
    """A proof or input oracle.

    ``backing`` is a dense numpy table (indexed by the domain point), or any
    callable index -> symbol (lazy functions and simulator callbacks alike).
    Symbols of width > 1 are returned as tuples.
    """

    def __init__(self, oid: str, domain: Domain, backing, width: int = 1, budget: int | None = None,
                 alphabet: str = "field"):
        self.id = oid
        self.domain = domain
        self.backing = backing
        self.width = width
        self.budget = budget
        self.alphabet = alphabet
        self.served = 0
        self.transcript: Transcript | None = None
        self.parent: "ConcatOracle | None" = None

    def __repr__(self) -> str:
        return f"OracleHandle({self.id!r}, {self.domain}, width={self.width}, served={self.served})"

    def record_to(self, transcript: Transcript | None) -> "OracleHandle":
        self.transcript = transcript
        return self

    def _lookup(self, idx):
        if callable(self.backing):
            return self.backing(idx)
        return self.backing[idx]

    def peek(self, idx):
        """Read without counting (prover-side / bookkeeping only)."""
        return _plain(self._lookup(self.domain.normalize(idx)))

    def query(self, idx):
        idx = self.domain.normalize(idx)
        if self.budget is not None and self.served >= self.budget:
            raise BudgetExceeded(f"oracle {self.id!r}: budget {self.budget} exhausted")
        if self.parent is not None:
            self.parent._charge(self.id)
        sym = _plain(self._lookup(idx))
        self.served += 1
        if self.transcript is not None:
            self.transcript.append(self.id, idx, sym)
        return sym

    __getitem__ = query

    def reset(self) -> None:
        self.served = 0


def oracle_query(h: OracleHandle, idx):
    return h.query(idx)


def table_oracle(oid: str, table, q: int | None = None, m: int | None = None, budget=None) -> OracleHandle:
    """Dense table over F^m (shape (q,)*m or (q,)*m + (t,)) or a 1-d list over a range."""
    arr = np.asarray(table)
    if q is None:
        dom = Domain.range(len(arr))
        width = 1 if arr.ndim == 1 else arr.shape[1]
    else:
        dom = Domain.grid(q, m)
        width = 1 if arr.ndim == m else arr.shape[-1]
    return OracleHandle(oid, dom, arr, width, budget)


def function_oracle(oid: str, fn: Callable, domain: Domain, width: int = 1, budget=None) -> OracleHandle:
    return OracleHandle(oid, domain, fn, width, budget)


class ConcatOracle:
    """Concatenation (pi_1, ..., pi_t) addressed by (sub-id, index)."""

    def __init__(self, parts: Sequence[OracleHandle], budget: int | None = None):
        ids = [p.id for p in parts]
        if len(set(ids)) != len(ids):
            raise DuplicateId(f"duplicate oracle ids in {ids}")
        self.parts = {p.id: p for p in parts}
        for p in parts:
            p.parent = self
        self.budget = budget
        self.served = 0

    def _charge(self, sub: str) -> None:
        if self.budget is not None and self.served >= self.budget:
            raise BudgetExceeded(f"aggregate budget {self.budget} exhausted")
        self.served += 1

    def __getitem__(self, sub: str) -> OracleHandle:
        if sub not in self.parts:
            raise OutOfDomain(sub)
        return self.parts[sub]

    def query(self, addr):
        sub, idx = addr
        return self[sub].query(idx)

    def record_to(self, transcript) -> "ConcatOracle":
        for p in self.parts.values():
            p.record_to(transcript)
        return self

    @property
    def counts(self) -> dict[str, int]:
        return {k: p.served for k, p in self.parts.items()}


def oracle_concat(parts: Sequence[OracleHandle], budget: int | None = None) -> ConcatOracle:
    return ConcatOracle(parts, budget)


@dataclass
class VerifierView:
    randomness: Any
    answers: list = field(default_factory=list)  # (oracle id, index, symbol), in query order

    @classmethod
    def from_transcript(cls, randomness, t: Transcript) -> "VerifierView":
        return cls(randomness, [(r.oracle, r.index, r.answer) for r in t])

    def symbols(self) -> list:
        return [a[2] for a in self.answers]

    def key(self) -> tuple:
        rnd = self.randomness
        if isinstance(rnd, np.ndarray):
            rnd = tuple(rnd.reshape(-1).tolist())
        return (rnd, tuple((o, i, s) for o, i, s in self.answers))


def view_distance(a: Sequence, b: Sequence) -> Fraction:
    if len(a) != len(b):
        raise LengthMismatch(f"{len(a)} != {len(b)}")
    if not a:
        return Fraction(0)
    return Fraction(sum(_plain(x) != _plain(y) for x, y in zip(a, b)), len(a))


@dataclass
class Distance:
    value: Fraction
    exact: bool
    witness: tuple | None = None  # a closest accepting view found, when any

    def __float__(self) -> float:
        return float(self.value)


AcceptPredicate = Callable[[Any, Sequence, Any], bool]

EXHAUSTIVE_LIMIT = 1 << 24


def distance_to_accepting(answers: Sequence, pred: AcceptPredicate, x, mu, strategy: str = "exhaustive",
                          alphabet: Sequence | Callable[[int], Sequence] | None = None,
                          repair: Callable[[Sequence], Iterable[tuple[Sequence, bool]]] | None = None,
                          limit: int = EXHAUSTIVE_LIMIT) -> Distance:
    """Relative Hamming distance from ``answers`` to {a : pred(x, a, mu)}.

    exhaustive: radius search over all views at distance 0, 1, 2, ...; exact.
    The search is refused when it would examine more than ``limit``
    candidate views.  ``alphabet`` lists the possible symbols at a position
    (a sequence shared by all positions, or a function of the position).

    structured: ``repair(answers)`` yields (candidate accepting view,
    covers_all_optima) pairs; the minimum over candidates is exact only if
    some candidate declared that its family contains every optimum.
    """
    answers = [_plain(a) for a in answers]
    n = len(answers)
    if pred(x, answers, mu):
        return Distance(Fraction(0), True, tuple(answers))
    if n == 0:
        return Distance(Fraction(1), True)
    if strategy == "structured":
        if repair is None:
            raise ValueError("structured strategy needs a repair enumerator")
        best, exact, wit = None, False, None
        for cand, covers in repair(answers):
            cand = [_plain(c) for c in cand]
            if not pred(x, cand, mu):
                raise ZkpcpError("repair enumerator produced a rejecting view")
            d = view_distance(answers, cand)
            if best is None or d < best:
                best, wit = d, tuple(cand)
            exact = exact or covers
        if best is None:
            return Distance(Fraction(1), exact)
        return Distance(best, exact, wit)
    if strategy != "exhaustive":
        raise ValueError(f"unknown strategy {strategy!r}")
    if alphabet is None:
        raise ValueError("exhaustive strategy needs the alphabet")
    alpha_at = alphabet if callable(alphabet) else (lambda i, _a=list(alphabet): _a)
    alts = [[_plain(s) for s in alpha_at(i) if _plain(s) != answers[i]] for i in range(n)]
    # e[r] = number of views at Hamming radius exactly r (elementary symmetric sums)
    e = [1] + [0] * n
    for a in alts:
        for r in range(n, 0, -1):
            e[r] += e[r - 1] * len(a)
    examined = 0
    for r in range(1, n + 1):
        cost = e[r]
        if examined + cost > limit:
            raise SearchSpaceTooLarge(f"radius-{r} search would exceed {limit} candidate views")
        for S in itertools.combinations(range(n), r):
            for subs in itertools.product(*(alts[i] for i in S)):
                cand = list(answers)
                for i, v in zip(S, subs):
                    cand[i] = v
                if pred(x, cand, mu):
                    return Distance(Fraction(r, n), True, tuple(cand))
        examined += cost
    return Distance(Fraction(1), True)
