"""Zero-knowledge PCP for Oracle-3SAT.

An instance is a CNF B over the bits (z, b1, b2, b3, a1, a2, a3); it is
implicitly satisfiable when some oracle A on s-bit strings makes
B(z, b1, b2, b3, A(b1), A(b2), A(b3)) true for every z and b_i.

The prover commits to A through a random polynomial C-hat whose sums over
H^k decommit to A, and for every point tau of the selector space it proves,
with the masked sumcheck, that

    sum over (w, c) of K(w; tau) * h(w, c) = 0,

where w = (z, b, a) ranges over the grid, c over H^{3k}, K is the
low-degree extension of the grid selector and h is built from the
arithmetized B and C-hat.  The per-tau proofs are materialized lazily from
per-tau seeds.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .adversary import Adversary, run_adversary
from .errors import BudgetExceeded, SearchSpaceTooLarge, ZkpcpError
from .field import FieldCtx
from .ldt import Line, check_field_size, sample_line
from .linalg import pivot_projection
from .oracles import Domain, OracleHandle, Transcript, VerifierView, function_oracle, table_oracle
from .poly import (DegreeBounds, MultiPoly, PolySim, PolySimBatch, is_low_degree, lagrange_values, low_degree_rows,
                   monomial_row,
                   power_sums, power_table, sum_over_grid)
from .sumcheck_rsc import SumInstance
from .sumcheck_zk import (SUM, LazyMaskedProof, MaskAlgebra, MaskedSumcheckSim, PrfAtoms, ZkscCoins,
                          input_term_by_points, key_hash, splitmix64, zksc_decide, zksc_query_points, zksc_verify)


class TooManyVariables(ZkpcpError, ValueError):
    pass


class WitnessInvalid(ZkpcpError, ValueError):
    pass


class WidthMismatch(ZkpcpError, ValueError):
    pass


# --- instances --------------------------------------------------------------

@dataclass(frozen=True)
class OSatInstance:
    """Clauses are tuples of signed 1-based variable indices over the
    r + 3s + 3 variables, ordered z, b1, b2, b3, a1, a2, a3 (bits MSB first
    within each block)."""
    r: int
    s: int
    clauses: tuple[tuple[int, ...], ...]
    require_3cnf: bool = False

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(int(v) for v in c) for c in self.clauses))
        if self.r < 1 or self.s < 1:
            raise ValueError("r and s must be positive")
        n = self.n_vars
        for c in self.clauses:
            if not c:
                raise ValueError("empty clause")
            if any(v == 0 or abs(v) > n for v in c):
                raise ValueError(f"clause {c} mentions a variable outside 1..{n}")
            if self.require_3cnf and len(c) != 3:
                raise ValueError(f"clause {c} does not have exactly 3 literals")

    @property
    def n_vars(self) -> int:
        return self.r + 3 * self.s + 3

    def a_var(self, i: int) -> int:
        """1-based index of a_i (i in 1..3)."""
        return self.r + 3 * self.s + i

    def b_vars(self, i: int) -> list[int]:
        start = self.r + (i - 1) * self.s
        return list(range(start + 1, start + self.s + 1))

    @cached_property
    def truth_table(self) -> np.ndarray:
        """B on the whole cube, indexed by the bits read MSB first."""
        n = self.n_vars
        idx = np.arange(1 << n, dtype=np.int64)
        out = np.ones(1 << n, dtype=bool)
        for c in self.clauses:
            sat = np.zeros(1 << n, dtype=bool)
            for lit in c:
                bit = (idx >> (n - abs(lit))) & 1
                sat |= bit == (1 if lit > 0 else 0)
            out &= sat
        return out

    def evaluate(self, bits: Sequence[int]) -> bool:
        return bool(self.truth_table[bits_to_int(bits)])

    def to_json(self) -> dict:
        return {"r": self.r, "s": self.s, "clauses": [list(c) for c in self.clauses]}

    @classmethod
    def from_json(cls, obj) -> "OSatInstance":
        return cls(int(obj["r"]), int(obj["s"]), tuple(tuple(c) for c in obj["clauses"]))


def bits_to_int(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | (int(b) & 1)
    return v


def osat_check_direct(inst: OSatInstance, A) -> bool:
    """Brute force over every z and b1, b2, b3."""
    A = np.asarray(A, dtype=np.int64).reshape(-1)
    if len(A) != 1 << inst.s:
        raise ValueError(f"oracle table must have 2^s = {1 << inst.s} entries")
    r, s = inst.r, inst.s
    zb = np.arange(1 << (r + 3 * s), dtype=np.int64)
    mask = (1 << s) - 1
    a = [A[(zb >> (s * (2 - i))) & mask] & 1 for i in range(3)]
    full = (zb << 3) | (a[0] << 2) | (a[1] << 1) | a[2]
    return bool(inst.truth_table[full].all())


def osat_encode_from_3sat(phi: Sequence[Sequence[int]], num_vars: int | None = None,
                          r: int | None = None, s: int | None = None):
    """Encode a CNF phi (clauses of at most 3 signed 1-based literals) as an
    Oracle-3SAT instance whose oracle is phi's assignment.

    z selects a clause of phi; for clause j with variables (v1, v2, v3) the
    instance holds the clause
        [z != j] or [b1 != v1] or [b2 != v2] or [b3 != v3] or l1(a1) or l2(a2) or l3(a3),
    where the bracketed inequalities expand into one literal per bit.
    Clauses with fewer than 3 literals repeat their last one.
    Returns (instance, translator) with translator(assignment) -> A.
    """
    phi = [tuple(int(v) for v in c) for c in phi]
    if any(not c or len(c) > 3 for c in phi):
        raise ValueError("phi must have clauses of 1 to 3 literals")
    nv = num_vars if num_vars is not None else max((abs(v) for c in phi for v in c), default=1)
    s = s if s is not None else max(1, math.ceil(math.log2(max(nv, 2))))
    if nv > 1 << s:
        raise TooManyVariables(f"{nv} variables do not fit in 2^{s} oracle positions")
    r = r if r is not None else max(1, math.ceil(math.log2(max(len(phi), 2))))
    if len(phi) > 1 << r:
        raise ValueError(f"{len(phi)} clauses do not fit in 2^{r} selector values")
    inst = OSatInstance(r, s, ())

    def neq(vars_1based: list[int], value: int) -> list[int]:
        width = len(vars_1based)
        out = []
        for t, var in enumerate(vars_1based):
            bit = (value >> (width - 1 - t)) & 1
            out.append(var if bit == 0 else -var)
        return out

    clauses = []
    for j, c in enumerate(phi):
        lits = list(c) + [c[-1]] * (3 - len(c))
        cl = neq(list(range(1, r + 1)), j)
        for i, lit in enumerate(lits, start=1):
            cl += neq(inst.b_vars(i), abs(lit) - 1)
        for i, lit in enumerate(lits, start=1):
            cl.append(inst.a_var(i) if lit > 0 else -inst.a_var(i))
        clauses.append(tuple(cl))
    inst = OSatInstance(r, s, tuple(clauses))

    def translate(assignment: Sequence[int]) -> np.ndarray:
        A = np.zeros(1 << s, dtype=np.int64)
        for v, val in enumerate(assignment):
            A[v] = int(bool(val))
        return A

    return inst, translate


def random_3cnf(n_vars: int, n_clauses: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    out = []
    for _ in range(n_clauses):
        vs = rng.choice(np.arange(1, n_vars + 1), size=3, replace=n_vars < 3)
        signs = rng.choice([-1, 1], size=3)
        out.append(tuple(int(v * sg) for v, sg in zip(vs, signs)))
    return out


# --- arithmetisation --------------------------------------------------------

@dataclass
class BHat:
    """An extension of 1 - B to the field."""
    F: FieldCtx
    inst: OSatInstance
    mode: str
    d_B: int
    individual: int

    def __call__(self, pts) -> np.ndarray:
        F = self.F
        pts = np.asarray(pts, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts[None, :]
        if self.mode == "multilinear":
            n = self.inst.n_vars
            V = np.broadcast_to((~self.inst.truth_table).astype(np.int64), (len(pts), 1 << n))
            for j in range(n):
                V = V.reshape(len(pts), 2, -1)
                y = pts[:, j][:, None]
                V = F.vadd(F.vmul(V[:, 0], F.vsub(1, y)), F.vmul(V[:, 1], y))
            return V.reshape(len(pts))
        B = np.ones(len(pts), dtype=np.int64)
        for c in self.inst.clauses:
            unsat = np.ones(len(pts), dtype=np.int64)
            for lit in c:
                x = pts[:, abs(lit) - 1]
                unsat = F.vmul(unsat, F.vsub(1, x) if lit > 0 else x)
            B = F.vmul(B, F.vsub(1, unsat))
        return F.vsub(1, B)


def arithmetize_B(inst: OSatInstance, mode: str, F: FieldCtx) -> BHat:
    """``multilinear``: the unique multilinear extension of 1 - B.
    ``formula``: 1 - prod_C (1 - prod_{l in C} (1 - l)), total degree sum |C|."""
    if mode == "multilinear":
        return BHat(F, inst, mode, inst.n_vars, 1)
    if mode == "formula":
        counts = [0] * inst.n_vars
        for c in inst.clauses:
            for lit in c:
                counts[abs(lit) - 1] += 1
        return BHat(F, inst, mode, sum(len(c) for c in inst.clauses), max(counts, default=0))
    raise ValueError(f"unknown arithmetisation mode {mode!r}")


@dataclass
class GammaLex:
    """Lexicographic bijection H^m -> {0,1}^{m log|H|} and its extension of
    individual degree |H|-1."""
    F: FieldCtx
    H: tuple[int, ...]
    m: int

    @property
    def bits_per(self) -> int:
        return len(self.H).bit_length() - 1

    def map(self, point: Sequence[int]) -> str:
        out = ""
        for x in point:
            out += format(self.H.index(int(x)), f"0{self.bits_per}b") if self.bits_per else ""
        return out

    @cached_property
    def _bit_table(self) -> np.ndarray:
        b = self.bits_per
        return np.array([[(i >> (b - 1 - t)) & 1 for t in range(b)] for i in range(len(self.H))],
                        dtype=np.int64).reshape(len(self.H), b)

    def __call__(self, pts) -> np.ndarray:
        """(N, m) field points -> (N, m * log|H|) field values."""
        pts = np.asarray(pts, dtype=np.int64).reshape(-1, self.m)
        if not self.m or not self.bits_per:
            return np.zeros((len(pts), 0), dtype=np.int64)
        return self._value_table[pts].reshape(len(pts), -1)

    @cached_property
    def _value_table(self) -> np.ndarray:
        """(q, log|H|): the extended bits at every field element."""
        L = lagrange_values(self.F, self.H, np.arange(self.F.order))
        return self.F.vdot(L, self._bit_table)


def gamma_lex(F: FieldCtx, H: Sequence[int], m: int, width: int | None = None) -> GammaLex:
    H = tuple(int(h) for h in H)
    h = len(H)
    if h & (h - 1):
        raise WidthMismatch(f"|H| = {h} is not a power of two")
    g = GammaLex(F, H, m)
    if width is not None and width != m * g.bits_per:
        raise WidthMismatch(f"{m} coordinates of {g.bits_per} bits do not give width {width}")
    return g


# --- parameters -------------------------------------------------------------

@dataclass
class OSatParams:
    F: FieldCtx
    H: tuple[int, ...]
    k: int
    mode: str
    r: int
    s: int
    m1: int
    m2: int
    bhat: BHat
    gamma1: GammaLex
    gamma2: GammaLex

    @property
    def deg_C(self) -> int:
        return 2 * (len(self.H) - 1)

    @property
    def total_deg_C(self) -> int:
        return (self.m2 + self.k) * self.deg_C

    @property
    def d_B(self) -> int:
        return self.bhat.d_B

    @property
    def n_w(self) -> int:
        return self.m1 + 3 * self.m2 + 3

    @property
    def M(self) -> int:
        """Number of summation variables of the per-tau claim."""
        return self.n_w + 3 * self.k

    @property
    def d(self) -> int:
        """Degree parameter of the per-tau masked sumcheck (|F| - 1)."""
        return self.F.order - 1

    @property
    def c_vars(self) -> int:
        return self.m2 + self.k

    @cached_property
    def c_bounds(self) -> DegreeBounds:
        return DegreeBounds.uniform(self.c_vars, self.deg_C)

    @cached_property
    def c_exps(self) -> np.ndarray:
        return self.c_bounds.monomials(self.c_vars)

    @property
    def hiding_bound(self) -> int:
        return len(self.H) ** self.k

    @cached_property
    def tau_instance(self) -> SumInstance:
        return SumInstance(self.F, self.M, self.d, self.H, 0, strict=False)

    @cached_property
    def algebra(self) -> MaskAlgebra:
        return MaskAlgebra(self.F, self.M, self.d, self.H)

    @cached_property
    def lag(self) -> np.ndarray:
        """(q, |H|): L_{H,h}(x) for every field element x."""
        return lagrange_values(self.F, self.H, np.arange(self.F.order))

    @cached_property
    def lag_bool(self) -> np.ndarray:
        return self.lag[:, [self.h_pos[0], self.h_pos[1]]]

    @cached_property
    def h_pos(self) -> dict[int, int]:
        return {h: i for i, h in enumerate(self.H)}

    def records(self) -> dict:
        return {"field": repr(self.F), "H": list(self.H), "k": self.k, "mode": self.mode, "m1": self.m1,
                "m2": self.m2, "d_B": self.d_B, "deg_C": self.deg_C, "total_deg_C": self.total_deg_C,
                "summation_vars": self.M, "d": self.d, "hiding_bound": self.hiding_bound}

    # block layout of w = (z, b1, b2, b3, a1, a2, a3)
    def b_slice(self, i: int) -> slice:
        start = self.m1 + (i - 1) * self.m2
        return slice(start, start + self.m2)

    def a_index(self, i: int) -> int:
        return self.m1 + 3 * self.m2 + i - 1

    def c_slice(self, i: int) -> slice:
        start = self.n_w + (i - 1) * self.k
        return slice(start, start + self.k)

    def bits_of_w(self, W) -> np.ndarray:
        """(N, n_w) -> (N, r + 3s + 3): apply the lexicographic extensions."""
        W = np.asarray(W, dtype=np.int64).reshape(-1, self.n_w)
        parts = [self.gamma1(W[:, : self.m1])]
        parts += [self.gamma2(W[:, self.b_slice(i)]) for i in (1, 2, 3)]
        parts.append(W[:, self.m1 + 3 * self.m2:])
        return np.concatenate(parts, axis=1)

    def bhat_w(self, W) -> np.ndarray:
        return self.bhat(self.bits_of_w(W))


def osat_params(inst: OSatInstance, F: FieldCtx, H: Sequence[int] | None = None, k: int = 1,
                mode: str = "multilinear") -> OSatParams:
    H = tuple(int(h) for h in (H if H is not None else (0, 1)))
    if 0 not in H or 1 not in H:
        raise ValueError("H must contain 0 and 1")
    if k < 1:
        raise ValueError("k must be at least 1")
    g = gamma_lex(F, H, 1)
    lg = g.bits_per
    if lg == 0 or inst.r % lg or inst.s % lg:
        raise WidthMismatch(f"log|H| = {lg} must divide r = {inst.r} and s = {inst.s}")
    m1, m2 = inst.r // lg, inst.s // lg
    return OSatParams(F, H, k, mode, inst.r, inst.s, m1, m2, arithmetize_B(inst, mode, F),
                      gamma_lex(F, H, m1, inst.r), gamma_lex(F, H, m2, inst.s))


# --- summands ---------------------------------------------------------------

def lagrange_zero(params: OSatParams, xs) -> np.ndarray:
    """L_{H,0}(x) for each x."""
    return params.lag[np.asarray(xs, dtype=np.int64), params.h_pos[0]]


def summand_g(Ahat: MultiPoly, params: OSatParams) -> Callable[[np.ndarray], np.ndarray]:
    """g(z, b, a) = Bhat(gamma(z), gamma(b), a) * prod_i (Ahat(b_i) + a_i - 1)."""
    F = params.F

    def g(W):
        W = np.asarray(W, dtype=np.int64).reshape(-1, params.n_w)
        out = params.bhat_w(W)
        for i in (1, 2, 3):
            t = F.vadd(Ahat.evaluate_many(W[:, params.b_slice(i)]), F.vsub(W[:, params.a_index(i)], 1))
            out = F.vmul(out, t)
        return out

    return g


def summand_h(Chat: MultiPoly, params: OSatParams) -> Callable[[np.ndarray], np.ndarray]:
    """h(z, b, a, c) = Bhat(...) * prod_i (Chat(b_i, c_i) + L_{H^k,0^k}(c_i) (a_i - 1))."""
    F = params.F

    def h(X):
        X = np.asarray(X, dtype=np.int64).reshape(-1, params.M)
        out = params.bhat_w(X[:, : params.n_w])
        for i in (1, 2, 3):
            c = X[:, params.c_slice(i)]
            cv = Chat.evaluate_many(np.concatenate([X[:, params.b_slice(i)], c], axis=1))
            L = np.ones(len(X), dtype=np.int64)
            for j in range(params.k):
                L = F.vmul(L, lagrange_zero(params, c[:, j]))
            out = F.vmul(out, F.vadd(cv, F.vmul(L, F.vsub(X[:, params.a_index(i)], 1))))
        return out

    return h


def selector_tables(params: OSatParams, tau: Sequence[int]) -> np.ndarray:
    """(n_w, q): the per-coordinate factors of K(.; tau) at every field element."""
    n_sel = params.m1 + 3 * params.m2
    rows = []
    for j in range(params.n_w):
        L = params.lag if j < n_sel else params.lag_bool
        rows.append(params.F.vdot(L, L[int(tau[j])]))
    return np.stack(rows)


def selector(params: OSatParams, W, tau: Sequence[int], tables: np.ndarray | None = None) -> np.ndarray:
    """K(w; tau): extension in w of the grid selector, evaluated at tau.
    Selector coordinates range over H, the a-coordinates over {0, 1}."""
    F = params.F
    W = np.asarray(W, dtype=np.int64).reshape(-1, params.n_w)
    kappa = tables if tables is not None else selector_tables(params, tau)
    out = kappa[0][W[:, 0]]
    for j in range(1, params.n_w):
        out = F.vmul(out, kappa[j][W[:, j]])
    return out


# --- commitment -------------------------------------------------------------

@dataclass
class Commitment:
    """Linear constraints sum_{c in H^k} C(b, c) = A(gamma(b)) for b in H^m2,
    with a pivot split for sampling."""
    rows: np.ndarray
    grid: list[tuple]
    pivots: list[int]
    free: list[int]
    inv: np.ndarray


def commitment_system(params: OSatParams) -> Commitment:
    cached = getattr(params, "_commitment", None)
    if cached is not None:
        return cached
    F = params.F
    grid = list(itertools.product(params.H, repeat=params.m2))
    rows = []
    for b in grid:
        row = np.zeros(len(params.c_exps), dtype=np.int64)
        for c in itertools.product(params.H, repeat=params.k):
            row = F.vadd(row, monomial_row(F, params.c_exps, b + c))
        rows.append(row)
    rows = np.stack(rows)
    piv, inv = pivot_projection(F, rows)
    free = [j for j in range(rows.shape[1]) if j not in set(piv)]
    out = Commitment(rows, grid, list(piv), free, inv)
    params._commitment = out
    return out


def decommit_targets(A, params: OSatParams) -> np.ndarray:
    """Field values A(gamma(b)) for b in H^m2, in grid order.  ``A`` is a
    table over s-bit strings (an int array of length 2^s) or, for
    enumeration, any field values already given per grid point."""
    com = commitment_system(params)
    A = np.asarray(A, dtype=np.int64).reshape(-1)
    out = []
    for b in com.grid:
        out.append(int(A[int(params.gamma2.map(b), 2)]) if params.gamma2.bits_per else int(A[0]))
    return np.array(out, dtype=np.int64)


def commit_batch(targets, params: OSatParams, rng: np.random.Generator, n: int) -> np.ndarray:
    """n independent uniform coefficient vectors meeting the decommitment
    constraints: free coordinates uniform, pivots solved."""
    F = params.F
    com = commitment_system(params)
    X = F.random(rng, (n, com.rows.shape[1]))
    resid = F.vsub(np.asarray(targets, dtype=np.int64)[None, :],
                   F.vdot(X[:, com.free], com.rows[:, com.free].T))
    X[:, com.pivots] = F.vdot(resid, com.inv.T)
    return X


def commit_witness(A, params: OSatParams, rng: np.random.Generator) -> MultiPoly:
    """Uniform C-hat of individual degree 2(|H|-1) with the H^k sums equal
    to A on the grid."""
    X = commit_batch(decommit_targets(A, params), params, rng, 1)[0]
    return MultiPoly(params.F, params.c_vars, params.c_bounds, X.reshape(params.c_bounds.shape(params.c_vars)))


def decommit(Chat: MultiPoly, params: OSatParams) -> MultiPoly:
    """A-hat(X) = sum_{c in H^k} C-hat(X, c)."""
    return sum_over_grid(Chat, params.H, range(params.m2, params.c_vars))


# --- the per-tau summand ------------------------------------------------------

class TauSummand:
    """The summand K(w; tau) h(w, c) for a batch of C-hat coefficient
    vectors (n, #monomials), with exact partial sums.

    A partial sum fixes some coordinates and sums the others over H.  The
    w-coordinates that are summed are enumerated; each c-block factor is a
    linear functional of C-hat (powers at fixed coordinates, power sums at
    summed ones), so the c-sums never enumerate.
    """

    def __init__(self, params: OSatParams, tau: Sequence[int], coeffs: np.ndarray):
        self.params = params
        self.tau = tuple(int(v) for v in tau)
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.int64))
        self.n = self.coeffs.shape[0]
        D = params.deg_C + 1
        self._C = self.coeffs.reshape(self.n, D ** params.m2, D ** params.k)
        self._g_cache: dict = {}
        self._psum = power_sums(params.F, params.H, D)
        self._kappa = selector_tables(params, self.tau)

    def _coord_vec(self, v: int) -> np.ndarray:
        if v == SUM:
            return self._psum
        return power_table(self.params.F, [v], self.params.deg_C + 1)[0]

    def _kron(self, vecs: list[np.ndarray]) -> np.ndarray:
        F = self.params.F
        out = np.ones(1, dtype=np.int64)
        for v in vecs:
            out = F.vmul(out[:, None], v[None, :]).reshape(-1)
        return out

    def _c_functional(self, cb: tuple) -> np.ndarray:
        """(n, D^m2): C-hat contracted with the c-block spec."""
        G = self._g_cache.get(cb)
        if G is None:
            F = self.params.F
            vec = self._kron([self._coord_vec(v) for v in cb])
            G = F.vdot(self._C.reshape(-1, self._C.shape[2]), vec).reshape(self.n, self._C.shape[1])
            self._g_cache[cb] = G
        return G

    def _b_rows(self, B: np.ndarray) -> np.ndarray:
        """(N, m2) b values -> (N, D^m2) monomial rows."""
        F = self.params.F
        D = self.params.deg_C + 1
        out = np.ones((len(B), 1), dtype=np.int64)
        for j in range(B.shape[1]):
            pw = power_table(F, B[:, j], D)
            out = F.vmul(out[:, :, None], pw[:, None, :]).reshape(len(B), -1)
        return out

    def partial(self, spec: Sequence[int]) -> np.ndarray:
        p, F = self.params, self.params.F
        spec = tuple(int(v) for v in spec)
        wspec = spec[: p.n_w]
        summed = [j for j, v in enumerate(wspec) if v == SUM]
        base = np.array([0 if v == SUM else v for v in wspec], dtype=np.int64)
        if summed:
            combos = np.array(list(itertools.product(p.H, repeat=len(summed))), dtype=np.int64)
            W = np.repeat(base[None, :], len(combos), axis=0)
            W[:, summed] = combos
        else:
            W = base[None, :]
        KB = F.vmul(selector(p, W, self.tau, self._kappa), p.bhat_w(W))
        keep = KB != 0
        if not keep.any():
            return np.zeros(self.n, dtype=np.int64)
        W, KB = W[keep], KB[keep]
        total = np.repeat(KB[:, None], self.n, axis=1)  # (|W|, n)
        for i in (1, 2, 3):
            cb = spec[p.c_slice(i)]
            G = self._c_functional(cb)
            cpart = F.vdot(self._b_rows(W[:, p.b_slice(i)]), G.T)
            L = 1
            for v in (v for v in cb if v != SUM):
                L = F.mul(L, int(lagrange_zero(p, [v])[0]))
            corr = F.vmul(F.vsub(W[:, p.a_index(i)], 1), L)
            total = F.vmul(total, F.vadd(cpart, corr[:, None]))
        return F.vsum(total, axis=0)

    def point(self, x: Sequence[int]) -> np.ndarray:
        return self.partial(x)


def c_read_points(params: OSatParams, x: Sequence[int]) -> list[tuple[int, ...]]:
    """The three C-hat points (b_i, c_i) that one summand value depends on."""
    x = tuple(int(v) for v in x)
    return [x[params.b_slice(i)] + x[params.c_slice(i)] for i in (1, 2, 3)]


def summand_from_reads(params: OSatParams, tau: Sequence[int], x: Sequence[int], reads) -> np.ndarray:
    """K(w; tau) h(w, c) at x, given C-hat values at c_read_points(x)
    (each an array over trials, or a scalar)."""
    F = params.F
    x = tuple(int(v) for v in x)
    w = np.array(x[: params.n_w], dtype=np.int64)[None, :]
    out = F.vmul(selector(params, w, tau), params.bhat_w(w))[0]
    out = np.asarray(out, dtype=np.int64)
    for i, val in zip((1, 2, 3), reads):
        L = 1
        for v in x[params.c_slice(i)]:
            L = F.mul(L, int(lagrange_zero(params, [v])[0]))
        corr = F.mul(L, F.sub(x[params.a_index(i)], 1))
        out = F.vmul(out, F.vadd(np.asarray(val, dtype=np.int64), corr))
    return out


def summand_prefactor(params: OSatParams, tau: Sequence[int], x: Sequence[int]) -> int:
    w = np.array([int(v) for v in x[: params.n_w]], dtype=np.int64)[None, :]
    return int(params.F.vmul(selector(params, w, tau), params.bhat_w(w))[0])


def osat_summand_tau(Chat: MultiPoly, params: OSatParams, tau: Sequence[int]):
    """(sumcheck instance with claimed sum 0, dense evaluator of the summand
    on (N, M) points)."""
    h = summand_h(Chat, params)

    def evaluate(X):
        X = np.asarray(X, dtype=np.int64).reshape(-1, params.M)
        return params.F.vmul(selector(params, X[:, : params.n_w], tau), h(X))

    return params.tau_instance, evaluate


# --- seeds ------------------------------------------------------------------

def master_word(master_seed: int) -> int:
    return key_hash(("osat-master", int(master_seed)))


def tau_seeds(masters: np.ndarray, tau: Sequence[int]) -> np.ndarray:
    return splitmix64(np.asarray(masters, dtype=np.uint64) ^ np.uint64(key_hash(("tau",) + tuple(tau))))


# --- prover -----------------------------------------------------------------

@dataclass
class OSatProof:
    params: OSatParams
    coeffs: np.ndarray        # C-hat coefficients over params.c_exps
    pi_C: np.ndarray          # dense table on F^(m2+k)
    master: int               # 64-bit word the per-tau seeds derive from
    _lazy: dict = field(default_factory=dict, repr=False)

    @property
    def chat(self) -> MultiPoly:
        p = self.params
        return MultiPoly(p.F, p.c_vars, p.c_bounds, self.coeffs.reshape(p.c_bounds.shape(p.c_vars)))

    def pi_tau(self, tau: Sequence[int]) -> LazyMaskedProof:
        tau = tuple(int(v) for v in tau)
        lazy = self._lazy.get(tau)
        if lazy is None:
            p = self.params
            atoms = PrfAtoms(p.F, tau_seeds(np.array([self.master], dtype=np.uint64), tau))
            summand = TauSummand(p, tau, self.coeffs[None, :])
            lazy = self._lazy[tau] = LazyMaskedProof(p.algebra, atoms, summand.partial)
        return lazy

    def oracles(self, budget=None) -> dict[str, OracleHandle]:
        p = self.params
        q, M = p.F.order, p.M
        return {
            "pi_C": table_oracle("pi_C", self.pi_C, q, p.c_vars, budget),
            "pi_sigma": function_oracle("pi_sigma", lambda ix: self.pi_tau(ix[0]).pi_sigma(ix[1])[0],
                                        Domain.family(q, p.n_w, M - 1), M + 1, budget),
            "pi_P": function_oracle("pi_P", lambda ix: self.pi_tau(ix[0]).pi_P(ix[1])[0],
                                    Domain.family(q, p.n_w, M), M + 1, budget),
        }


def _rng_from_seed(master_seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed) & ((1 << 64) - 1),
                                                         int(master_seed) >> 64, key_hash(label)]))


def osat_prove(inst: OSatInstance, A, params: OSatParams, master_seed: int) -> OSatProof:
    if not osat_check_direct(inst, A):
        raise WitnessInvalid("the oracle does not satisfy the instance")
    return osat_prove_unchecked(A, params, master_seed)


def osat_prove_unchecked(A, params: OSatParams, master_seed: int) -> OSatProof:
    """The honest prover's algorithm without the witness check (used to
    build wrong-witness forgeries)."""
    rng = _rng_from_seed(master_seed, "commit")
    coeffs = commit_batch(decommit_targets(A, params), params, rng, 1)[0]
    chat = MultiPoly(params.F, params.c_vars, params.c_bounds, coeffs.reshape(params.c_bounds.shape(params.c_vars)))
    return OSatProof(params, coeffs, chat.evaluate_grid(), master_word(master_seed))


# --- verifier ---------------------------------------------------------------

def sumcheck_view_size(params: OSatParams, f_reps: int = 1, p_reps: int = 1) -> int:
    q = params.F.order
    return q + q * (3 + 2) + f_reps * q * 3 + p_reps * q


def balance_reps(params: OSatParams, f_reps: int = 1, p_reps: int = 1) -> tuple[int, int]:
    """Smallest (LDT lines, sumcheck repetitions) such that each part is at
    least a third of the view."""
    a, b = params.F.order, sumcheck_view_size(params, f_reps, p_reps)
    best = None
    for r3 in range(1, 64):
        for r1 in range(1, 64 * max(1, b // a + 1)):
            if 2 * r1 * a >= r3 * b and 2 * r3 * b >= r1 * a:
                if best is None or r1 + r3 < sum(best):
                    best = (r1, r3)
                break
    return best


@dataclass(frozen=True)
class OsatCoins:
    ldt_lines: tuple[Line, ...]
    reps: tuple[tuple[tuple[int, ...], ZkscCoins], ...]

    @classmethod
    def sample(cls, params: OSatParams, rng: np.random.Generator, r1: int | None = None,
               r3: int | None = None) -> "OsatCoins":
        if r1 is None or r3 is None:
            b1, b3 = balance_reps(params)
            r1 = b1 if r1 is None else r1
            r3 = b3 if r3 is None else r3
        F = params.F
        lines = tuple(sample_line(F, params.c_vars, rng) for _ in range(r1))
        reps = []
        for _ in range(r3):
            tau = tuple(int(v) for v in F.random(rng, params.n_w))
            reps.append((tau, ZkscCoins.sample(params.tau_instance, rng)))
        return cls(lines, tuple(reps))


@dataclass
class OsatResult:
    verdict: bool
    failed: str | None
    view: VerifierView


def osat_verify(inst: OSatInstance, params: OSatParams, pi_C: OracleHandle, pi_sigma: OracleHandle,
                pi_P: OracleHandle, coins: OsatCoins, transcript: Transcript | None = None,
                allow_small_field: bool = False) -> OsatResult:
    """Line test on pi_C at total degree (m2+k)*2(|H|-1), then for each tau
    the masked sumcheck verifier with its input reads synthesized from three
    pi_C reads each.  All reads are made before the decision."""
    F = params.F
    check_field_size(F, 1, allow_small_field)
    t = transcript if transcript is not None else Transcript()
    for h in (pi_C, pi_sigma, pi_P):
        h.record_to(t)
    failed = None
    for r, line in enumerate(coins.ldt_lines):
        vals = np.array([pi_C.query(tuple(int(v) for v in pt)) for pt in line.points(F)], dtype=np.int64)
        if failed is None and not is_low_degree(F, vals, params.total_deg_C):
            failed = f"ldt-C[{r}]"
    inst_t = params.tau_instance
    q, M = F.order, params.M
    for r, (tau, zc) in enumerate(coins.reps):
        def f_read(x, tau=tau):
            reads = [pi_C.query(pt) for pt in c_read_points(params, x)]
            return int(summand_from_reads(params, tau, x, reads))

        f_h = function_oracle("F", f_read, Domain.grid(q, M))
        s_h = function_oracle("pi_sigma", lambda i, tau=tau: pi_sigma.query((tau, i)), Domain.grid(q, M - 1), M + 1)
        p_h = function_oracle("pi_P", lambda x, tau=tau: pi_P.query((tau, x)), Domain.grid(q, M), M + 1)
        res = zksc_verify(inst_t, f_h, s_h, p_h, zc, transcript=Transcript(), allow_small_field=True)
        if failed is None and not res.verdict:
            failed = f"tau[{r}]:{res.failed}"
    for h in (pi_C, pi_sigma, pi_P):
        h.record_to(None)
    return OsatResult(failed is None, failed, VerifierView.from_transcript(coins, t))


def osat_verify_proof(inst: OSatInstance, params: OSatParams, proof: OSatProof, coins: OsatCoins,
                      allow_small_field: bool = False) -> OsatResult:
    o = proof.oracles()
    return osat_verify(inst, params, o["pi_C"], o["pi_sigma"], o["pi_P"], coins, allow_small_field=allow_small_field)


def osat_query_list(params: OSatParams, coins: OsatCoins) -> list[tuple[str, tuple]]:
    """The verifier's reads in view order: Q(x; coins) as (oracle id, index)."""
    F = params.F
    out = [("pi_C", tuple(int(v) for v in pt)) for line in coins.ldt_lines for pt in line.points(F)]
    for tau, zc in coins.reps:
        for oid, x in zksc_query_points(params.tau_instance, zc):
            if oid == "F":
                out += [("pi_C", pt) for pt in c_read_points(params, x)]
            else:
                out.append((oid, (tau, x)))
    return out


def osat_decide(params: OSatParams, answers: Sequence, coins: OsatCoins) -> str | None:
    """D(x, answers; coins) on answers ordered as in osat_query_list; None
    means accept, else the label of the first failing subtest."""
    F, q = params.F, params.F.order
    pos = 0
    for r in range(len(coins.ldt_lines)):
        vals = np.array([int(np.asarray(a).reshape(-1)[0]) for a in answers[pos:pos + q]], dtype=np.int64)
        pos += q
        if not is_low_degree(F, vals, params.total_deg_C):
            return f"ldt-C[{r}]"
    inst_t = params.tau_instance
    for r, (tau, zc) in enumerate(coins.reps):
        view = []
        for oid, x in zksc_query_points(inst_t, zc):
            if oid == "F":
                reads = [np.array([int(np.asarray(a).reshape(-1)[0])]) for a in answers[pos:pos + 3]]
                pos += 3
                view.append(int(summand_from_reads(params, tau, x, reads)[0]))
            else:
                a = answers[pos]
                pos += 1
                view.append(tuple(int(v) for v in np.asarray(a).reshape(-1)))
        why = zksc_decide(inst_t, view, zc)
        if why:
            return f"tau[{r}]:{why}"
    return None


def osat_view_length(params: OSatParams, coins: OsatCoins) -> int:
    q = params.F.order
    n = len(coins.ldt_lines) * q
    for tau, zc in coins.reps:
        for oid, _ in zksc_query_points(params.tau_instance, zc):
            n += 3 if oid == "F" else 1
    return n


# --- batched real and simulated backends ----------------------------------------

class OsatRealBatch:
    """Honest proofs for n trials (fresh C-hat and mask seeds per trial),
    answering queries as (n, width) arrays."""

    def __init__(self, params: OSatParams, coeffs: np.ndarray, masters: np.ndarray):
        self.params = params
        self.coeffs = np.asarray(coeffs, dtype=np.int64)
        self.masters = np.asarray(masters, dtype=np.uint64)
        self.n = len(self.masters)
        self._lazy: dict = {}

    @classmethod
    def sample(cls, params: OSatParams, A, rng: np.random.Generator, n: int) -> "OsatRealBatch":
        coeffs = commit_batch(decommit_targets(A, params), params, rng, n)
        masters = rng.integers(0, 2 ** 63, size=n, dtype=np.int64).astype(np.uint64) * np.uint64(2) \
            + rng.integers(0, 2, size=n, dtype=np.int64).astype(np.uint64)
        return cls(params, coeffs, masters)

    def take(self, sel) -> "OsatRealBatch":
        sel = np.asarray(sel)
        return OsatRealBatch(self.params, self.coeffs[sel], self.masters[sel])

    def _tau(self, tau) -> LazyMaskedProof:
        lazy = self._lazy.get(tau)
        if lazy is None:
            p = self.params
            lazy = LazyMaskedProof(p.algebra, PrfAtoms(p.F, tau_seeds(self.masters, tau)),
                                   TauSummand(p, tau, self.coeffs).partial)
            self._lazy[tau] = lazy
        return lazy

    def answer(self, oid: str, idx) -> np.ndarray:
        p = self.params
        if oid == "pi_C":
            row = monomial_row(p.F, p.c_exps, idx)
            return p.F.vdot(self.coeffs, row)[:, None]
        tau, x = idx
        if oid == "pi_sigma":
            return self._tau(tuple(tau)).pi_sigma(x)
        if oid == "pi_P":
            return self._tau(tuple(tau)).pi_P(x)
        raise KeyError(oid)


class OsatSimBatch:
    """The simulator for n trials: pi_C through PolySim (no decommitment
    constraints), each pi_tau through the exact masked-sumcheck simulator
    whose summand reads go to the same PolySim.  Raises BudgetExceeded
    before the distinct pi_C points it has answered reach |H|^k."""

    def __init__(self, params: OSatParams, rng: np.random.Generator, n: int):
        self.params = params
        self.rng = rng
        self.n = n
        self.poly = PolySimBatch(params.F, params.c_vars, params.c_bounds, rng, n)
        self.sims: dict = {}

    def take(self, sel) -> "OsatSimBatch":
        sel = np.asarray(sel)
        out = OsatSimBatch(self.params, self.rng, int(sel.size))
        out.poly = self.poly.take(sel)
        out.sims = {t: s.take(sel) for t, s in self.sims.items()}
        return out

    def read_C(self, point) -> np.ndarray:
        point = tuple(int(v) for v in point)
        if point not in self.poly.answers and len(self.poly.answers) + 1 >= self.params.hiding_bound:
            raise BudgetExceeded(f"simulation needs {len(self.poly.answers) + 1} distinct pi_C points, "
                                 f"hiding holds below |H|^k = {self.params.hiding_bound}")
        return self.poly.query(point)

    def _term(self, tau):
        p = self.params

        def point(x):
            if summand_prefactor(p, tau, x) == 0:
                return np.zeros(self.n, dtype=np.int64)
            reads = [self.read_C(pt) for pt in c_read_points(p, x)]
            return summand_from_reads(p, tau, x, reads)

        return input_term_by_points(p.F, p.H, 0, point, self.n)

    def _sim(self, tau) -> MaskedSumcheckSim:
        s = self.sims.get(tau)
        if s is None:
            s = self.sims[tau] = MaskedSumcheckSim(self.params.algebra, self.rng, self.n)
        return s

    def answer(self, oid: str, idx) -> np.ndarray:
        if oid == "pi_C":
            return self.read_C(idx)[:, None]
        tau, x = idx
        tau = tuple(int(v) for v in tau)
        if oid == "pi_sigma":
            return self._sim(tau).pi_sigma(x, self._term(tau))
        if oid == "pi_P":
            return self._sim(tau).pi_P(x, self._term(tau))
        raise KeyError(oid)


def backend_oracles(params: OSatParams, backend, budget=None) -> dict[str, OracleHandle]:
    """Single-trial oracle handles over a batched backend with n = 1."""
    q, M = params.F.order, params.M
    return {
        "pi_C": function_oracle("pi_C", lambda x: int(backend.answer("pi_C", x)[0, 0]),
                                Domain.grid(q, params.c_vars), 1, budget),
        "pi_sigma": function_oracle("pi_sigma", lambda ix: backend.answer("pi_sigma", ix)[0],
                                    Domain.family(q, params.n_w, M - 1), M + 1, budget),
        "pi_P": function_oracle("pi_P", lambda ix: backend.answer("pi_P", ix)[0],
                                Domain.family(q, params.n_w, M), M + 1, budget),
    }


def osat_simulate(inst: OSatInstance, params: OSatParams, adversary: Adversary, rng: np.random.Generator,
                  coins=None) -> VerifierView:
    """Simulated view of ``adversary`` (no witness used)."""
    if adversary.budget >= params.hiding_bound:
        raise BudgetExceeded(f"budget {adversary.budget} is not below |H|^k = {params.hiding_bound}")
    backend = OsatSimBatch(params, rng, 1)
    return run_adversary(adversary, backend_oracles(params, backend), coins, rng)


class RandomProofBatch:
    """Forged proofs for n trials: every symbol uniform and independent
    (pi_Sigma padding kept at zero), consistent on repeated queries."""

    def __init__(self, params: OSatParams, rng: np.random.Generator, n: int):
        self.params = params
        self.rng = rng
        self.n = n
        self.cache: dict = {}

    def take(self, sel) -> "RandomProofBatch":
        sel = np.asarray(sel)
        out = RandomProofBatch(self.params, self.rng, int(sel.size))
        out.cache = {k: v[sel] for k, v in self.cache.items()}
        return out

    def answer(self, oid: str, idx) -> np.ndarray:
        key = (oid, repr(idx))
        if key not in self.cache:
            F, M = self.params.F, self.params.M
            if oid == "pi_C":
                v = F.random(self.rng, (self.n, 1))
            elif oid == "pi_sigma":
                v = np.concatenate([F.random(self.rng, (self.n, M - 1)),
                                    np.zeros((self.n, 2), dtype=np.int64)], axis=1)
            else:
                v = F.random(self.rng, (self.n, M + 1))
            self.cache[key] = v
        return self.cache[key]


def osat_verify_batch(params: OSatParams, backend, coins: OsatCoins) -> tuple[np.ndarray, list]:
    """The verifier of ``osat_verify`` run with one set of coins against the
    n proofs held by a batched backend.  Returns (verdicts, failure labels)."""
    F, n = params.F, backend.n
    failed: list = [None] * n

    def mark(bad, label):
        for t in np.nonzero(bad)[0]:
            if failed[t] is None:
                failed[t] = label

    for r, line in enumerate(coins.ldt_lines):
        vals = np.stack([backend.answer("pi_C", tuple(int(v) for v in pt))[:, 0] for pt in line.points(F)], axis=1)
        mark(~low_degree_rows(F, vals, params.total_deg_C), f"ldt-C[{r}]")
    inst_t = params.tau_instance
    for r, (tau, zc) in enumerate(coins.reps):
        cols = []
        for oid, x in zksc_query_points(inst_t, zc):
            if oid == "F":
                reads = [backend.answer("pi_C", pt)[:, 0] for pt in c_read_points(params, x)]
                cols.append(summand_from_reads(params, tau, x, reads))
            else:
                cols.append(backend.answer(oid, (tau, x)))
        for t in range(n):
            if failed[t] is not None:
                continue
            answers = [int(c[t]) if c.ndim == 1 else tuple(c[t].tolist()) for c in cols]
            why = zksc_decide(inst_t, answers, zc)
            if why:
                failed[t] = f"tau[{r}]:{why}"
    return np.array([f is None for f in failed]), failed


# --- exact micro-scale checks -------------------------------------------------

def enumerate_polys(F: FieldCtx, n_coef: int, limit: int = 1 << 20) -> np.ndarray:
    if F.order ** n_coef > limit:
        raise SearchSpaceTooLarge(f"{F.order}^{n_coef} coefficient vectors")
    idx = np.arange(F.order ** n_coef, dtype=np.int64)
    return np.stack([(idx // F.order ** j) % F.order for j in range(n_coef)], axis=1)


def constrained_space(params: OSatParams, targets) -> np.ndarray:
    """Every C-hat coefficient vector meeting the decommitment constraints."""
    F = params.F
    com = commitment_system(params)
    free = enumerate_polys(F, len(com.free))
    X = np.zeros((len(free), com.rows.shape[1]), dtype=np.int64)
    X[:, com.free] = free
    resid = F.vsub(np.asarray(targets, dtype=np.int64)[None, :], F.vdot(free, com.rows[:, com.free].T))
    X[:, com.pivots] = F.vdot(resid, com.inv.T)
    return X


def _answer_law(F: FieldCtx, X: np.ndarray, exps: np.ndarray, queries) -> dict[tuple, Fraction]:
    if not queries:
        return {(): Fraction(1)}
    cols = np.stack([F.vdot(X, monomial_row(F, exps, q)) for q in queries], axis=1)
    keys, counts = np.unique(cols, axis=0, return_counts=True)
    n = len(X)
    return {tuple(int(v) for v in k): Fraction(int(c), n) for k, c in zip(keys, counts)}


def total_variation(p: dict, q: dict) -> Fraction:
    keys = set(p) | set(q)
    return sum((abs(p.get(k, Fraction(0)) - q.get(k, Fraction(0))) for k in keys), Fraction(0)) / 2


def commitment_hiding_tv(params: OSatParams, A1, A2, queries, check_bound: bool = True) -> Fraction:
    """TV distance between the pi_C answers at ``queries`` for commitments
    to A1 and to A2, by enumerating both constrained spaces.  With
    ``check_bound`` False larger query sets are allowed (to see them leak)."""
    if check_bound and len(set(map(tuple, queries))) >= params.hiding_bound:
        raise ValueError(f"query sets must be smaller than |H|^k = {params.hiding_bound}")
    F = params.F
    X1 = constrained_space(params, decommit_targets(A1, params))
    X2 = constrained_space(params, decommit_targets(A2, params))
    return total_variation(_answer_law(F, X1, params.c_exps, queries), _answer_law(F, X2, params.c_exps, queries))


def polysim_tree_law(F: FieldCtx, m: int, bounds: DegreeBounds, next_point) -> dict[tuple, Fraction]:
    """Exact law of the answer sequence when an adaptive querier
    ``next_point(answers) -> point | None`` talks to PolySim."""
    out: dict[tuple, Fraction] = {}

    def walk(sim: PolySim, answers: tuple, prob: Fraction):
        pt = next_point(answers)
        if pt is None:
            out[answers] = out.get(answers, Fraction(0)) + prob
            return
        for v, pv in sim.distribution(pt).items():
            child = PolySim(F, m, bounds, None, sim.S)
            child.query(pt, v)
            walk(child, answers + (v,), prob * pv)

    walk(PolySim(F, m, bounds), (), Fraction(1))
    return out


def uniform_poly_law(F: FieldCtx, m: int, bounds: DegreeBounds, next_point,
                     X: np.ndarray | None = None) -> dict[tuple, Fraction]:
    """Same law with the oracle a fully sampled polynomial (all of them
    enumerated, or the rows of ``X``)."""
    exps = bounds.monomials(m)
    if X is None:
        X = enumerate_polys(F, len(exps))
    out: dict[tuple, Fraction] = {}
    total = len(X)

    def walk(rows: np.ndarray, answers: tuple):
        pt = next_point(answers)
        if pt is None:
            out[answers] = out.get(answers, Fraction(0)) + Fraction(len(rows), total)
            return
        vals = F.vdot(X[rows], monomial_row(F, exps, pt))
        for v in np.unique(vals):
            walk(rows[vals == v], answers + (int(v),))

    walk(np.arange(total), ())
    return out


def hybrid_h0_h1_check(params: OSatParams, queriers) -> bool:
    """H0 (PolySim answers) and H1 (a uniformly sampled polynomial with
    C-hat's bounds) give identical answer laws for every adaptive querier."""
    F, m, b = params.F, params.c_vars, params.c_bounds
    return all(polysim_tree_law(F, m, b, f) == uniform_poly_law(F, m, b, f) for f in queriers)


# --- the equivalence claim ----------------------------------------------------

@dataclass
class ClaimReport:
    holds: bool
    satisfiable: bool
    g_zero: bool
    h_zero: bool
    witness_table: tuple | None


def claim_equivalence_report(inst: OSatInstance, params: OSatParams, rng: np.random.Generator | None = None,
                             limit: int = 1 << 16) -> ClaimReport:
    """(i) implicit satisfiability by brute force over all oracles;
    (ii) some A-hat makes g vanish on the grid, over every table of A-hat
    values on H^m2 (g on the grid depends on A-hat only through these);
    (iii) some C-hat makes the H^{3k} sums of h vanish on the grid, over
    commitments to each such table (a family covering every possible vector
    of sums).  The c-sums in (iii) are taken term by term over H^{3k}."""
    if 1 << inst.s > 4:
        raise SearchSpaceTooLarge("claim check enumerates oracles only for 2^s <= 4")
    F = params.F
    rng = rng if rng is not None else np.random.default_rng(0)
    hb, hk = len(params.H) ** params.m2, len(params.H) ** params.k
    if F.order ** hb > limit:
        raise SearchSpaceTooLarge(f"{F.order}^{hb} tables of A-hat values")
    sat = any(osat_check_direct(inst, np.array(A)) for A in itertools.product((0, 1), repeat=1 << inst.s))

    sel = np.array(list(itertools.product(params.H, repeat=params.m1 + 3 * params.m2)), dtype=np.int64)
    abits = np.array(list(itertools.product((0, 1), repeat=3)), dtype=np.int64)
    W = np.concatenate([np.repeat(sel, 8, axis=0), np.tile(abits, (len(sel), 1))], axis=1)
    Bw = params.bhat_w(W)

    def grid_index(cols):
        idx = np.zeros(len(cols), dtype=np.int64)
        for j in range(cols.shape[1]):
            idx = idx * len(params.H) + np.array([params.h_pos[int(v)] for v in cols[:, j]], dtype=np.int64)
        return idx

    b_idx = [grid_index(W[:, params.b_slice(i)]) for i in (1, 2, 3)]
    a_m1 = [F.vsub(W[:, params.a_index(i)], 1) for i in (1, 2, 3)]
    cgrid = np.array(list(itertools.product(params.H, repeat=params.k)), dtype=np.int64)
    L0 = np.ones(hk, dtype=np.int64)
    for j in range(params.k):
        L0 = F.vmul(L0, lagrange_zero(params, cgrid[:, j]))
    bc_points = [b + c for b in itertools.product(params.H, repeat=params.m2)
                 for c in itertools.product(params.H, repeat=params.k)]
    R = np.stack([monomial_row(F, params.c_exps, pt) for pt in bc_points])

    tables = enumerate_polys(F, hb, limit)
    X = commit_batch(np.zeros(hb, dtype=np.int64), params, rng, len(tables))
    com = commitment_system(params)
    X[:, com.pivots] = F.vadd(X[:, com.pivots], F.vdot(tables, com.inv.T))
    Cg = F.vdot(X, R.T).reshape(len(X), hb, hk)
    if not np.array_equal(F.vsum(Cg, axis=2), tables):
        raise AssertionError("commitments do not decommit to their tables")

    g = np.broadcast_to(Bw, (len(X), len(W)))
    for i in range(3):
        g = F.vmul(g, F.vadd(tables[:, b_idx[i]], a_m1[i][None, :]))
    # h on every (w, c1, c2, c3): axes (table, w, c1, c2, c3)
    h = np.broadcast_to(Bw[None, :, None, None, None], (len(X), len(W), hk, hk, hk))
    for i in range(3):
        factor = F.vadd(Cg[:, b_idx[i], :], F.vmul(a_m1[i][:, None], L0[None, :])[None])
        shape = [len(X), len(W), 1, 1, 1]
        shape[2 + i] = hk
        h = F.vmul(h, factor.reshape(shape))
    g_ok = ~g.any(axis=1)
    h_ok = ~F.vsum(h.reshape(len(X), len(W), -1), axis=2).any(axis=1)
    witness = tuple(int(v) for v in tables[np.argmax(h_ok)]) if h_ok.any() else None
    g_zero, h_zero = bool(g_ok.any()), bool(h_ok.any())
    return ClaimReport(sat == g_zero == h_zero, sat, g_zero, h_zero, witness)


def claim_equivalence_bruteforce(inst: OSatInstance, params: OSatParams, rng: np.random.Generator | None = None) -> bool:
    return claim_equivalence_report(inst, params, rng).holds
