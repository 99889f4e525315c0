"""Masked zero-knowledge sumcheck PCPP.

The prover adds a random mask R = Q - Q_rev + sum_i Z_H(X_i) T_i, which sums
to zero over H^m, and proves the sumcheck claim for F + R.  The mask
polynomials are also written out as pi_P(x) = (Q(x), T_1(x), ..., T_m(x)) so
the verifier can reconstruct (F+R)(x) from F(x), pi_P(x) and pi_P(rev x).

Besides the dense prover there is a lazy representation for masks over
exponentially large domains.  Per coordinate, a degree-<=d univariate is
determined by its sum over H together with its values at the remaining
points of a fixed interpolation set; products of these functionals ("atoms")
are independent and uniform for a uniform mask.  Every symbol of the proof is
a short linear form in atoms, which gives both a PRF-backed lazy prover and
an exact simulator that answers by Gaussian elimination over atoms.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .adversary import Adversary, run_adversary
from .errors import DegreeTooHigh, InvalidInstance, PreconditionViolated, SearchSpaceTooLarge
from .field import FieldCtx, FieldSpec
from .ldt import Line, check_field_size, sample_line
from .oracles import Domain, OracleHandle, Transcript, VerifierView, function_oracle, table_oracle
from .poly import (DegreeBounds, MultiPoly, is_low_degree, lagrange_values, lde_from_table, low_degree_rows,
                   monomial_row, poly_random, poly_reverse_vars, upoly_eval, vanishing_coeffs)
from .sumcheck_rsc import SumInstance, rsc_prove, strip_padding, sumcheck_checks

PAD = 2
SUM = -1  # marks a coordinate summed over H in a functional spec


# --- masks and the dense prover -------------------------------------------

@dataclass
class MaskSet:
    Q: MultiPoly
    T: list[MultiPoly]


def mask_bounds(inst: SumInstance) -> tuple[DegreeBounds, list[DegreeBounds]]:
    m, d, h = inst.m, inst.d, len(inst.H)
    if d < h:
        raise InvalidInstance(f"mask terms need d >= |H|, got d={d}, |H|={h}")
    q_b = DegreeBounds.uniform(m, d)
    t_b = [DegreeBounds.individual(*[d - h if j == i else d for j in range(m)]) for i in range(m)]
    return q_b, t_b


def assemble_mask(inst: SumInstance, masks: MaskSet) -> MultiPoly:
    """R = Q - Q_rev + sum_i Z_H(X_i) T_i, homed in individual degree d."""
    z = vanishing_coeffs(inst.F, inst.H)
    R = masks.Q - poly_reverse_vars(masks.Q)
    for i, T in enumerate(masks.T):
        R = R + T.mul_univariate(i, z)
    return R.with_bounds(DegreeBounds.uniform(inst.m, inst.d))


def zksc_mask(inst: SumInstance, rng: np.random.Generator,
              bounds: tuple[DegreeBounds, list[DegreeBounds]] | None = None) -> tuple[MaskSet, MultiPoly]:
    """Sample (Q, T_1..T_m) and return them with R.  ``bounds`` may shrink
    the mask spaces (used to enumerate masks exhaustively in tests)."""
    q_b, t_b = mask_bounds(inst) if bounds is None else bounds
    F, m = inst.F, inst.m
    masks = MaskSet(poly_random(F, m, q_b, rng), [poly_random(F, m, b, rng) for b in t_b])
    return masks, assemble_mask(inst, masks)


@dataclass
class ZkscProof:
    pi_sigma: np.ndarray  # (q,)*(m-1) + (m+1,)
    pi_P: np.ndarray      # (q,)*m + (m+1,)

    def oracles(self, budget=None) -> dict[str, OracleHandle]:
        q = self.pi_P.shape[0]
        m = self.pi_P.ndim - 1
        return {"pi_sigma": table_oracle("pi_sigma", self.pi_sigma, q, m - 1, budget),
                "pi_P": table_oracle("pi_P", self.pi_P, q, m, budget)}


def pad_bundle(table: np.ndarray, pad: int = PAD) -> np.ndarray:
    zeros = np.zeros(table.shape[:-1] + (pad,), dtype=np.int64)
    return np.concatenate([table, zeros], axis=-1)


def mask_table(masks: MaskSet) -> np.ndarray:
    return np.stack([masks.Q.evaluate_grid()] + [T.evaluate_grid() for T in masks.T], axis=-1)


def zksc_prove(inst: SumInstance, F_poly: MultiPoly, rng: np.random.Generator,
               masks: MaskSet | None = None) -> ZkscProof:
    if F_poly.m != inst.m or max(F_poly.individual_degrees()) > inst.d:
        raise DegreeTooHigh(f"input must have {inst.m} variables and individual degree <= {inst.d}")
    if masks is None:
        masks, R = zksc_mask(inst, rng)
    else:
        R = assemble_mask(inst, masks)
    G = F_poly.with_bounds(DegreeBounds.uniform(inst.m, inst.d)) + R
    pi_sigma = pad_bundle(rsc_prove(inst, G, require_total_degree=False).table)
    return ZkscProof(pi_sigma, mask_table(masks))


# --- verifier --------------------------------------------------------------

@dataclass(frozen=True)
class ZkscCoins:
    c: tuple[int, ...]
    f_lines: tuple[Line, ...] = ()
    p_lines: tuple[Line, ...] = ()

    @classmethod
    def sample(cls, inst: SumInstance, rng: np.random.Generator, f_reps: int = 1, p_reps: int = 1) -> "ZkscCoins":
        c = tuple(int(v) for v in inst.F.random(rng, inst.m - 1))
        f_lines = tuple(sample_line(inst.F, inst.m, rng) for _ in range(f_reps))
        p_lines = tuple(sample_line(inst.F, inst.m, rng) for _ in range(p_reps))
        return cls(c, f_lines, p_lines)


def reverse(x: Sequence[int]) -> tuple[int, ...]:
    return tuple(int(v) for v in reversed(tuple(x)))


def zksc_query_points(inst: SumInstance, coins: ZkscCoins) -> list[tuple[str, tuple]]:
    """The non-adaptive query list, in view order."""
    q, m = inst.q, inst.m
    prefix = tuple(coins.c[: m - 2])
    out = [("pi_sigma", prefix + (a,)) for a in range(q)]
    for a in range(q):
        x = tuple(coins.c) + (a,)
        out += [("F", x), ("pi_P", x), ("pi_P", reverse(x))]
    for line in coins.f_lines:
        out += [("F", tuple(int(v) for v in p)) for p in line.points(inst.F)]
    for line in coins.p_lines:
        out += [("pi_P", tuple(int(v) for v in p)) for p in line.points(inst.F)]
    return out


def synthesize(inst: SumInstance, x: Sequence[int], f_val: int, p_sym: Sequence[int], p_rev: Sequence[int]) -> int:
    """(F+R)(x) = F(x) + Q(x) - Q(rev x) + sum_i Z_H(x_i) T_i(x)."""
    F = inst.F
    z = vanishing_coeffs(F, inst.H)
    v = F.add(int(f_val), F.sub(int(p_sym[0]), int(p_rev[0])))
    for i, xi in enumerate(x):
        v = F.add(v, F.mul(upoly_eval(F, z, int(xi)), int(p_sym[i + 1])))
    return v


def _sym(s) -> tuple:
    return (s,) if isinstance(s, int) else tuple(s)


def zksc_decide(inst: SumInstance, answers: Sequence, coins: ZkscCoins) -> str | None:
    """Decision predicate on the answer vector; None means accept."""
    F, q, m, d = inst.F, inst.q, inst.m, inst.d
    pi = strip_padding(answers[:q], m - 1, PAD)
    if pi is None:
        return "padding"
    trip = answers[q: 4 * q]
    for s in trip[1::3] + trip[2::3]:
        if len(_sym(s)) != m + 1:
            return "width[pi_P]"
    fr = [synthesize(inst, tuple(coins.c) + (a,), trip[3 * a], _sym(trip[3 * a + 1]), _sym(trip[3 * a + 2]))
          for a in range(q)]
    why = sumcheck_checks(inst, pi, fr, coins.c)
    if why:
        return why
    pos = 4 * q
    for r in range(len(coins.f_lines)):
        if not is_low_degree(F, np.asarray(answers[pos: pos + q], dtype=np.int64), d):
            return f"ldt-F[{r}]"
        pos += q
    for r in range(len(coins.p_lines)):
        vals = np.array([_sym(s) for s in answers[pos: pos + q]], dtype=np.int64)
        if not low_degree_rows(F, vals.T, m * d).all():
            return f"ldt-P[{r}]"
        pos += q
    return None


@dataclass
class ZkscResult:
    verdict: bool
    failed: str | None
    view: VerifierView
    answers: list = field(default_factory=list)


def zksc_verify(inst: SumInstance, F_oracle: OracleHandle, pi_sigma: OracleHandle, pi_P: OracleHandle,
                coins: ZkscCoins, transcript: Transcript | None = None,
                allow_small_field: bool = False, record_input: bool = True) -> ZkscResult:
    """Emulate the robust sumcheck verifier on F+R, test F at degree d and
    pi_P (as a vector oracle) at degree m*d.  The vector test's proximity
    parameter is delta_RM/8; with full-line reads it does not change the
    decision.  With ``record_input`` False the input reads are left out of
    the transcript (used when the input is itself computed from other
    oracles whose reads are recorded)."""
    check_field_size(inst.F, inst.m + 1, allow_small_field)
    t = transcript if transcript is not None else Transcript()
    handles = {"F": F_oracle, "pi_sigma": pi_sigma, "pi_P": pi_P}
    for oid, h in handles.items():
        if oid != "F" or record_input:
            h.record_to(t)
    answers = [handles[oid].query(x) for oid, x in zksc_query_points(inst, coins)]
    why = zksc_decide(inst, answers, coins)
    return ZkscResult(why is None, why, VerifierView.from_transcript(coins, t), answers)


# --- reference simulator ----------------------------------------------------

def read_input_poly(inst: SumInstance, F_oracle: OracleHandle) -> MultiPoly:
    """Recover F's coefficients from a full read of its table."""
    q, m = inst.q, inst.m
    table = np.empty((q,) * m, dtype=np.int64)
    for x in itertools.product(range(q), repeat=m):
        table[x] = F_oracle.peek(x)
    p = lde_from_table(inst.F, table, range(q))
    return p.with_bounds(DegreeBounds.uniform(m, inst.d))


def zksc_simulate_reference(inst: SumInstance, F_oracle: OracleHandle, adversary: Adversary,
                            rng: np.random.Generator, coins=None) -> VerifierView:
    """Answer the adversary from a freshly sampled honest proof.  Input
    queries go to F itself."""
    proof = zksc_prove(inst, read_input_poly(inst, F_oracle), rng)
    oracles = proof.oracles()
    oracles["F"] = F_oracle
    return run_adversary(adversary, oracles, coins, rng)


# --- sum independence -----------------------------------------------------

SUM_INDEP_LIMIT = 1 << 16


def sum_indep_check(F: FieldCtx, m: int, k: int, H: Sequence[int], d: int, d_prime: int,
                    queries: Sequence[Sequence[int]] | None = None) -> bool:
    """Enumerate every Z in F[X_1..X_m, Y_1..Y_k] (deg_X <= d, deg_Y <= d')
    and check that the H^k-sums (sum_y Z(a, y))_a are independent of the
    answers (Z(q))_{q in Q}.  With ``queries`` None, every query set of size
    |H|^k - 1 is checked."""
    H = [int(h) for h in H]
    if d_prime < 2 * (len(H) - 1):
        raise PreconditionViolated(f"need d' >= 2(|H|-1) = {2 * (len(H) - 1)}, got {d_prime}")
    limit = len(H) ** k
    n_vars = m + k
    bounds = DegreeBounds.individual(*([d] * m + [d_prime] * k))
    exps = bounds.monomials(n_vars)
    q = F.order
    if q ** len(exps) > SUM_INDEP_LIMIT:
        raise SearchSpaceTooLarge(f"{q}^{len(exps)} polynomials to enumerate")
    if queries is None:
        pts = list(itertools.product(range(q), repeat=n_vars))
        sets = itertools.combinations(pts, limit - 1)
    else:
        if len(queries) >= limit:
            raise PreconditionViolated(f"|Q| = {len(queries)} must be below |H|^k = {limit}")
        sets = [[tuple(int(v) for v in p) for p in queries]]
    idx = np.arange(q ** len(exps), dtype=np.int64)
    C = np.stack([(idx // q ** j) % q for j in range(len(exps))], axis=1)
    sum_rows = []
    for a in itertools.product(range(q), repeat=m):
        row = np.zeros(len(exps), dtype=np.int64)
        for y in itertools.product(H, repeat=k):
            row = F.vadd(row, monomial_row(F, exps, a + y))
        sum_rows.append(row)
    sums = F.vdot(C, np.stack(sum_rows).T)
    s_key = _encode_rows(sums, q)
    for Qs in sets:
        if not Qs:
            continue
        ans = F.vdot(C, np.stack([monomial_row(F, exps, p) for p in Qs]).T)
        if not _independent(s_key, _encode_rows(ans, q)):
            return False
    return True


def _encode_rows(M: np.ndarray, q: int) -> np.ndarray:
    out = np.zeros(M.shape[0], dtype=object)
    for j in range(M.shape[1]):
        out = out * q + M[:, j].astype(object)
    return out


def _independent(a: np.ndarray, b: np.ndarray) -> bool:
    """Exact test that the empirical joint law of (a, b) over the enumerated
    space is the product of its marginals."""
    n = len(a)
    _, ia, ca = np.unique(a, return_inverse=True, return_counts=True)
    _, ib, cb = np.unique(b, return_inverse=True, return_counts=True)
    joint = np.zeros((len(ca), len(cb)), dtype=np.int64)
    np.add.at(joint, (ia, ib), 1)
    return bool(np.array_equal(joint * n, np.outer(ca, cb)))


# --- atoms: the lazy mask representation ------------------------------------

@lru_cache(maxsize=None)
def _slot_points(spec: FieldSpec, d: int, H: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Interpolation sets for the two coordinate kinds: (H + first d+1-|H|
    points outside H) for degree d, and (first d-|H|+1 points outside H) for
    the reduced coordinate of T_i."""
    F = FieldCtx(spec)
    outside = [x for x in range(F.order) if x not in H]
    return tuple(H) + tuple(outside[: d + 1 - len(H)]), tuple(outside[: d - len(H) + 1])


@lru_cache(maxsize=None)
def _coord_expansion(spec: FieldSpec, d: int, H: tuple[int, ...], kind: str, v: int) -> tuple[tuple[int, int], ...]:
    """Coefficients of one coordinate functional in the atom slots.

    kind "full": degree-d coordinate; slot H[0] stands for the H-sum.
    kind "cut": the degree d-|H| coordinate of T_i; slots are point values.
    kind "input": arbitrary functions; slot H[0] is the H-sum, others are
    point values, and the value at H[0] is the sum minus the other H values.
    """
    F = FieldCtx(spec)
    h0 = H[0]
    if kind == "input":
        if v == SUM:
            return ((h0, 1),)
        if v == h0:
            return ((h0, 1),) + tuple((h, F.neg(1)) for h in H[1:])
        return ((v, 1),)
    full, cut = _slot_points(spec, d, H)
    if kind == "cut":
        if v == SUM:
            raise ValueError("the reduced coordinate of T_i is never summed")
        L = lagrange_values(F, list(cut), [v])[0]
        return tuple((s, int(c)) for s, c in zip(cut, L) if c)
    if v == SUM:
        return ((h0, 1),)
    L = [int(c) for c in lagrange_values(F, list(full), [v])[0]]
    out = {h0: L[0]}
    for h, c in zip(H[1:], L[1:len(H)]):
        out[h] = F.sub(c, L[0])
    for e, c in zip(full[len(H):], L[len(H):]):
        out[e] = c
    return tuple((s, c) for s, c in out.items() if c)


def _tensor(F: FieldCtx, parts: list) -> dict[tuple, int]:
    """Product of per-coordinate expansions as a dict keyed by slot tuples."""
    base: list = []
    multi: list[int] = []
    c0 = 1
    for j, part in enumerate(parts):
        if len(part) == 1:
            s, c = part[0]
            base.append(s)
            if c != 1:
                c0 = F.mul(c0, c)
        else:
            base.append(None)
            multi.append(j)
    if not multi:
        return {tuple(base): c0} if c0 else {}
    out: dict[tuple, int] = {}
    for combo in itertools.product(*(parts[j] for j in multi)):
        key = list(base)
        c = c0
        for j, (s, ci) in zip(multi, combo):
            key[j] = s
            c = F.mul(c, ci)
        if c:
            key = tuple(key)
            out[key] = F.add(out.get(key, 0), c)
    return {k: v for k, v in out.items() if v}


def _axpy(F: FieldCtx, acc: dict, c: int, other: dict) -> None:
    """acc += c * other, in place, dropping zeros."""
    if not c:
        return
    for k, v in other.items():
        nv = F.add(acc.get(k, 0), F.mul(c, v))
        if nv:
            acc[k] = nv
        else:
            acc.pop(k, None)


class MaskAlgebra:
    """Linear forms of proof symbols over mask atoms and input functionals.

    Atom keys are (kind, slots): kind 0 for Q, kind i (1-based) for T_i.
    Input functionals are keyed by slot tuples in the "input" coordinate
    basis (H[0] = sum over H, any other value = evaluation there).
    """

    def __init__(self, F: FieldCtx, m: int, d: int, H: Sequence[int]):
        self.F, self.m, self.d = F, m, d
        self.H = tuple(int(h) for h in H)
        if d < len(self.H) or d >= F.order:
            raise InvalidInstance("mask degree must satisfy |H| <= d < |F|")
        self.z = vanishing_coeffs(F, self.H)
        self._exp_cache: dict = {}

    def _exp(self, kind: str, v: int):
        key = (kind, v)
        out = self._exp_cache.get(key)
        if out is None:
            out = self._exp_cache[key] = _coord_expansion(self.F.spec, self.d, self.H, kind, int(v))
        return out

    def q_form(self, spec: Sequence[int]) -> dict:
        return {(0, k): c for k, c in _tensor(self.F, [self._exp("full", v) for v in spec]).items()}

    def t_form(self, i: int, spec: Sequence[int]) -> dict:
        parts = [self._exp("cut" if j == i - 1 else "full", v) for j, v in enumerate(spec)]
        return {(i, k): c for k, c in _tensor(self.F, parts).items()}

    def input_form(self, spec: Sequence[int]) -> dict:
        return _tensor(self.F, [self._exp("input", v) for v in spec])

    def sigma_forms(self, idx: Sequence[int]) -> list[tuple[dict, dict]]:
        """(atom form, input form) of each layer coordinate of pi_Sigma at
        (c_1..c_{m-2}, alpha)."""
        F, m = self.F, self.m
        idx = tuple(int(v) for v in idx)
        out = []
        for i in range(1, m):
            prefix = idx[: i - 1] + (idx[-1],)
            fwd = prefix + (SUM,) * (m - i)
            form = self.q_form(fwd)
            _axpy(F, form, F.neg(1), self.q_form((SUM,) * (m - i) + reverse(prefix)))
            for j in range(1, i + 1):
                zj = upoly_eval(F, self.z, prefix[j - 1])
                if zj:
                    _axpy(F, form, zj, self.t_form(j, fwd))
            out.append((form, self.input_form(fwd)))
        return out

    def p_forms(self, x: Sequence[int]) -> list[dict]:
        x = tuple(int(v) for v in x)
        return [self.q_form(x)] + [self.t_form(i, x) for i in range(1, self.m + 1)]


def atom_values_from_masks(alg: MaskAlgebra, masks: MaskSet, keys) -> list[int]:
    """Atom values of dense masks by direct summation (a test oracle for
    the expansion tables)."""
    F, H = alg.F, alg.H
    out = []
    for kind, slots in keys:
        poly = masks.Q if kind == 0 else masks.T[kind - 1]
        summed = [j for j, s in enumerate(slots) if s == H[0] and not (kind and j == kind - 1)]
        acc = 0
        for hs in itertools.product(H, repeat=len(summed)):
            pt = list(slots)
            for j, h in zip(summed, hs):
                pt[j] = h
            acc = F.add(acc, poly(pt))
        out.append(acc)
    return out


# --- atom sources -------------------------------------------------------------

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def splitmix64(x) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = np.asarray(x, dtype=np.uint64) + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def key_hash(key) -> int:
    """Stable 64-bit hash of a nested tuple of small ints."""
    return int.from_bytes(hashlib.blake2b(repr(key).encode(), digest_size=8).digest(), "little")


def prf_field(F: FieldCtx, seeds: np.ndarray, khash: int) -> np.ndarray:
    """Field elements PRF(seed, key) for an array of seeds.  Exactly uniform
    bits for binary fields; for prime fields the reduction bias is below
    |F| / 2^64."""
    z = splitmix64(np.asarray(seeds, dtype=np.uint64) ^ np.asarray(khash, dtype=np.uint64))
    if F.binary:
        return (z & np.uint64(F.order - 1)).astype(np.int64)
    return (z % np.uint64(F.order)).astype(np.int64)


class PrfAtoms:
    """Atom values derived from per-trial 64-bit seeds."""

    def __init__(self, F: FieldCtx, seeds):
        self.F = F
        self.seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
        self._h: dict = {}

    @property
    def n(self) -> int:
        return len(self.seeds)

    def get(self, keys) -> np.ndarray:
        hs = np.empty(len(keys), dtype=np.uint64)
        for r, k in enumerate(keys):
            h = self._h.get(k)
            if h is None:
                h = self._h[k] = key_hash(k)
            hs[r] = h
        return prf_field(self.F, self.seeds[None, :], hs[:, None])

    def take(self, sel) -> "PrfAtoms":
        out = PrfAtoms(self.F, self.seeds[np.asarray(sel)])
        out._h = self._h
        return out


class TableAtoms:
    """Atom values from an explicit dict (dense masks in tests)."""

    def __init__(self, F: FieldCtx, values: dict):
        self.F = F
        self.values = values
        self.n = 1

    def get(self, keys) -> np.ndarray:
        return np.array([[self.values[k]] for k in keys], dtype=np.int64).reshape(len(keys), 1)


def eval_form(F: FieldCtx, form: dict, atoms) -> np.ndarray:
    """Evaluate an atom form against an atom source: array over trials."""
    if not form:
        return np.zeros(atoms.n, dtype=np.int64)
    keys = list(form)
    A = atoms.get(keys)
    coefs = np.array([form[k] for k in keys], dtype=np.int64)[:, None]
    return F.vsum(F.vmul(A, coefs), axis=0)


class LazyMaskedProof:
    """pi_Sigma and pi_P of the masked sumcheck, computed symbol by symbol.

    ``input_partial(spec)`` returns the input's partial sum for a spec of
    literal values and SUM markers (array over trials).
    """

    def __init__(self, alg: MaskAlgebra, atoms, input_partial: Callable[[tuple], np.ndarray]):
        self.alg = alg
        self.atoms = atoms
        self.input_partial = input_partial

    def pi_sigma(self, idx) -> np.ndarray:
        """(n, m+1) array: the bundle at idx for every trial."""
        F, m = self.alg.F, self.alg.m
        idx = tuple(int(v) for v in idx)
        cols = []
        for i, (form, _) in enumerate(self.alg.sigma_forms(idx), start=1):
            prefix = idx[: i - 1] + (idx[-1],)
            fpart = self.input_partial(prefix + (SUM,) * (m - i))
            cols.append(F.vadd(eval_form(F, form, self.atoms), fpart))
        zero = np.zeros(self.atoms.n, dtype=np.int64)
        return np.stack(cols + [zero] * PAD, axis=1)

    def pi_P(self, x) -> np.ndarray:
        F = self.alg.F
        return np.stack([eval_form(F, f, self.atoms) for f in self.alg.p_forms(x)], axis=1)


# --- the exact simulator --------------------------------------------------

class MaskedSumcheckSim:
    """Exact simulator for the masked sumcheck proof, batched over trials.

    Each answered coordinate is (atom form) + (input form).  Forms are
    reduced against earlier ones; if the atom part survives, the answer is
    uniform and independent of everything so far.  Otherwise it equals the
    matching combination of earlier answers plus the residual input form,
    which ``input_term(slots)`` evaluates (an array over trials).
    """

    def __init__(self, alg: MaskAlgebra, rng: np.random.Generator, n: int):
        self.alg = alg
        self.rng = rng
        self.n = n
        self.basis: list[tuple] = []  # (pivot key, atom form, input form)
        self.vals: list[np.ndarray] = []
        self.cache: dict = {}

    def take(self, sel) -> "MaskedSumcheckSim":
        sel = np.asarray(sel)
        out = MaskedSumcheckSim(self.alg, self.rng, int(sel.size))
        out.basis = list(self.basis)
        out.vals = [v[sel] for v in self.vals]
        out.cache = {k: v[sel] for k, v in self.cache.items()}
        return out

    def _answer(self, form: dict, inp: dict, input_term) -> np.ndarray:
        F = self.alg.F
        form, inp = dict(form), dict(inp)
        acc = np.zeros(self.n, dtype=np.int64)
        for (piv, bform, binp), val in zip(self.basis, self.vals):
            c = form.get(piv, 0)
            if c:
                c = F.mul(c, F.inv(bform[piv]))
                _axpy(F, form, F.neg(c), bform)
                _axpy(F, inp, F.neg(c), binp)
                acc = F.vadd(acc, F.vmul(val, c))
        if form:
            out = F.random(self.rng, self.n)
            piv = next(iter(form))
            self.basis.append((piv, form, inp))
            self.vals.append(F.vsub(out, acc))
            return out
        for slots, c in inp.items():
            acc = F.vadd(acc, F.vmul(input_term(slots), c))
        return acc

    def pi_sigma(self, idx, input_term) -> np.ndarray:
        idx = tuple(int(v) for v in idx)
        key = ("pi_sigma", idx)
        if key not in self.cache:
            cols = [self._answer(f, i, input_term) for f, i in self.alg.sigma_forms(idx)]
            zero = np.zeros(self.n, dtype=np.int64)
            self.cache[key] = np.stack(cols + [zero] * PAD, axis=1)
        return self.cache[key]

    def pi_P(self, x, input_term) -> np.ndarray:
        x = tuple(int(v) for v in x)
        key = ("pi_P", x)
        if key not in self.cache:
            self.cache[key] = np.stack([self._answer(f, {}, input_term) for f in self.alg.p_forms(x)], axis=1)
        return self.cache[key]


def input_term_by_points(F: FieldCtx, H: Sequence[int], gamma: int,
                         point: Callable[[tuple], np.ndarray], n: int) -> Callable[[tuple], np.ndarray]:
    """Evaluate an input functional (slot tuple) by summing point values;
    the full H^m sum is the claimed value gamma."""
    H = tuple(int(h) for h in H)

    def term(slots):
        summed = [j for j, s in enumerate(slots) if s == H[0]]
        if len(summed) == len(slots):
            return np.full(n, gamma, dtype=np.int64)
        acc = np.zeros(n, dtype=np.int64)
        for hs in itertools.product(H, repeat=len(summed)):
            pt = list(slots)
            for j, h in zip(summed, hs):
                pt[j] = h
            acc = F.vadd(acc, point(tuple(pt)))
        return acc

    return term


def zksc_simulate_exact(inst: SumInstance, F_oracle: OracleHandle, adversary: Adversary,
                        rng: np.random.Generator, coins=None) -> VerifierView:
    """Single-trial exact simulation with point queries to the input."""
    alg = MaskAlgebra(inst.F, inst.m, inst.d, inst.H)
    sim = MaskedSumcheckSim(alg, rng, 1)
    point = lambda x: np.array([F_oracle.query(x)], dtype=np.int64)
    term = input_term_by_points(inst.F, inst.H, inst.gamma, point, 1)
    q, m = inst.q, inst.m
    oracles = {
        "pi_sigma": function_oracle("pi_sigma", lambda i: sim.pi_sigma(i, term)[0], Domain.grid(q, m - 1), m + 1),
        "pi_P": function_oracle("pi_P", lambda x: sim.pi_P(x, term)[0], Domain.grid(q, m), m + 1),
        "F": F_oracle,
    }
    return run_adversary(adversary, oracles, coins, rng)
