"""Robust sumcheck PCP of proximity over the bundled alphabet F^{m-1}.

The proof symbol at (c_1..c_{m-2}, alpha) bundles every layer's partial sum
polynomial restricted to the verifier's axis-parallel line:
``(g_1(alpha), g_2(c_1, alpha), ..., g_{m-1}(c_1..c_{m-2}, alpha))``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegreeTooHigh, InvalidInstance
from .field import FieldCtx
from .ldt import Line, sample_line
from .oracles import Distance, OracleHandle, Transcript, VerifierView, distance_to_accepting, table_oracle
from .poly import (MultiPoly, is_low_degree, mode_product, power_sums, power_table, sum_over_grid,
                   univariate_fit_check, vandermonde)


@dataclass(frozen=True)
class SumInstance:
    F: FieldCtx
    m: int
    d: int
    H: tuple[int, ...]
    gamma: int
    delta: Fraction = Fraction(1, 2)
    strict: bool = True

    def __post_init__(self):
        object.__setattr__(self, "H", tuple(int(h) for h in self.H))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.m < 2:
            raise InvalidInstance("sumcheck instances need m >= 2")
        if len(set(self.H)) != len(self.H) or not self.H:
            raise InvalidInstance("H must be a nonempty set of distinct elements")
        if self.d >= self.F.order:
            raise InvalidInstance("degree must be below the field size")
        if self.strict:
            if self.d < len(self.H) + 1:
                raise InvalidInstance(f"need d >= |H|+1, got d={self.d}, |H|={len(self.H)}")
            if Fraction(self.m * self.d, self.F.order) >= self.delta:
                raise InvalidInstance(f"need m*d/|F| < delta: {self.m}*{self.d}/{self.F.order} >= {self.delta}")

    @property
    def q(self) -> int:
        return self.F.order

    @property
    def delta_rm(self) -> Fraction:
        return min(self.delta, Fraction(1, 5))

    def with_gamma(self, gamma: int) -> "SumInstance":
        return SumInstance(self.F, self.m, self.d, self.H, gamma, self.delta, self.strict)

    def grid_sum(self, p: MultiPoly) -> int:
        return sum_over_grid(p, self.H, range(self.m))

    def contains(self, p: MultiPoly) -> bool:
        """Membership in Sum: total degree <= d and grid sum equal to gamma."""
        return p.total_degree() <= self.d and self.grid_sum(p) == self.gamma


# --- prover ---------------------------------------------------------------

def partial_sum_grids(F: FieldCtx, p: MultiPoly, H: Sequence[int]) -> list[np.ndarray]:
    """For i = 1..m-1, the full evaluation grid of g_i on F^i (shape (q,)*i)."""
    m = p.m
    elems = F.elements()
    out = []
    T = p.coeffs
    sums = []
    # coefficient tensors of g_i, from g_{m-1} down to g_1
    for j in range(m - 1, 0, -1):
        s = power_sums(F, H, T.shape[j])
        T = np.squeeze(mode_product(F, T, s.reshape(1, -1), j), axis=j)
        sums.append(T)
    for i, coeffs in enumerate(reversed(sums), start=1):
        G = coeffs
        for j in range(i):
            G = mode_product(F, G, vandermonde(F, elems, G.shape[j]), j)
        out.append(G)
    return out


@dataclass
class RscProof:
    table: np.ndarray  # (q,)*(m-1) + (m-1,)

    def oracle(self, oid: str = "pi", budget=None) -> OracleHandle:
        q = self.table.shape[0]
        return table_oracle(oid, self.table, q, self.table.ndim - 1, budget)


def bundle_from_partial_sums(F: FieldCtx, m: int, gs: list[np.ndarray]) -> np.ndarray:
    q = F.order
    table = np.empty((q,) * (m - 1) + (m - 1,), dtype=np.int64)
    for i, G in enumerate(gs, start=1):
        # coordinate i depends on (c_1..c_{i-1}) and the last slot alpha
        shape = list(G.shape[:-1]) + [1] * (m - 1 - i) + [q]
        table[..., i - 1] = np.broadcast_to(G.reshape(shape), (q,) * (m - 1))
    return table


def rsc_prove(inst: SumInstance, p: MultiPoly, require_total_degree: bool = True) -> RscProof:
    if p.m != inst.m:
        raise DegreeTooHigh(f"polynomial has {p.m} variables, instance has {inst.m}")
    if max(p.individual_degrees()) > inst.d or (require_total_degree and p.total_degree() > inst.d):
        raise DegreeTooHigh(f"polynomial exceeds degree {inst.d}")
    gs = partial_sum_grids(inst.F, p, inst.H)
    return RscProof(bundle_from_partial_sums(inst.F, inst.m, gs))


# --- verifier -------------------------------------------------------------

@dataclass(frozen=True)
class RscCoins:
    c: tuple[int, ...]
    lines: tuple[Line, ...] = ()

    @classmethod
    def sample(cls, inst: SumInstance, rng: np.random.Generator, ldt_reps: int = 2) -> "RscCoins":
        c = tuple(int(v) for v in inst.F.random(rng, inst.m - 1))
        lines = tuple(sample_line(inst.F, inst.m, rng) for _ in range(ldt_reps))
        return cls(c, lines)


def sumcheck_checks(inst: SumInstance, pi_axis: Sequence[Sequence[int]], f_axis: Sequence[int],
                    c: Sequence[int]) -> str | None:
    """Steps 4-7 on the axis reads.  ``pi_axis[alpha]`` is the unpadded
    bundle at alpha; ``f_axis[alpha] = F(c, alpha)``.  Returns the name of the
    first failing check, or None."""
    F, m, H = inst.F, inst.m, inst.H
    P = np.asarray(pi_axis, dtype=np.int64).reshape(inst.q, m - 1)
    for i in range(m - 1):
        if not is_low_degree(F, P[:, i], inst.d):
            return f"degree[g{i + 1}]"
    if F.sum(int(P[h, 0]) for h in H) != inst.gamma:
        return "sum[g1]"
    for i in range(1, m - 1):
        if F.sum(int(P[h, i]) for h in H) != int(P[c[i - 1], i - 1]):
            return f"chain[g{i + 1}]"
    fa = np.asarray(f_axis, dtype=np.int64).reshape(-1)
    if F.sum(int(fa[h]) for h in H) != int(P[c[m - 2], m - 2]):
        return "final[F]"
    return None


@dataclass
class RscLayout:
    """Positions of the subtests inside the flat answer vector."""
    q: int
    reps: int
    pad: int = 0

    @property
    def n(self) -> int:
        return 2 * self.q + self.reps * self.q

    def split(self, answers: Sequence):
        q = self.q
        pi = list(answers[:q])
        fa = list(answers[q:2 * q])
        lines = [list(answers[2 * q + r * q: 2 * q + (r + 1) * q]) for r in range(self.reps)]
        return pi, fa, lines


def strip_padding(symbols, width: int, pad: int):
    """Drop ``pad`` trailing entries from each symbol; None if any is nonzero."""
    out = []
    for s in symbols:
        s = tuple(s) if not isinstance(s, int) else (s,)
        if len(s) != width + pad or any(s[width:]):
            return None
        out.append(s[:width])
    return out


def rsc_decide(inst: SumInstance, answers: Sequence, coins: RscCoins, pad: int = 0) -> str | None:
    """The decision predicate D(x, answers; coins).  None means accept."""
    layout = RscLayout(inst.q, len(coins.lines), pad)
    pi, fa, lines = layout.split(answers)
    pi = strip_padding(pi, inst.m - 1, pad)
    if pi is None:
        return "padding"
    why = sumcheck_checks(inst, pi, fa, coins.c)
    if why:
        return why
    for r, vals in enumerate(lines):
        if not is_low_degree(inst.F, np.asarray(vals, dtype=np.int64), inst.d):
            return f"ldt[{r}]"
    return None


@dataclass
class RscResult:
    verdict: bool
    failed: str | None
    view: VerifierView
    answers: list = field(default_factory=list)


def rsc_axis_points(inst: SumInstance, coins: RscCoins):
    q = inst.q
    prefix = tuple(coins.c[: inst.m - 2])
    pi_pts = [prefix + (a,) for a in range(q)]
    f_pts = [tuple(coins.c) + (a,) for a in range(q)]
    return pi_pts, f_pts


def rsc_verify(inst: SumInstance, F_oracle: OracleHandle, pi_oracle: OracleHandle, coins: RscCoins,
               pad: int = 0, transcript: Transcript | None = None) -> RscResult:
    t = transcript if transcript is not None else Transcript()
    F_oracle.record_to(t)
    pi_oracle.record_to(t)
    pi_pts, f_pts = rsc_axis_points(inst, coins)
    answers = [pi_oracle.query(x) for x in pi_pts]
    answers += [F_oracle.query(x) for x in f_pts]
    for line in coins.lines:
        answers += [F_oracle.query(tuple(int(v) for v in p)) for p in line.points(inst.F)]
    why = rsc_decide(inst, answers, coins, pad)
    return RscResult(why is None, why, VerifierView.from_transcript(coins, t), answers)


# --- view distance --------------------------------------------------------

def _line_repair_cost(F: FieldCtx, vals, d: int) -> int:
    r = univariate_fit_check(F, np.asarray(vals, dtype=np.int64), d)
    return int(r.distance * F.order)


def _sumcheck_part_cost_m2(inst: SumInstance, pi, fa, c) -> int | None:
    """Exact minimum number of changed symbols among the (pi axis, F axis)
    reads so that steps 4-7 pass, for m = 2 (pi symbols are scalars)."""
    F, q, d, H = inst.F, inst.q, inst.d, inst.H
    if q ** d > (1 << 20):
        return None
    pi_vals = np.array([s[0] if not isinstance(s, int) else s for s in pi], dtype=np.int64)
    fsum = F.sum(int(fa[h]) for h in H)
    # candidates: degree <= d with sum over H equal to gamma.  Parametrize
    # by coefficients c_1..c_d and solve for c_0 (|H| is a unit unless
    # char | |H|; then sum constraint fixes another coefficient).
    s = power_sums(F, H, d + 1)
    piv = next((e for e in range(d + 1) if s[e] != 0), None)
    V = power_table(F, np.arange(q), d + 1)  # (q, d+1)
    free = [e for e in range(d + 1) if e != piv]
    best = None
    n_free = len(free)
    total = q ** n_free
    batch = 1 << 14
    for start in range(0, total, batch):
        idx = np.arange(start, min(total, start + batch), dtype=np.int64)
        C = np.zeros((len(idx), d + 1), dtype=np.int64)
        for j, e in enumerate(free):
            C[:, e] = (idx // q ** j) % q
        if piv is None:
            if inst.gamma != 0:
                return None
        else:
            rest = F.vdot(C, s.reshape(-1))
            C[:, piv] = F.vmul(F.vsub(inst.gamma, rest), F.inv(int(s[piv])))
        vals = F.vdot(C, V.T)  # (batch, q)
        cost = np.sum(vals != pi_vals[None, :], axis=1) + (vals[:, c[0]] != fsum)
        b = int(cost.min())
        best = b if best is None else min(best, b)
    return best


def rsc_view_distance(inst: SumInstance, answers: Sequence, coins: RscCoins, pad: int = 0,
                      strategy: str = "structured") -> Distance:
    """Distance of a realized view to Acc(V(x; coins)).

    structured: the sumcheck reads and each LDT line occupy disjoint
    positions and D is a conjunction over them, so the minimum repair is the
    sum of per-part minima.  Each LDT line part is exact (nearest univariate
    fit); the sumcheck part is exact for m = 2 by enumerating every
    admissible g_1, and otherwise bounded by re-deriving the deepest layer.
    exhaustive: radius search over the full view.
    """
    n = RscLayout(inst.q, len(coins.lines), pad).n
    if strategy == "exhaustive":
        q = inst.q
        sym_alpha = [tuple(v) + (0,) * pad for v in itertools.product(range(q), repeat=inst.m - 1)]
        alpha = lambda i: sym_alpha if i < q else range(q)
        return distance_to_accepting(answers, lambda x, a, mu: rsc_decide(inst, a, mu, pad) is None,
                                     inst, coins, strategy="exhaustive", alphabet=alpha)
    layout = RscLayout(inst.q, len(coins.lines), pad)
    pi, fa, lines = layout.split(answers)
    cost, exact = 0, True
    for vals in lines:
        cost += _line_repair_cost(inst.F, vals, inst.d)
    stripped = strip_padding(pi, inst.m - 1, pad)
    bad_pad = [i for i, s in enumerate(pi) if any((tuple(s) if not isinstance(s, int) else (s,))[inst.m - 1:])]
    if stripped is None:
        # zero the padding first; those symbols are changed anyway, so a
        # repair may also fix their payload at no extra cost
        stripped = [tuple(s)[: inst.m - 1] for s in pi]
    if sumcheck_checks(inst, stripped, fa, coins.c) is None:
        part = len(bad_pad)
    elif inst.m == 2:
        part = _sumcheck_part_cost_m2(inst, stripped, fa, coins.c)
        if part is None:
            part, exact = layout.q + 1, False
        elif bad_pad:
            # padded positions are paid for already; allow free payload edits there
            part = _sumcheck_cost_with_free(inst, stripped, fa, coins.c, set(bad_pad))
    else:
        part, exact = _sumcheck_part_upper(inst, stripped, fa, coins.c), False
        part = min(layout.q, part + len(bad_pad))
    cost += part
    return Distance(Fraction(min(cost, n), n), exact)


def _sumcheck_cost_with_free(inst: SumInstance, pi, fa, c, free_pos: set) -> int:
    """m = 2 cost when positions in ``free_pos`` must change anyway."""
    F, q, d, H = inst.F, inst.q, inst.d, inst.H
    pi_vals = np.array([s[0] for s in pi], dtype=np.int64)
    fsum = F.sum(int(fa[h]) for h in H)
    s = power_sums(F, H, d + 1)
    piv = next(e for e in range(d + 1) if s[e] != 0)
    V = power_table(F, np.arange(q), d + 1)
    free = [e for e in range(d + 1) if e != piv]
    mask = np.array([i not in free_pos for i in range(q)])
    idx = np.arange(q ** len(free), dtype=np.int64)
    C = np.zeros((len(idx), d + 1), dtype=np.int64)
    for j, e in enumerate(free):
        C[:, e] = (idx // q ** j) % q
    C[:, piv] = F.vmul(F.vsub(inst.gamma, F.vdot(C, s.reshape(-1))), F.inv(int(s[piv])))
    vals = F.vdot(C, V.T)
    cost = np.sum((vals != pi_vals[None, :]) & mask[None, :], axis=1) + (vals[:, c[0]] != fsum)
    return int(cost.min()) + len(free_pos)


def _sumcheck_part_upper(inst: SumInstance, pi, fa, c) -> int:
    """Constructive repair for m > 2, an upper bound on the true minimum.

    If every bundle column is low degree and the sum/chain checks hold, only
    the final check can fail and one F read fixes it.  Otherwise the whole
    pi axis is rewritten with columns of the right sums chosen to meet the
    F axis, so the F reads stay untouched.
    """
    F, H, q, m = inst.F, inst.H, inst.q, inst.m
    P = np.array(pi, dtype=np.int64).reshape(q, m - 1)
    columns_ok = all(is_low_degree(F, P[:, i], inst.d) for i in range(m - 1))
    if columns_ok:
        columns_ok = F.sum(int(P[h, 0]) for h in H) == inst.gamma and all(
            F.sum(int(P[h, i]) for h in H) == int(P[c[i - 1], i - 1]) for i in range(1, m - 1))
    return 1 if columns_ok else q
