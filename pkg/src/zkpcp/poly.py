"""Dense multivariate polynomials over a FieldCtx.

Coefficients live in an int64 array of shape ``(D_1, ..., D_m)`` indexed by
exponent tuples.  Individual-degree bounds give ``D_j = d_j + 1``; a total
degree bound d uses the cube ``(d + 1,) * m`` with every exponent tuple of
weight above d held at zero.
"""
from __future__ import annotations

import itertools
import json
import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .errors import ArityMismatch, BadIndex, DegreeTooHigh, SearchSpaceTooLarge, ZkpcpError
from .field import FieldCtx, FieldSpec
from .linalg import EchelonBasis, Inconsistent, invert, solve_affine


class PointNotInGrid(ZkpcpError, ValueError):
    pass


class IncompleteTable(ZkpcpError, ValueError):
    pass


class InconsistentConstraints(ZkpcpError, ValueError):
    pass


@dataclass(frozen=True)
class DegreeBounds:
    per_var: tuple[int, ...] | None = None
    total: int | None = None

    def __post_init__(self):
        if (self.per_var is None) == (self.total is None):
            raise ValueError("exactly one of per_var / total must be set")
        caps = self.per_var if self.per_var is not None else (self.total,)
        if any(c < 0 for c in caps):
            raise ValueError("degree caps must be non-negative")

    @classmethod
    def individual(cls, *caps) -> "DegreeBounds":
        if len(caps) == 1 and not isinstance(caps[0], int):
            caps = tuple(caps[0])
        return cls(per_var=tuple(int(c) for c in caps))

    @classmethod
    def uniform(cls, m: int, d: int) -> "DegreeBounds":
        return cls(per_var=(d,) * m)

    @classmethod
    def total_degree(cls, d: int) -> "DegreeBounds":
        return cls(total=int(d))

    def shape(self, m: int) -> tuple[int, ...]:
        if self.per_var is not None:
            if len(self.per_var) != m:
                raise ArityMismatch(f"bounds have {len(self.per_var)} variables, expected {m}")
            return tuple(d + 1 for d in self.per_var)
        return (self.total + 1,) * m

    def mask(self, m: int) -> np.ndarray:
        shape = self.shape(m)
        if self.per_var is not None:
            return np.ones(shape, dtype=bool)
        grids = np.indices(shape).sum(axis=0) if m else np.zeros((), dtype=np.int64)
        return grids <= self.total

    def monomials(self, m: int) -> np.ndarray:
        """In-bound exponent tuples, lexicographic, as an (N, m) array."""
        return np.argwhere(self.mask(m)).astype(np.int64).reshape(-1, m)

    def count(self, m: int) -> int:
        return int(self.mask(m).sum())

    def reversed(self) -> "DegreeBounds":
        if self.per_var is None:
            return self
        return DegreeBounds(per_var=tuple(reversed(self.per_var)))

    def to_json(self):
        return {"per_var": list(self.per_var)} if self.per_var is not None else {"total": self.total}

    @classmethod
    def from_json(cls, obj) -> "DegreeBounds":
        if "per_var" in obj:
            return cls(per_var=tuple(obj["per_var"]))
        return cls(total=int(obj["total"]))


@dataclass(frozen=True)
class PointConstraint:
    point: tuple[int, ...]
    value: int


class MultiPoly:
    def __init__(self, F: FieldCtx, m: int, bounds: DegreeBounds, coeffs=None):
        self.F = F
        self.m = m
        self.bounds = bounds
        shape = bounds.shape(m)
        if coeffs is None:
            coeffs = np.zeros(shape, dtype=np.int64)
        coeffs = np.asarray(coeffs, dtype=np.int64)
        if coeffs.shape != shape:
            raise ArityMismatch(f"coefficient array shape {coeffs.shape} != {shape}")
        if bounds.total is not None and np.any(coeffs[~bounds.mask(m)]):
            raise DegreeTooHigh("coefficients outside the total-degree bound")
        self.coeffs = coeffs

    # construction helpers
    @classmethod
    def zero(cls, F, m, bounds):
        return cls(F, m, bounds)

    @classmethod
    def constant(cls, F, m, c, bounds=None):
        bounds = bounds or DegreeBounds.uniform(m, 0)
        p = cls(F, m, bounds)
        p.coeffs[(0,) * m] = c
        return p

    @classmethod
    def from_terms(cls, F, m, bounds, terms: dict) -> "MultiPoly":
        p = cls(F, m, bounds)
        for exp, c in terms.items():
            exp = tuple(exp)
            if len(exp) != m:
                raise ArityMismatch("exponent tuple of wrong length")
            if any(e >= s for e, s in zip(exp, p.coeffs.shape)) or (
                    bounds.total is not None and sum(exp) > bounds.total):
                raise DegreeTooHigh(f"monomial {exp} outside {bounds}")
            p.coeffs[exp] = F.add(int(p.coeffs[exp]), F.check(c))
        return p

    def copy(self) -> "MultiPoly":
        return MultiPoly(self.F, self.m, self.bounds, self.coeffs.copy())

    def __repr__(self) -> str:
        terms = [f"{c}*x^{tuple(e)}" for e, c in zip(*self.terms())]
        return f"MultiPoly({self.F}, m={self.m}, {' + '.join(terms) or '0'})"

    def terms(self):
        idx = np.argwhere(self.coeffs != 0)
        return [tuple(int(v) for v in e) for e in idx], [int(self.coeffs[tuple(e)]) for e in idx]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly) or other.m != self.m or other.F != self.F:
            return NotImplemented
        a, b = _pad_to_common(self.coeffs, other.coeffs)
        return bool(np.array_equal(a, b))

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def individual_degrees(self) -> tuple[int, ...]:
        out = []
        for j in range(self.m):
            nz = np.nonzero(np.any(self.coeffs != 0, axis=tuple(k for k in range(self.m) if k != j)))[0]
            out.append(int(nz[-1]) if nz.size else -1)
        return tuple(out)

    def total_degree(self) -> int:
        idx = np.argwhere(self.coeffs != 0)
        return int(idx.sum(axis=1).max()) if idx.size else -1

    # evaluation
    def evaluate(self, x: Sequence[int]) -> int:
        x = tuple(int(v) for v in x)
        if len(x) != self.m:
            raise ArityMismatch(f"point of length {len(x)} for a {self.m}-variate polynomial")
        return int(self.evaluate_many(np.array([x], dtype=np.int64).reshape(1, self.m))[0])

    __call__ = evaluate

    def evaluate_many(self, pts) -> np.ndarray:
        F = self.F
        pts = np.asarray(pts, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[1] != self.m:
            raise ArityMismatch("points must be an (n, m) array")
        n = pts.shape[0]
        T = np.broadcast_to(self.coeffs, (n,) + self.coeffs.shape)
        for j in range(self.m - 1, -1, -1):
            D = T.shape[-1]
            pw = power_table(F, pts[:, j], D)  # (n, D)
            shape = (n,) + (1,) * (T.ndim - 2) + (D,)
            T = F.vsum(F.vmul(T, pw.reshape(shape)), axis=-1)
        return np.asarray(T, dtype=np.int64).reshape(n)

    def evaluate_grid(self, axes: Sequence[Sequence[int]] | None = None) -> np.ndarray:
        """Evaluate on the product grid axes[0] x ... x axes[m-1] (default
        the whole field on every axis)."""
        F = self.F
        if axes is None:
            axes = [F.elements()] * self.m
        T = self.coeffs
        for j in range(self.m):
            V = vandermonde(F, axes[j], T.shape[j])  # (len, D)
            T = mode_product(F, T, V, j)
        return T

    # arithmetic
    def _binary(self, other: "MultiPoly", op) -> "MultiPoly":
        if other.m != self.m or other.F != self.F:
            raise ArityMismatch("polynomials over different rings")
        a, b = _pad_to_common(self.coeffs, other.coeffs)
        bounds = _join_bounds(self, other, a.shape)
        return MultiPoly(self.F, self.m, bounds, op(a, b))

    def __add__(self, other):
        return self._binary(other, self.F.vadd)

    def __sub__(self, other):
        return self._binary(other, self.F.vsub)

    def __neg__(self):
        return MultiPoly(self.F, self.m, self.bounds, self.F.vneg(self.coeffs))

    def scale(self, c: int) -> "MultiPoly":
        return MultiPoly(self.F, self.m, self.bounds, self.F.vmul(self.coeffs, c))

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return poly_mul(self, other)

    def mul_univariate(self, j: int, u: Sequence[int]) -> "MultiPoly":
        """Multiply by a univariate polynomial (coefficient list) in variable j."""
        F = self.F
        u = [int(c) for c in u]
        D = self.coeffs.shape[j]
        new_shape = list(self.coeffs.shape)
        new_shape[j] = D + len(u) - 1
        out = np.zeros(new_shape, dtype=np.int64)
        for e, c in enumerate(u):
            if c == 0:
                continue
            sl = [slice(None)] * self.m
            sl[j] = slice(e, e + D)
            out[tuple(sl)] = F.vadd(out[tuple(sl)], F.vmul(self.coeffs, c))
        if self.bounds.per_var is not None:
            pv = list(self.bounds.per_var)
            pv[j] += len(u) - 1
            bounds = DegreeBounds(per_var=tuple(pv))
        else:
            bounds = DegreeBounds(total=self.bounds.total + len(u) - 1)
            big = np.zeros(bounds.shape(self.m), dtype=np.int64)
            big[tuple(slice(0, s) for s in out.shape)] = out
            out = big
        return MultiPoly(F, self.m, bounds, out)

    def with_bounds(self, bounds: DegreeBounds) -> "MultiPoly":
        """Re-home into a (larger or equal) bound; raises if a term would be lost."""
        shape = bounds.shape(self.m)
        out = np.zeros(shape, dtype=np.int64)
        idx = np.argwhere(self.coeffs != 0)
        for e in idx:
            e = tuple(int(v) for v in e)
            if any(ei >= s for ei, s in zip(e, shape)) or (bounds.total is not None and sum(e) > bounds.total):
                raise DegreeTooHigh(f"monomial {e} does not fit {bounds}")
            out[e] = self.coeffs[e]
        return MultiPoly(self.F, self.m, bounds, out)

    # serialisation
    def to_json(self) -> dict:
        exps, cs = self.terms()
        return {"field": self.F.to_json(), "num_vars": self.m, "bounds": self.bounds.to_json(),
                "terms": [[list(e), c] for e, c in zip(exps, cs)]}

    @classmethod
    def from_json(cls, obj, F: FieldCtx | None = None) -> "MultiPoly":
        if F is None:
            F = FieldCtx(FieldSpec.from_json(obj["field"]))
        return cls.from_terms(F, int(obj["num_vars"]), DegreeBounds.from_json(obj["bounds"]),
                              {tuple(e): c for e, c in obj["terms"]})


def _pad_to_common(a: np.ndarray, b: np.ndarray):
    shape = tuple(max(x, y) for x, y in zip(a.shape, b.shape))
    A = np.zeros(shape, dtype=np.int64)
    B = np.zeros(shape, dtype=np.int64)
    A[tuple(slice(0, s) for s in a.shape)] = a
    B[tuple(slice(0, s) for s in b.shape)] = b
    return A, B


def _join_bounds(p: MultiPoly, q: MultiPoly, shape) -> DegreeBounds:
    if p.bounds.total is not None and q.bounds.total is not None:
        return DegreeBounds(total=max(p.bounds.total, q.bounds.total))
    return DegreeBounds(per_var=tuple(s - 1 for s in shape))


def poly_mul(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    F = p.F
    if p.m != q.m:
        raise ArityMismatch("polynomials with different variable counts")
    shape = tuple(a + b - 1 for a, b in zip(p.coeffs.shape, q.coeffs.shape))
    out = np.zeros(shape, dtype=np.int64)
    small, big = (p, q) if np.count_nonzero(p.coeffs) <= np.count_nonzero(q.coeffs) else (q, p)
    for e in np.argwhere(small.coeffs != 0):
        c = int(small.coeffs[tuple(e)])
        sl = tuple(slice(int(ei), int(ei) + s) for ei, s in zip(e, big.coeffs.shape))
        out[sl] = F.vadd(out[sl], F.vmul(big.coeffs, c))
    if p.bounds.total is not None and q.bounds.total is not None:
        bounds = DegreeBounds(total=p.bounds.total + q.bounds.total)
        full = np.zeros(bounds.shape(p.m), dtype=np.int64)
        full[tuple(slice(0, s) for s in shape)] = out
        out = full
    else:
        bounds = DegreeBounds(per_var=tuple(s - 1 for s in shape))
    return MultiPoly(F, p.m, bounds, out)


# --- tables of powers -----------------------------------------------------

def power_table(F: FieldCtx, xs, D: int) -> np.ndarray:
    """(len(xs), D) array with entry [i, e] = xs[i]^e."""
    xs = np.asarray(xs, dtype=np.int64).reshape(-1)
    out = np.empty((xs.size, max(D, 0)), dtype=np.int64)
    if D == 0:
        return out
    out[:, 0] = 1
    for e in range(1, D):
        out[:, e] = F.vmul(out[:, e - 1], xs)
    return out


def vandermonde(F: FieldCtx, xs, D: int) -> np.ndarray:
    return power_table(F, xs, D)


def mode_product(F: FieldCtx, T: np.ndarray, M: np.ndarray, axis: int) -> np.ndarray:
    """Contract axis ``axis`` of T (length D) with M of shape (n, D)."""
    T = np.moveaxis(T, axis, -1)
    shp = T.shape
    out = F.vdot(T.reshape(-1, shp[-1]), M.T)
    return np.moveaxis(out.reshape(shp[:-1] + (M.shape[0],)), -1, axis)


def power_sums(F: FieldCtx, H: Sequence[int], D: int) -> np.ndarray:
    """s[e] = sum_{h in H} h^e for e < D."""
    return F.vsum(power_table(F, list(H), D), axis=0).reshape(D)


# --- univariate helpers ---------------------------------------------------

def upoly_mul(F: FieldCtx, a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = F.add(out[i + j], F.mul(x, y))
    return out


def upoly_eval(F: FieldCtx, a: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = F.add(F.mul(acc, x), c)
    return acc


def vanishing_coeffs(F: FieldCtx, H: Sequence[int]) -> list[int]:
    out = [1]
    for a in H:
        out = upoly_mul(F, out, [F.neg(a), 1])
    return out


def lagrange_coeffs(F: FieldCtx, S: Sequence[int], a: int) -> list[int]:
    S = [int(s) for s in S]
    if a not in S:
        raise PointNotInGrid(f"{a} not in {S}")
    num, den = [1], 1
    for s in S:
        if s != a:
            num = upoly_mul(F, num, [F.neg(s), 1])
            den = F.mul(den, F.sub(a, s))
    inv = F.inv(den)
    return [F.mul(c, inv) for c in num]


def lagrange_values(F: FieldCtx, S: Sequence[int], xs) -> np.ndarray:
    """(len(xs), |S|) matrix of L_{S,s}(x)."""
    S = [int(s) for s in S]
    xs = np.asarray(xs, dtype=np.int64).reshape(-1)
    out = np.empty((xs.size, len(S)), dtype=np.int64)
    for i, a in enumerate(S):
        num = np.ones(xs.size, dtype=np.int64)
        den = 1
        for s in S:
            if s != a:
                num = F.vmul(num, F.vsub(xs, s))
                den = F.mul(den, F.sub(a, s))
        out[:, i] = F.vmul(num, F.inv(den))
    return out


# --- the named operations -------------------------------------------------

def _axis_values(S) -> list[int]:
    return [int(v) for v in S]


def lagrange_basis(F: FieldCtx, S: Sequence[Sequence[int]], a: Sequence[int]) -> MultiPoly:
    if len(S) != len(a):
        raise ArityMismatch("grid and point dimensions differ")
    m = len(S)
    vecs = []
    for Sj, aj in zip(S, a):
        Sj = _axis_values(Sj)
        if len(set(Sj)) != len(Sj):
            raise ValueError("grid axes must have distinct elements")
        vecs.append(lagrange_coeffs(F, Sj, int(aj)))
    coeffs = np.ones((), dtype=np.int64)
    for v in vecs:
        coeffs = F.vmul(coeffs[..., None], np.array(v, dtype=np.int64))
    return MultiPoly(F, m, DegreeBounds(per_var=tuple(len(v) - 1 for v in vecs)), coeffs)


def vanishing_poly(F: FieldCtx, H: Sequence[int]) -> MultiPoly:
    c = vanishing_coeffs(F, _axis_values(H))
    return MultiPoly(F, 1, DegreeBounds(per_var=(len(c) - 1,)), np.array(c, dtype=np.int64))


def sum_over_grid(p: MultiPoly, H: Sequence[int], which_vars: Sequence[int]):
    """Sum p over H in the listed variables.  Returns a MultiPoly in the
    remaining variables (in order), or a field element if none remain."""
    F = p.F
    which = sorted(set(int(j) for j in which_vars))
    if any(j < 0 or j >= p.m for j in which):
        raise BadIndex(f"variables {which_vars} out of range for m={p.m}")
    T = p.coeffs
    for j in reversed(which):
        s = power_sums(F, H, T.shape[j])
        T = mode_product(F, T, s.reshape(1, -1), j)
        T = np.squeeze(T, axis=j)
    rest = [j for j in range(p.m) if j not in which]
    if not rest:
        return int(T)
    if p.bounds.per_var is not None:
        bounds = DegreeBounds(per_var=tuple(p.bounds.per_var[j] for j in rest))
    else:
        bounds = p.bounds
    return MultiPoly(F, len(rest), bounds, T)


def partial_sum(p: MultiPoly, H: Sequence[int], i: int) -> MultiPoly:
    """g_i(x_1..x_i) = sum over b in H^{m-i} of p(x_1..x_i, b)."""
    if not 1 <= i <= p.m - 1:
        raise BadIndex(f"partial sum index {i} outside [1, {p.m - 1}]")
    return sum_over_grid(p, H, range(i, p.m))


def lde_from_table(F: FieldCtx, values, H: Sequence[int], m: int | None = None) -> MultiPoly:
    """Unique extension of individual degree |H|-1 of a table on H^m.

    ``values`` is either an array of shape (|H|,)*m indexed by positions in
    H, or a dict mapping points of H^m to field elements.
    """
    H = _axis_values(H)
    n = len(H)
    if isinstance(values, dict):
        if m is None:
            m = len(next(iter(values)))
        arr = np.zeros((n,) * m, dtype=np.int64)
        seen = 0
        for pt in itertools.product(range(n), repeat=m):
            key = tuple(H[i] for i in pt)
            if key not in values:
                raise IncompleteTable(f"missing value at {key}")
            arr[pt] = F.check(values[key])
            seen += 1
    else:
        arr = np.asarray(values, dtype=np.int64)
        m = arr.ndim
        if arr.shape != (n,) * m:
            raise IncompleteTable(f"table shape {arr.shape} != {(n,) * m}")
    Vinv = invert(F, vandermonde(F, H, n))  # coefficients = Vinv @ values
    T = arr
    for j in range(m):
        T = mode_product(F, T, Vinv, j)
    return MultiPoly(F, m, DegreeBounds.uniform(m, n - 1), T)


def poly_random(F: FieldCtx, m: int, bounds: DegreeBounds, rng: np.random.Generator) -> MultiPoly:
    shape = bounds.shape(m)
    c = F.random(rng, shape)
    if bounds.total is not None:
        c = np.where(bounds.mask(m), c, 0)
    return MultiPoly(F, m, bounds, c)


def poly_reverse_vars(p: MultiPoly) -> MultiPoly:
    return MultiPoly(p.F, p.m, p.bounds.reversed(), np.transpose(p.coeffs, tuple(range(p.m - 1, -1, -1))).copy())


@dataclass
class EvalTable:
    """Dense evaluations on F^m; ``values`` has shape (q,)*m (+ (k,) for bundles)."""
    F: FieldCtx
    m: int
    values: np.ndarray

    @classmethod
    def from_poly(cls, p: MultiPoly) -> "EvalTable":
        return cls(p.F, p.m, p.evaluate_grid())

    def __call__(self, x):
        return self.values[tuple(int(v) for v in x)]


# --- univariate membership and nearest fit --------------------------------

@dataclass
class FitResult:
    is_degree_le_d: bool
    nearest: MultiPoly
    distance: Fraction


@lru_cache(maxsize=256)
def _prediction_matrix(spec: FieldSpec, d: int) -> np.ndarray:
    """W with W @ vals[:d+1] = predicted vals[d+1:] for a degree-<=d table on
    the domain 0..q-1 in integer order."""
    F = FieldCtx(spec)
    q = F.order
    base = list(range(d + 1))
    return lagrange_values(F, base, np.arange(d + 1, q))


def is_low_degree(F: FieldCtx, values, d: int) -> bool:
    """Exact test: does the full table on 0..q-1 agree with a degree <= d polynomial?"""
    vals = np.asarray(values, dtype=np.int64)
    q = F.order
    if vals.shape[-1] != q:
        raise ArityMismatch("table must cover the whole field")
    if d >= q - 1:
        return True
    W = _prediction_matrix(F.spec, d)
    lead = vals[..., : d + 1].reshape(-1, d + 1)
    pred = F.vdot(lead, W.T)
    return bool(np.array_equal(pred.reshape(vals.shape[:-1] + (q - d - 1,)), vals[..., d + 1:]))


def low_degree_rows(F: FieldCtx, rows: np.ndarray, d: int) -> np.ndarray:
    """Per-row membership for an (n, q) array of tables."""
    rows = np.asarray(rows, dtype=np.int64)
    q = F.order
    if d >= q - 1:
        return np.ones(rows.shape[0], dtype=bool)
    W = _prediction_matrix(F.spec, d)
    pred = F.vdot(rows[:, : d + 1], W.T)
    return np.all(pred == rows[:, d + 1:], axis=1)


def interpolate_full(F: FieldCtx, values) -> list[int]:
    """Coefficients (low to high, length q) of the unique degree < q
    polynomial through the table on 0..q-1."""
    q = F.order
    V = vandermonde(F, np.arange(q), q)
    return [int(c) for c in F.vdot(invert(F, V), np.asarray(values, dtype=np.int64))]


ENUM_LIMIT = 1 << 22


def univariate_fit_check(F: FieldCtx, values, d: int) -> FitResult:
    values = np.asarray(values, dtype=np.int64).reshape(-1)
    q = F.order
    if values.size != q:
        raise ArityMismatch("table must cover the whole field")
    if not 0 <= d < q:
        raise ValueError("need 0 <= d < |F|")
    bounds = DegreeBounds(per_var=(d,))
    if is_low_degree(F, values, d):
        co = np.zeros(d + 1, dtype=np.int64)
        lead = lagrange_interp_coeffs(F, list(range(d + 1)), values[: d + 1])
        co[: len(lead)] = lead
        return FitResult(True, MultiPoly(F, 1, bounds, co), Fraction(0))
    V = vandermonde(F, np.arange(q), d + 1)  # (q, d+1)
    n_all = q ** (d + 1)
    n_sub = comb(q, d + 1)
    best_agree, best_coeffs = -1, None
    if n_all <= min(ENUM_LIMIT, n_sub * (d + 1)) or n_all <= 4096:
        batch = 1 << 15
        for start in range(0, n_all, batch):
            idx = np.arange(start, min(n_all, start + batch), dtype=np.int64)
            C = np.stack([(idx // q ** (d - j)) % q for j in range(d + 1)], axis=1)  # lexicographic
            vals = F.vdot(C, V.T)
            agree = np.sum(vals == values[None, :], axis=1)
            top = int(agree.max())
            if top > best_agree:
                best_agree, best_coeffs = top, C[int(np.argmax(agree))]
    elif n_sub * q * (d + 1) <= ENUM_LIMIT * 4:
        subsets, ops = _subset_operators(F.spec, d)
        Y = values[subsets]  # (n_sub, d+1)
        pred = np.zeros((len(subsets), q), dtype=np.int64)
        for j in range(d + 1):
            pred = F.vadd(pred, F.vmul(ops[:, :, j], Y[:, j:j + 1]))
        agree = np.sum(pred == values[None, :], axis=1)
        best_agree = int(agree.max())
        winners = {tuple(lagrange_interp_coeffs(F, list(S), values[list(S)]))
                   for S in subsets[agree == best_agree]}
        best_coeffs = min(tuple(w) + (0,) * (d + 1 - len(w)) for w in winners)
    else:
        raise SearchSpaceTooLarge(f"nearest-fit search over GF({q}) with d={d} is too large")
    nearest = MultiPoly(F, 1, bounds, np.asarray(best_coeffs, dtype=np.int64))
    return FitResult(False, nearest, Fraction(q - best_agree, q))


@lru_cache(maxsize=32)
def _subset_operators(spec: FieldSpec, d: int) -> tuple[np.ndarray, np.ndarray]:
    """All (d+1)-subsets S of the domain and, per subset, the (q, d+1) matrix
    sending values on S to the interpolant's values on the whole field."""
    F = FieldCtx(spec)
    q = F.order
    subsets = np.array(list(itertools.combinations(range(q), d + 1)), dtype=np.int64)
    ops = np.empty((len(subsets), q, d + 1), dtype=np.int64)
    xs = np.arange(q)
    for i, S in enumerate(subsets):
        ops[i] = lagrange_values(F, [int(v) for v in S], xs)
    return subsets, ops


def lagrange_interp_coeffs(F: FieldCtx, xs: Sequence[int], ys: Sequence[int]) -> list[int]:
    out = [0] * len(xs)
    for x, y in zip(xs, ys):
        y = int(y)
        if y == 0:
            continue
        L = lagrange_coeffs(F, [int(v) for v in xs], int(x))
        for e, c in enumerate(L):
            out[e] = F.add(out[e], F.mul(c, y))
    return out


# --- PolySim --------------------------------------------------------------

def monomial_row(F: FieldCtx, exps: np.ndarray, point: Sequence[int]) -> np.ndarray:
    """Evaluations of every monomial in ``exps`` at ``point``."""
    m = exps.shape[1]
    if len(point) != m:
        raise ArityMismatch("point length does not match variable count")
    row = np.ones(exps.shape[0], dtype=np.int64)
    for j in range(m):
        pw = power_table(F, [int(point[j])], int(exps[:, j].max()) + 1 if exps.size else 1)[0]
        row = F.vmul(row, pw[exps[:, j]])
    return row


def affine_solution_set(F: FieldCtx, m: int, bounds: DegreeBounds,
                        constraints: Sequence[PointConstraint]) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient vectors (over ``bounds.monomials(m)``) meeting every
    constraint, as (particular solution, kernel basis rows)."""
    exps = bounds.monomials(m)
    if not constraints:
        return np.zeros(len(exps), dtype=np.int64), np.eye(len(exps), dtype=np.int64)
    A = np.stack([monomial_row(F, exps, c.point) for c in constraints])
    b = np.array([c.value for c in constraints], dtype=np.int64)
    try:
        return solve_affine(F, A, b)
    except Inconsistent as exc:
        raise InconsistentConstraints(str(exc)) from None


class PolySim:
    """Lazy sampler of a uniformly random polynomial within ``bounds``.

    Each answer is distributed as Q(alpha) for Q uniform in the bounded space
    conditioned on all earlier answers: forced when the evaluation functional
    at alpha lies in the span of the earlier ones, uniform otherwise.
    """

    def __init__(self, F: FieldCtx, m: int, bounds: DegreeBounds, rng: np.random.Generator | None = None,
                 constraints: Sequence[PointConstraint] = ()):
        self.F = F
        self.m = m
        self.bounds = bounds
        self.rng = rng
        self.exps = bounds.monomials(m)
        self.basis = EchelonBasis(F, len(self.exps))
        self.S: list[PointConstraint] = []
        self._answers: dict[tuple, int] = {}
        for c in constraints:
            self.constrain(c.point, c.value)

    @property
    def dimension(self) -> int:
        return len(self.exps)

    def constrain(self, point, value: int) -> None:
        point = tuple(int(v) for v in point)
        try:
            self.basis.add(monomial_row(self.F, self.exps, point), int(value))
        except Inconsistent:
            raise InconsistentConstraints(f"value {value} at {point} contradicts earlier constraints") from None
        self.S.append(PointConstraint(point, int(value)))
        self._answers[point] = int(value)

    def forced(self, point) -> int | None:
        point = tuple(int(v) for v in point)
        if point in self._answers:
            return self._answers[point]
        return self.basis.forced_value(monomial_row(self.F, self.exps, point))

    def distribution(self, point) -> dict[int, Fraction]:
        v = self.forced(point)
        if v is not None:
            return {v: Fraction(1)}
        return {x: Fraction(1, self.F.order) for x in range(self.F.order)}

    def query(self, point, value: int | None = None) -> int:
        """Answer a query; ``value`` overrides the random draw (used for exact
        enumeration of the sampler's branches)."""
        point = tuple(int(v) for v in point)
        if point in self._answers:
            return self._answers[point]
        row = monomial_row(self.F, self.exps, point)
        v = self.basis.forced_value(row)
        if v is None:
            v = int(value) if value is not None else self.F.random(self.rng)
            self.basis.add(row, v)
        self.S.append(PointConstraint(point, v))
        self._answers[point] = v
        return v

    def is_free(self, point) -> bool:
        return self.forced(point) is None

    @property
    def queried_points(self) -> list[tuple]:
        return list(self._answers)


class PolySimBatch:
    """PolySim for n independent trials that issue the same queries.

    The linear algebra depends only on the query points, so it is done once;
    answers are arrays with one entry per trial.  ``take`` keeps a subset of
    the trials, for when their query patterns diverge.
    """

    def __init__(self, F: FieldCtx, m: int, bounds: DegreeBounds, rng: np.random.Generator, n: int):
        self.F = F
        self.m = m
        self.bounds = bounds
        self.rng = rng
        self.n = n
        self.exps = bounds.monomials(m)
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []
        self.vals: list[np.ndarray] = []
        self.answers: dict[tuple, np.ndarray] = {}

    def query(self, point) -> np.ndarray:
        F = self.F
        point = tuple(int(v) for v in point)
        if point in self.answers:
            return self.answers[point]
        v = monomial_row(F, self.exps, point)
        acc = np.zeros(self.n, dtype=np.int64)
        for row, p, val in zip(self.rows, self.pivots, self.vals):
            c = int(v[p])
            if c:
                v = F.vsub(v, F.vmul(row, c))
                acc = F.vadd(acc, F.vmul(val, c))
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            out = acc
        else:
            out = F.random(self.rng, self.n)
            p = int(nz[0])
            inv = F.inv(int(v[p]))
            self.rows.append(F.vmul(v, inv))
            self.pivots.append(p)
            self.vals.append(F.vmul(F.vsub(out, acc), inv))
        self.answers[point] = out
        return out

    def take(self, sel) -> "PolySimBatch":
        sel = np.asarray(sel)
        out = PolySimBatch(self.F, self.m, self.bounds, self.rng, int(sel.size))
        out.rows = list(self.rows)
        out.pivots = list(self.pivots)
        out.vals = [v[sel] for v in self.vals]
        out.answers = {k: v[sel] for k, v in self.answers.items()}
        return out

    @property
    def queried_points(self) -> list[tuple]:
        return list(self.answers)


def polysim_step(F: FieldCtx, m: int, bounds: DegreeBounds, S: Sequence[PointConstraint],
                 alpha: Sequence[int], rng: np.random.Generator) -> int:
    sim = PolySim(F, m, bounds, rng, S)
    return sim.query(alpha)


# --- dense grid files -----------------------------------------------------

GRID_MAGIC = b"ZKGRID1\n"


def write_grid(path, F: FieldCtx, m: int, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=np.int64)
    width = 1 if values.ndim == m else int(values.shape[-1])
    if values.shape[:m] != (F.order,) * m:
        raise ArityMismatch("grid must cover F^m")
    header = json.dumps({"field": F.to_json(), "m": m, "width": width,
                         "byte_width": F.byte_width}).encode()
    bw = F.byte_width
    body = values.reshape(-1).astype(f"<u{bw}" if bw in (1, 2, 4, 8) else "<u8").tobytes()
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(body)


def read_grid(path) -> tuple[FieldCtx, int, np.ndarray]:
    with open(path, "rb") as fh:
        if fh.read(len(GRID_MAGIC)) != GRID_MAGIC:
            raise ValueError("not a grid file")
        (n,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(n))
        body = fh.read()
    F = FieldCtx(FieldSpec.from_json(header["field"]))
    m, width, bw = header["m"], header["width"], header["byte_width"]
    arr = np.frombuffer(body, dtype=f"<u{bw}").astype(np.int64)
    shape = (F.order,) * m + ((width,) if width > 1 else ())
    return F, m, arr.reshape(shape)
