"""Affine-line low-degree tests and exact Reed-Muller distance for micro tables."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import SearchSpaceTooLarge, ZkpcpError
from .field import FieldCtx
from .oracles import OracleHandle
from .poly import DegreeBounds, is_low_degree, low_degree_rows, monomial_row, univariate_fit_check

log = logging.getLogger(__name__)


class FieldTooSmallForK(ZkpcpError, ValueError):
    pass


@dataclass(frozen=True)
class LdtParams:
    m: int
    d: int
    reps: int = 1
    proximity: Fraction = Fraction(1, 5)
    allow_small_field: bool = False

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.d < 0:
            raise ValueError("degree must be non-negative")


@dataclass(frozen=True)
class Line:
    base: tuple[int, ...]
    direction: tuple[int, ...]

    def __post_init__(self):
        if not any(self.direction):
            raise ValueError("line direction must be nonzero")

    def points(self, F: FieldCtx) -> np.ndarray:
        """(q, m) array: base + t*direction for t = 0..q-1."""
        t = F.elements()[:, None]
        return F.vadd(np.array(self.base, dtype=np.int64)[None, :],
                      F.vmul(t, np.array(self.direction, dtype=np.int64)[None, :]))


def sample_line(F: FieldCtx, m: int, rng: np.random.Generator) -> Line:
    base = tuple(int(v) for v in F.random(rng, m))
    while True:
        direction = F.random(rng, m)
        if direction.any():
            return Line(base, tuple(int(v) for v in direction))


@dataclass
class LineView:
    line: Line
    values: np.ndarray  # (q,) or (q, k)
    ok: bool

    def distance(self, F: FieldCtx, d: int) -> Fraction:
        """Distance of this line view to the nearest accepting view: every
        coordinate restriction must have degree <= d, and a point counts as
        corrupted if any coordinate there disagrees.  Exact for scalar views;
        for bundles it unions per-coordinate nearest fits (an upper bound)."""
        vals = self.values if self.values.ndim == 2 else self.values[:, None]
        if self.ok:
            return Fraction(0)
        bad = np.zeros(vals.shape[0], dtype=bool)
        for j in range(vals.shape[1]):
            r = univariate_fit_check(F, vals[:, j], d)
            if not r.is_degree_le_d:
                near = r.nearest.evaluate_many(F.elements()[:, None])
                bad |= near != vals[:, j]
        return Fraction(int(bad.sum()), vals.shape[0])


@dataclass
class LdtResult:
    verdict: bool
    views: list[LineView] = field(default_factory=list)

    def mean_distance(self, F: FieldCtx, d: int) -> Fraction:
        if not self.views:
            return Fraction(0)
        return sum((v.distance(F, d) for v in self.views), Fraction(0)) / len(self.views)


def read_line(F: FieldCtx, oracle: OracleHandle, line: Line) -> np.ndarray:
    return np.array([oracle.query(tuple(int(v) for v in p)) for p in line.points(F)], dtype=np.int64)


def ldt_scalar(F: FieldCtx, oracle: OracleHandle, params: LdtParams, rng: np.random.Generator) -> LdtResult:
    views = []
    for _ in range(params.reps):
        line = sample_line(F, params.m, rng)
        vals = read_line(F, oracle, line)
        views.append(LineView(line, vals, is_low_degree(F, vals, params.d)))
    return LdtResult(all(v.ok for v in views), views)


def check_field_size(F: FieldCtx, k: int, allow_small_field: bool) -> None:
    if F.order > 25 * k:
        return
    if not allow_small_field:
        raise FieldTooSmallForK(f"|F| = {F.order} <= 25k = {25 * k}")
    log.warning("vector low-degree test run with |F|=%d <= 25k=%d (override)", F.order, 25 * k)


def ldt_vector(F: FieldCtx, oracle: OracleHandle, params: LdtParams, rng: np.random.Generator,
               k: int | None = None) -> LdtResult:
    k = oracle.width if k is None else k
    check_field_size(F, k, params.allow_small_field)
    views = []
    for _ in range(params.reps):
        line = sample_line(F, params.m, rng)
        vals = read_line(F, oracle, line).reshape(F.order, k)
        ok = bool(low_degree_rows(F, vals.T, params.d).all())
        views.append(LineView(line, vals, ok))
    return LdtResult(all(v.ok for v in views), views)


def ldt_table(F: FieldCtx, table: np.ndarray, m: int, d: int, lines: list[Line]) -> np.ndarray:
    """Vectorized line checks on a dense table (q,)*m or (q,)*m+(k,): one
    boolean per line, used by batched experiment drivers."""
    out = np.empty(len(lines), dtype=bool)
    for i, line in enumerate(lines):
        pts = line.points(F)
        vals = table[tuple(pts.T)]
        vals = vals.reshape(F.order, -1)
        out[i] = bool(low_degree_rows(F, vals.T, d).all())
    return out


RM_LIMIT = 1 << 20


def rm_distance_exact(F: FieldCtx, table, m: int, d: int) -> Fraction:
    """Minimum relative distance from a full table on F^m to RM[F, m, d]."""
    table = np.asarray(table, dtype=np.int64).reshape(-1)
    q = F.order
    if table.size != q ** m:
        raise ValueError("table must cover F^m")
    exps = DegreeBounds.total_degree(d).monomials(m)
    n_mon = len(exps)
    if q ** n_mon > RM_LIMIT:
        raise SearchSpaceTooLarge(f"Reed-Muller code has {q}^{n_mon} codewords")
    pts = np.array(np.unravel_index(np.arange(q ** m), (q,) * m)).T
    E = np.stack([monomial_row(F, exps, p) for p in pts])  # (q^m, n_mon)
    best = 0
    total = q ** n_mon
    batch = max(1, (1 << 22) // max(1, table.size))
    for start in range(0, total, batch):
        idx = np.arange(start, min(total, start + batch), dtype=np.int64)
        C = np.stack([(idx // q ** j) % q for j in range(n_mon)], axis=1)
        words = F.vdot(C, E.T)
        best = max(best, int((words == table[None, :]).sum(axis=1).max()))
    return Fraction(table.size - best, table.size)
