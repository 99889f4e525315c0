"""Exact Gaussian elimination over a FieldCtx."""
from __future__ import annotations

import numpy as np

from .field import FieldCtx


class Inconsistent(ValueError):
    """The linear system has no solution."""


def rref(F: FieldCtx, A) -> tuple[np.ndarray, list[int]]:
    R = F.asarray(A).copy()
    if R.ndim != 2:
        raise ValueError("rref expects a 2-d array")
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            R[[r, p]] = R[[p, r]]
        R[r] = F.vmul(R[r], F.inv(int(R[r, c])))
        mask = R[:, c] != 0
        mask[r] = False
        if mask.any():
            R[mask] = F.vsub(R[mask], F.vmul(R[mask, c][:, None], R[r][None, :]))
        pivots.append(c)
        r += 1
    return R, pivots


def rank(F: FieldCtx, A) -> int:
    A = F.asarray(A)
    if A.size == 0:
        return 0
    return len(rref(F, A)[1])


def nullspace(F: FieldCtx, A) -> np.ndarray:
    """Basis (as rows) of {x : A x = 0}."""
    A = F.asarray(A)
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    R, piv = rref(F, A)
    free = [c for c in range(n) if c not in set(piv)]
    K = np.zeros((len(free), n), dtype=np.int64)
    for j, f in enumerate(free):
        K[j, f] = 1
        for i, c in enumerate(piv):
            K[j, c] = F.neg(int(R[i, f]))
    return K


def solve_affine(F: FieldCtx, A, b) -> tuple[np.ndarray, np.ndarray]:
    """All solutions of A x = b as (particular x0, kernel basis rows K)."""
    A, b = F.asarray(A), F.asarray(b)
    m, n = A.shape
    aug = np.concatenate([A, b.reshape(m, 1)], axis=1)
    R, piv = rref(F, aug)
    if n in piv:
        raise Inconsistent("system A x = b has no solution")
    x0 = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(piv):
        x0[c] = R[i, n]
    return x0, nullspace(F, A)


def pivot_projection(F: FieldCtx, A) -> tuple[list[int], np.ndarray]:
    """For full-row-rank A, pick pivot columns P and return (P, M) such that
    x[P] = M @ (b - A[:, free] x[free]) solves A x = b given free coordinates."""
    A = F.asarray(A)
    R, piv = rref(F, A)
    if len(piv) != A.shape[0]:
        raise Inconsistent("constraint rows are linearly dependent")
    inv = invert(F, A[:, piv])
    return piv, inv


def invert(F: FieldCtx, A) -> np.ndarray:
    A = F.asarray(A)
    n = A.shape[0]
    aug = np.concatenate([A, np.eye(n, dtype=np.int64)], axis=1)
    R, piv = rref(F, aug)
    if piv[:n] != list(range(n)):
        raise Inconsistent("matrix is singular")
    return R[:, n:]


class EchelonBasis:
    """Incrementally maintained row space with an affine value per row.

    Rows are dense vectors of a fixed width.  ``reduce`` expresses a new row
    against the basis: if it lies in the span, the value it is forced to take
    is returned.  Rows are kept in insertion order; each stored row is reduced
    against all earlier ones, so a single pass in that order is exact.
    """

    def __init__(self, F: FieldCtx, width: int):
        self.F = F
        self.width = width
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []
        self.values: list[int] = []

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, v) -> tuple[np.ndarray, int]:
        """Return (residual row, value accumulated from the basis)."""
        F = self.F
        v = F.asarray(v).copy()
        acc = 0
        for row, p, val in zip(self.rows, self.pivots, self.values):
            c = int(v[p])
            if c:
                v = F.vsub(v, F.vmul(row, c))
                acc = F.add(acc, F.mul(c, val))
        return v, acc

    def forced_value(self, v) -> int | None:
        res, acc = self.reduce(v)
        return acc if not res.any() else None

    def add(self, v, value: int) -> bool:
        """Add the constraint <v, x> = value.  Returns False if already implied
        (consistently); raises Inconsistent on contradiction."""
        F = self.F
        res, acc = self.reduce(v)
        nz = np.nonzero(res)[0]
        if nz.size == 0:
            if acc != value:
                raise Inconsistent("constraint contradicts earlier ones")
            return False
        p = int(nz[0])
        inv = F.inv(int(res[p]))
        self.rows.append(F.vmul(res, inv))
        self.pivots.append(p)
        self.values.append(F.mul(F.sub(value, acc), inv))
        return True
