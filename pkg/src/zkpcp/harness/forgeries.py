"""Cheating provers used by the soundness and robustness experiments."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..field import FieldCtx
from ..poly import MultiPoly, upoly_eval, upoly_mul
from ..sumcheck_rsc import RscProof, SumInstance, rsc_prove

KINDS = ("wrong-gamma-cascade", "random-proof", "bitflip", "wrong-witness", "tamper-pi_P")


@dataclass(frozen=True)
class ForgeryStrategy:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown forgery kind {self.kind!r}")
        rate = self.params.get("rate", 0.0)
        if not 0 <= rate <= 1:
            raise ValueError("rate must lie in [0, 1]")


def shift_polynomial(F: FieldCtx, H, d: int, rng: np.random.Generator | None = None) -> tuple[list[int], list[int]]:
    """A univariate U of degree d with d distinct roots and sum_{h in H} U(h) = 1.

    Adding a multiple of U to a layer moves its H-sum while agreeing with the
    honest layer on d points, the best a cheating layer can do.
    """
    q = F.order
    order = list(range(q)) if rng is None else [int(v) for v in rng.permutation(q)]
    for roots in combinations(order, d):
        u = [1]
        for r in roots:
            u = upoly_mul(F, u, [F.neg(r), 1])
        s = F.sum(upoly_eval(F, u, h) for h in H)
        if s:
            inv = F.inv(s)
            return [F.mul(c, inv) for c in u], list(roots)
    raise ValueError("no shift polynomial exists for these parameters")


def cascade_table(F: FieldCtx, honest: np.ndarray, m: int, shift: int, U: list[int]) -> np.ndarray:
    """Apply the cascade to an honest bundle table (q,)*(m-1)+(m-1,).

    Layer i (1-based) at (c_1..c_{m-2}, alpha) becomes
    g_i(c_<i, alpha) + shift * prod_{j<i} U(c_j) * U(alpha), so every chain
    check holds, and the final check fails unless some c_j is a root of U.
    """
    q = F.order
    Uv = np.array([upoly_eval(F, U, x) for x in range(q)], dtype=np.int64)
    table = honest.copy()
    for i in range(1, m):
        delta = np.full((q,) * (m - 1), shift, dtype=np.int64)
        for j in range(i - 1):
            shape = [1] * (m - 1)
            shape[j] = q
            delta = F.vmul(delta, Uv.reshape(shape))
        shape = [1] * (m - 2) + [q]
        delta = F.vmul(delta, Uv.reshape(shape))
        table[..., i - 1] = F.vadd(table[..., i - 1], delta)
    return table


def cascade_forgery(inst: SumInstance, p: MultiPoly, gamma_false: int,
                    rng: np.random.Generator | None = None, require_total_degree: bool = True) -> RscProof:
    """Honest-shaped proof claiming sum ``gamma_false`` for the true input p."""
    F = inst.F
    honest = rsc_prove(inst, p, require_total_degree).table
    U, _ = shift_polynomial(F, inst.H, inst.d, rng)
    shift = F.sub(gamma_false, inst.grid_sum(p))
    return RscProof(cascade_table(F, honest, inst.m, shift, U))


def cascade_accept_probability(inst: SumInstance) -> float:
    """Exact acceptance probability of the cascade (over c only)."""
    q, d, m = inst.q, inst.d, inst.m
    return 1.0 - (1.0 - d / q) ** (m - 1)


def random_bundle(F: FieldCtx, m: int, width: int, rng: np.random.Generator) -> np.ndarray:
    return F.random(rng, (F.order,) * (m - 1) + (width,))


def bitflip(table: np.ndarray, rate: float, rng: np.random.Generator, F: FieldCtx) -> np.ndarray:
    """Add a random nonzero value to each entry independently with probability ``rate``."""
    hit = rng.random(table.shape) < rate
    return np.where(hit, F.vadd(table, F.random_nonzero(rng, table.shape)), table)
