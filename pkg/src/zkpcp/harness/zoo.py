"""Malicious-verifier strategies against the Oracle-3SAT proof, and the
batched driver that runs one strategy over many trials at once.

The driver keeps trials that have asked the same queries so far in one
group backed by one batched backend; when their next queries differ the
group is split with ``backend.take``.  Strategies branch only on coarse
features of the answers (a low bit) so the number of groups stays small.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..adversary import Adversary, FunctionAdversary
from ..errors import BudgetExceeded
from ..osat_pcp import OSatParams, c_read_points
from ..sumcheck_zk import reverse

KINDS = ("zero-query", "fixed-index", "adaptive-chain", "reversal-prober", "random-sampler", "layer-sum-prober",
         "telescoping-prober", "over-budget")
OID_CODE = {"pi_C": 1, "pi_sigma": 2, "pi_P": 3}


@dataclass(frozen=True)
class AdversaryStrategy:
    kind: str
    budget: int | None = None   # None: the strategy's natural query count

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be non-negative")

    def build(self, params: OSatParams) -> Adversary:
        adv = _BUILDERS[self.kind](params)
        return adv if self.budget is None else replace(adv, budget=self.budget)


def _anchor(params: OSatParams):
    q = params.F.order
    tau = tuple((3 * i + 1) % q for i in range(params.n_w))
    x = tuple((5 * i + 2) % q for i in range(params.M))
    c = tuple((i + 2) % q for i in range(params.c_vars))
    return tau, x, c


def _low(a) -> int:
    return int(a[0] if isinstance(a, tuple) else a) & 1


def _zero(p):
    return FunctionAdversary(budget=0, name="zero-query", step=lambda coins, ans: None)


def _fixed(p):
    tau, x, c = _anchor(p)
    script = [("pi_C", c), ("pi_sigma", (tau, x[:-1])), ("pi_P", (tau, x))]
    return FunctionAdversary(budget=3, name="fixed-index",
                             step=lambda coins, ans: script[len(ans)] if len(ans) < 3 else None)


def _chain(p):
    tau, x, c = _anchor(p)
    q = p.F.order

    def step(coins, ans):
        if len(ans) == 0:
            return ("pi_sigma", (tau, x[:-1]))
        if len(ans) == 1:
            return ("pi_P", (tau, x[:-1] + ((x[-1] + 1 + _low(ans[0])) % q,)))
        if len(ans) == 2:
            return ("pi_C", c[:-1] + ((c[-1] + 3 * _low(ans[1])) % q,))
        return None

    return FunctionAdversary(budget=3, name="adaptive-chain", step=step)


def _reversal(p):
    tau, x, _ = _anchor(p)
    xs = (x, x[1:] + x[:1])

    def step(coins, ans):
        pt = xs[coins]
        plan = [("pi_P", (tau, pt)), ("pi_P", (tau, reverse(pt)))]
        plan += [("pi_C", r) for r in c_read_points(p, pt)]
        return plan[len(ans)] if len(ans) < len(plan) else None

    return FunctionAdversary(budget=2 + 3, name="reversal-prober", step=step,
                             coin_fn=lambda rng: int(rng.integers(2)))


def _sampler(p):
    tau, x, c = _anchor(p)
    q = p.F.order
    pool = [("pi_C", c), ("pi_C", tuple((v + 7) % q for v in c)), ("pi_sigma", (tau, x[:-1])),
            ("pi_P", (tau, reverse(x)))]

    def step(coins, ans):
        return pool[coins[len(ans)]] if len(ans) < len(coins) else None

    return FunctionAdversary(budget=3, name="random-sampler", step=step,
                             coin_fn=lambda rng: tuple(int(v) for v in rng.integers(0, len(pool), size=3)))


def _layer_sum(p):
    tau, x, _ = _anchor(p)
    prefix = x[:-2]

    def step(coins, ans):
        if len(ans) < len(p.H):
            return ("pi_sigma", (tau, prefix + (p.H[len(ans)],)))
        if len(ans) == len(p.H):
            return ("pi_sigma", (tau, prefix + (2 + _low(ans[0]),)))
        return None

    return FunctionAdversary(budget=len(p.H) + 1, name="layer-sum-prober", step=step)


def _telescoping(p):
    tau, x, _ = _anchor(p)
    plan = [("pi_sigma", (tau, x[:-1])), ("pi_P", (tau, x)), ("pi_P", (tau, reverse(x)))]
    plan += [("pi_C", r) for r in c_read_points(p, x)]

    return FunctionAdversary(budget=len(plan), name="telescoping-prober",
                             step=lambda coins, ans: plan[len(ans)] if len(ans) < len(plan) else None)


def _over(p):
    """|H|^k distinct pi_C reads: outside the hiding guarantee."""
    q = p.F.order
    pts = [tuple((i * (j + 1) + 1) % q for j in range(p.c_vars)) for i in range(p.hiding_bound)]
    return FunctionAdversary(budget=len(pts), name="over-budget",
                             step=lambda coins, ans: ("pi_C", pts[len(ans)]) if len(ans) < len(pts) else None)


_BUILDERS = {"zero-query": _zero, "fixed-index": _fixed, "adaptive-chain": _chain, "reversal-prober": _reversal,
             "random-sampler": _sampler, "layer-sum-prober": _layer_sum, "telescoping-prober": _telescoping,
             "over-budget": _over}

ZK_ZOO = ("fixed-index", "adaptive-chain", "reversal-prober", "random-sampler", "layer-sum-prober",
          "telescoping-prober")


def zoo(params: OSatParams, kinds: Sequence[str] = KINDS) -> list[Adversary]:
    return [AdversaryStrategy(k).build(params) for k in kinds]


# --- batched driver -------------------------------------------------------------

class CoinCodes:
    """Shared coin -> small integer registry so real and simulated views
    use the same codes."""

    def __init__(self):
        self.codes: dict = {}

    def __call__(self, coins) -> int:
        key = repr(coins)
        if key not in self.codes:
            self.codes[key] = len(self.codes)
        return self.codes[key]


def view_width(adversary: Adversary, width: int) -> int:
    return 1 + adversary.budget * (1 + width)


def batched_views(adversary: Adversary, backend, coins_list: Sequence, codes: CoinCodes, width: int) -> np.ndarray:
    """Views of ``len(coins_list)`` trials as rows: coin code, then per query
    the oracle code and the symbol zero-padded to ``width``; unused slots
    are -1.  The budget is checked before a query is answered."""
    N = len(coins_list)
    out = np.full((N, view_width(adversary, width)), -1, dtype=np.int64)
    out[:, 0] = [codes(c) for c in coins_list]
    answers: list[list] = [[] for _ in range(N)]
    stack = [(np.arange(N), backend)]
    while stack:
        idx, be = stack.pop()
        groups: dict = {}
        for j, t in enumerate(idx):
            q = adversary.next_query(coins_list[t], answers[t])
            if q is not None:
                groups.setdefault((q[0], repr(q[1])), (q, []))[1].append(j)
        for (oid, _), (q, js) in groups.items():
            rows = idx[js]
            step = len(answers[rows[0]])
            if step >= adversary.budget:
                raise BudgetExceeded(f"{adversary.name}: query {step + 1} exceeds budget {adversary.budget}")
            sub = be if len(js) == len(idx) and len(groups) == 1 else be.take(np.asarray(js))
            ans = np.asarray(sub.answer(oid, q[1]), dtype=np.int64).reshape(len(rows), -1)
            col = 1 + step * (1 + width)
            out[rows, col] = OID_CODE.get(oid, 0)
            out[rows, col + 1: col + 1 + ans.shape[1]] = ans
            out[rows, col + 1 + ans.shape[1]: col + 1 + width] = 0
            for r, t in enumerate(rows):
                a = ans[r]
                answers[t].append(int(a[0]) if a.size == 1 else tuple(int(v) for v in a))
            stack.append((rows, sub))
    return out
