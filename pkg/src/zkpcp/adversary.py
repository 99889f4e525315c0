"""Query-bounded malicious verifiers and the loop that runs them.

An adversary is deterministic given its coins: ``next_query(coins, answers)``
returns the next ``(oracle id, index)`` or None to stop.  Keeping the
strategy a pure function of (coins, answers so far) lets the same adversary
drive a single real proof, a simulator, or a batch of trials grouped by
their query pattern.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping

import numpy as np

from .errors import BudgetExceeded
from .oracles import OracleHandle, VerifierView


@dataclass
class Adversary:
    budget: int
    name: str = "adversary"

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be non-negative")

    def sample_coins(self, rng: np.random.Generator) -> Any:
        return ()

    def next_query(self, coins, answers: list) -> tuple[str, Any] | None:
        raise NotImplementedError


@dataclass
class ScriptedAdversary(Adversary):
    """Issues a fixed list of queries; ``script`` may also be a function of
    the coins."""
    script: Any = ()

    def next_query(self, coins, answers):
        script = self.script(coins) if callable(self.script) else self.script
        return script[len(answers)] if len(answers) < len(script) else None


@dataclass
class FunctionAdversary(Adversary):
    """Wraps a plain function ``step(coins, answers) -> query | None``."""
    step: Callable | None = None
    coin_fn: Callable | None = None

    def sample_coins(self, rng):
        return self.coin_fn(rng) if self.coin_fn else ()

    def next_query(self, coins, answers):
        return self.step(coins, answers)


def run_adversary(adv: Adversary, oracles: Mapping[str, OracleHandle], coins=None,
                  rng: np.random.Generator | None = None) -> VerifierView:
    """Run ``adv`` against ``oracles``.  The budget is checked before every
    query, so no symbol beyond the budget is ever served."""
    if coins is None:
        coins = adv.sample_coins(rng if rng is not None else np.random.default_rng())
    answers: list = []
    records: list = []
    while True:
        q = adv.next_query(coins, answers)
        if q is None:
            break
        if len(answers) >= adv.budget:
            raise BudgetExceeded(f"{adv.name}: query {len(answers) + 1} exceeds budget {adv.budget}")
        oid, idx = q
        sym = oracles[oid].query(idx)
        answers.append(sym)
        records.append((oid, idx, sym))
    return VerifierView(coins, records)
