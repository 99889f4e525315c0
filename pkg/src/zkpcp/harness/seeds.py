"""Labelled child seeds from one 256-bit master seed.

Each child is HMAC-SHA256(master, label || counter); every label handed out
is logged so a report can list exactly which streams it consumed.
"""
from __future__ import annotations

import hashlib
import hmac
import secrets

import numpy as np

MASTER_BITS = 256


def fresh_master() -> int:
    return secrets.randbits(MASTER_BITS)


def parse_master(value) -> int:
    """Accepts an int or a hex string (with or without 0x)."""
    if isinstance(value, str):
        value = int(value, 16)
    value = int(value)
    if not 0 <= value < 1 << MASTER_BITS:
        raise ValueError("master seed must be a 256-bit non-negative integer")
    return value


def child_bytes(master: int, label: str, counter: int = 0) -> bytes:
    key = int(master).to_bytes(MASTER_BITS // 8, "big")
    msg = label.encode() + b"\x00" + int(counter).to_bytes(8, "big")
    return hmac.new(key, msg, hashlib.sha256).digest()


class SeedTree:
    def __init__(self, master):
        self.master = parse_master(master)
        self.log: list[tuple[str, str]] = []

    def child(self, label: str, counter: int = 0) -> int:
        out = int.from_bytes(child_bytes(self.master, label, counter), "big")
        name = label if counter == 0 else f"{label}#{counter}"
        self.log.append((name, f"{out:064x}"))
        return out

    def rng(self, label: str, counter: int = 0) -> np.random.Generator:
        return np.random.default_rng(self.child(label, counter))

    def int64(self, label: str, counter: int = 0) -> int:
        return self.child(label, counter) >> (256 - 63)

    def labels(self) -> list[str]:
        return [name for name, _ in self.log]
