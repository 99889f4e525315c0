"""Experiment configuration and reports (JSON for machines, CSV for tables)."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

EXPERIMENTS = ("completeness", "soundness", "robustness", "zk", "budget", "pipeline")
SYSTEMS = ("osat-micro", "rsc-micro", "compose-micro")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    system: str = "osat-micro"
    instance: dict = field(default_factory=dict)
    trials: dict = field(default_factory=lambda: {"N": 1000})
    master_seed: str = "0" * 64
    thresholds: dict = field(default_factory=lambda: {"alpha": 0.001, "rejection": 0.5, "conf": 0.95})
    bins: dict = field(default_factory=lambda: {"pairwise": True, "min_expected": 5})
    adversaries: list = field(default_factory=list)
    forgeries: list = field(default_factory=list)
    output: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if self.system not in SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}; expected one of {SYSTEMS}")
        for k, v in self.trials.items():
            if int(v) < 1:
                raise ConfigError(f"trial count {k} must be >= 1")
        for k, v in self.thresholds.items():
            if not 0 < float(v) < 1:
                raise ConfigError(f"threshold {k} must lie in (0, 1)")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        base = cls(obj["experiment"]) if "experiment" in obj else None
        if base is None:
            raise ConfigError("config needs an 'experiment' key")
        merged = asdict(base)
        for k, v in obj.items():
            if isinstance(merged.get(k), dict) and isinstance(v, dict):
                merged[k] = {**merged[k], **v}
            else:
                merged[k] = v
        return cls(**merged)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def n(self, key: str = "N", default: int | None = None) -> int:
        if key in self.trials:
            return int(self.trials[key])
        if default is None:
            raise ConfigError(f"config needs trials.{key}")
        return default


def plain(obj):
    """JSON-ready copy: Fractions as 'a/b' strings, numpy scalars unboxed."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    return obj


@dataclass
class Report:
    experiment: str
    config: dict
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    seeds: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)  # wall clock; kept out of the JSON body

    @property
    def passed(self) -> bool:
        return bool(self.summary.get("pass", True))

    def to_json(self) -> str:
        body = {"experiment": self.experiment, "config": self.config, "rows": self.rows,
                "summary": self.summary, "seeds": self.seeds}
        return json.dumps(plain(body), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        rows = plain(self.rows)
        cols: list[str] = []
        for r in rows:
            for k in r:
                if k not in cols:
                    cols.append(k)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
        return buf.getvalue()

    def write(self, json_path=None, csv_path=None) -> list[Path]:
        out = []
        if json_path:
            p = Path(json_path)
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(self.to_json())
            p.with_suffix(".timing.json").write_text(json.dumps(plain(self.timings), indent=2, sort_keys=True))
            out.append(p)
        if csv_path:
            p = Path(csv_path)
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(self.to_csv())
            out.append(p)
        return out

    def lines(self) -> list[str]:
        """Human-readable summary, one line per row."""
        out = [f"[{self.experiment}] pass={self.passed}"]
        for r in self.rows:
            out.append("  " + ", ".join(f"{k}={v}" for k, v in plain(r).items() if not isinstance(v, (list, dict))))
        return out
