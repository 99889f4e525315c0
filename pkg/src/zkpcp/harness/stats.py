"""Confidence intervals and two-sample chi-square tests on view samples."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass
class Interval:
    estimate: float
    low: float
    high: float
    method: str

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "low": self.low, "high": self.high, "method": self.method}


def binomial_ci(k: int, n: int, conf: float = 0.95) -> Interval:
    ci = stats.binomtest(int(k), int(n)).proportion_ci(conf, method="wilson")
    return Interval(k / n, float(ci.low), float(ci.high), "wilson")


def cluster_ci(successes, sizes, conf: float = 0.95) -> Interval:
    """Ratio estimate sum(k)/sum(n) with a cluster-robust normal interval;
    the cluster (one coin draw) is the sampling unit."""
    k = np.asarray(successes, dtype=float)
    n = np.asarray(sizes, dtype=float)
    C = len(k)
    p = k.sum() / n.sum()
    if C < 2:
        return Interval(p, 0.0, 1.0, "cluster")
    var = C / (C - 1) * np.sum((k - p * n) ** 2) / n.sum() ** 2
    z = stats.norm.ppf(0.5 + conf / 2)
    half = z * math.sqrt(var)
    return Interval(float(p), float(max(0.0, p - half)), float(min(1.0, p + half)), "cluster")


@dataclass
class ChiTest:
    feature: str
    stat: float
    dof: int
    p: float


def chi2_two_sample(a, b, min_expected: float = 5.0, feature: str = "") -> ChiTest:
    """Homogeneity test of two samples of category codes.  Categories with
    pooled expected count below ``min_expected`` in the smaller sample are
    pooled into one bin (a fixed rule, not a tuned binning)."""
    a = np.asarray(a)
    b = np.asarray(b)
    cats, inv = np.unique(np.concatenate([a, b]), return_inverse=True)
    K = len(cats)
    ca = np.bincount(inv[: len(a)], minlength=K)
    cb = np.bincount(inv[len(a):], minlength=K)
    expected_small = (ca + cb) * min(len(a), len(b)) / (len(a) + len(b))
    rare = expected_small < min_expected
    if rare.any():
        ca = np.append(ca[~rare], ca[rare].sum())
        cb = np.append(cb[~rare], cb[rare].sum())
    keep = (ca + cb) > 0
    table = np.stack([ca[keep], cb[keep]])
    if table.shape[1] < 2:
        return ChiTest(feature, 0.0, 0, 1.0)
    stat, p, dof, _ = stats.chi2_contingency(table, correction=False)
    return ChiTest(feature, float(stat), int(dof), float(p))


def view_tests(real: np.ndarray, sim: np.ndarray, pairs: bool = True, min_expected: float = 5.0,
               names: list[str] | None = None) -> list[ChiTest]:
    """Marginal test per view column plus a joint test per column pair.
    Columns constant across both samples carry no information and are
    skipped."""
    real = np.asarray(real, dtype=np.int64)
    sim = np.asarray(sim, dtype=np.int64)
    both = np.concatenate([real, sim])
    live = [j for j in range(both.shape[1]) if both[:, j].min() != both[:, j].max()]
    names = names or [f"c{j}" for j in range(both.shape[1])]
    out = [chi2_two_sample(real[:, j], sim[:, j], min_expected, names[j]) for j in live]
    if pairs:
        for i, j in itertools.combinations(live, 2):
            base = int(both[:, j].max()) + 2
            ka = real[:, i] * base + (real[:, j] + 1)
            kb = sim[:, i] * base + (sim[:, j] + 1)
            out.append(chi2_two_sample(ka, kb, min_expected, f"{names[i]}x{names[j]}"))
    return out


def bonferroni(pvalues, n_tests: int | None = None) -> float:
    """Bonferroni-adjusted minimum p-value (1.0 for an empty family)."""
    ps = list(pvalues)
    if not ps:
        return 1.0
    n = n_tests if n_tests is not None else len(ps)
    return float(min(1.0, min(ps) * n))
