"""Association rules between classes mined from commit transactions."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping

from .model import ClassId


def _pair(m: ClassId, n: ClassId) -> tuple[ClassId, ClassId]:
    return (m, n) if m <= n else (n, m)


@dataclass(frozen=True)
class RuleTable:
    """Co-commit counts.  ``pair_counts`` is keyed by the sorted pair."""

    pair_counts: Mapping[tuple[ClassId, ClassId], int]
    class_counts: Mapping[ClassId, int]
    total: int

    def support(self, m: ClassId, n: ClassId) -> int:
        return self.pair_counts.get(_pair(m, n), 0)

    def confidence(self, m: ClassId, n: ClassId) -> float:
        denom = self.class_counts.get(m, 0)
        if denom == 0:
            return 0.0
        return self.support(m, n) / denom


def build_rules(transactions: Iterable) -> RuleTable:
    """Count single-antecedent rules.  Accepts a ``TransactionSet`` or an iterable of class sets."""
    if hasattr(transactions, "transactions"):
        transactions = [t.classes for t in transactions.transactions]
    pairs: Counter = Counter()
    singles: Counter = Counter()
    total = 0
    for classes in transactions:
        total += 1
        members = sorted(set(classes))
        singles.update(members)
        pairs.update(combinations(members, 2))
    return RuleTable(dict(pairs), dict(singles), total)


def support(t: RuleTable, m: ClassId, n: ClassId) -> int:
    return t.support(m, n)


def confidence(t: RuleTable, m: ClassId, n: ClassId) -> float:
    return t.confidence(m, n)


def dump_rules(t: RuleTable, path: str | Path) -> int:
    """Write ``m,n,support,confidence_mn,confidence_nm`` rows; returns the row count."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "n", "support", "confidence_mn", "confidence_nm"])
        for m, n in sorted(t.pair_counts):
            w.writerow([m, n, t.pair_counts[(m, n)], repr(t.confidence(m, n)), repr(t.confidence(n, m))])
    return len(t.pair_counts)
