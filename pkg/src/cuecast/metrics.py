"""Per-class confusion counts, the F1 family and dataset distribution tables."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import COMPOUND, ClassSet
from .errors import LengthMismatch, UnknownLabel, ZeroSupport

WEIGHTINGS = ("average", "weighted")


@dataclass(frozen=True)
class ClassCounts:
    """One-vs-rest TP/FP/FN per evaluated class.

    Counts from disjoint shards of data merge with ``+``.
    """

    classes: tuple[str, ...]
    tp: tuple[int, ...]
    fp: tuple[int, ...]
    fn: tuple[int, ...]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(t + f for t, f in zip(self.tp, self.fn))

    def __add__(self, other: "ClassCounts") -> "ClassCounts":
        if other.classes != self.classes:
            raise ValueError("cannot merge counts over different class sets")
        add = lambda a, b: tuple(x + y for x, y in zip(a, b))  # noqa: E731
        return ClassCounts(self.classes, add(self.tp, other.tp), add(self.fp, other.fp), add(self.fn, other.fn))

    def index(self, c: str | int) -> int:
        return c if isinstance(c, int) else self.classes.index(c)


def confusion(
    preds: Sequence[str],
    gts: Sequence[str],
    class_set: ClassSet,
    *,
    extra_labels: Iterable[str] = (),
) -> ClassCounts:
    """Count TP/FP/FN for every class of ``class_set``.

    ``extra_labels`` are valid labels that are not scored themselves (e.g. a
    predicted ``Other``); they still produce a false negative for the true
    class.
    """
    if len(preds) != len(gts):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(gts)} ground-truth labels",
                             preds=len(preds), gts=len(gts))
    pos = {c: i for i, c in enumerate(class_set.labels)}
    extra = set(extra_labels)
    n = len(pos)
    tp, fp, fn = [0] * n, [0] * n, [0] * n
    for p, g in zip(preds, gts):
        pi, gi = pos.get(p), pos.get(g)
        if pi is None and p not in extra:
            raise UnknownLabel(f"unknown predicted label {p!r}", label=p)
        if gi is None and g not in extra:
            raise UnknownLabel(f"unknown ground-truth label {g!r}", label=g)
        if pi == gi:
            if pi is not None:
                tp[pi] += 1
            continue
        if pi is not None:
            fp[pi] += 1
        if gi is not None:
            fn[gi] += 1
    return ClassCounts(class_set.labels, tuple(tp), tuple(fp), tuple(fn))


def f1_per_class(counts: ClassCounts, c: str | int) -> float:
    """F1 of one class; any zero denominator makes it 0."""
    i = counts.index(c)
    tp, fp, fn = counts.tp[i], counts.fp[i], counts.fn[i]
    if tp + fp == 0 or tp + fn == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class F1Report:
    classes: tuple[str, ...]
    per_class: tuple[float, ...]
    support: tuple[int, ...]
    average_f1: float
    weighted_f1: float | None

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def to_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "average_f1": self.average_f1,
            "weighted_f1": self.weighted_f1,
            "per_class": [
                {"class": c, "f1": f, "support": s}
                for c, f, s in zip(self.classes, self.per_class, self.support)
            ],
        }


def f1_aggregate(counts: ClassCounts, weighting: str = "weighted") -> F1Report:
    """Average F1 (equal class weights) and weighted F1 (ground-truth support weights).

    Both aggregates are always filled when total support is positive.
    ``weighting`` only decides what happens with an empty ground truth:
    ``weighted`` raises :class:`ZeroSupport`, ``average`` reports
    ``weighted_f1=None``.
    """
    if weighting not in WEIGHTINGS:
        raise ValueError(f"weighting must be one of {WEIGHTINGS}")
    per_class = tuple(f1_per_class(counts, i) for i in range(len(counts.classes)))
    support = counts.support
    average = math.fsum(per_class) / len(per_class)
    total = sum(support)
    if total == 0:
        if weighting == "weighted":
            raise ZeroSupport("weighted F1 is undefined without ground-truth samples")
        weighted = None
    else:
        weighted = math.fsum(f * s for f, s in zip(per_class, support)) / total
    return F1Report(counts.classes, per_class, support, average, weighted)


def fold_summary(scores: Sequence[float], ddof: int = 0) -> tuple[float, float]:
    """Mean and standard deviation of per-fold scores (``ddof=0``: population std)."""
    if not scores:
        raise ValueError("no fold scores")
    mean = statistics.fmean(scores)
    if ddof == 0:
        return mean, statistics.pstdev(scores)
    if len(scores) < 2:
        return mean, 0.0
    return mean, statistics.stdev(scores)


@dataclass(frozen=True)
class DistributionRow:
    label: str
    count: int
    duration_s: float


def distribution_report(segments: Iterable, class_set: ClassSet = COMPOUND) -> tuple[list[DistributionRow], DistributionRow]:
    """Segment count and summed duration per class, plus a total row.

    Accepts anything with ``label`` and ``duration`` attributes (timeline
    entries or cut segments). Classes without segments report zeros.
    """
    counts = {c: 0 for c in class_set.labels}
    durations: dict[str, list[float]] = {c: [] for c in class_set.labels}
    for s in segments:
        if s.label not in counts:
            raise UnknownLabel(f"unknown label {s.label!r}", label=s.label)
        counts[s.label] += 1
        durations[s.label].append(s.duration)
    rows = [DistributionRow(c, counts[c], math.fsum(durations[c])) for c in class_set.labels]
    total = DistributionRow(
        "Total",
        sum(counts.values()),
        math.fsum(d for ds in durations.values() for d in ds),
    )
    return rows, total


def format_distribution(rows: Sequence[DistributionRow], total: DistributionRow) -> str:
    """CSV with durations rounded to two decimals."""
    lines = ["class,segments,duration_s"]
    for r in [*rows, total]:
        lines.append(f"{r.label},{r.count},{r.duration_s:.2f}")
    return "\n".join(lines) + "\n"


def confusion_matrix(preds: Sequence[str], gts: Sequence[str], rows: Sequence[str],
                     cols: Sequence[str]) -> list[list[int]]:
    """Counts of ground truth ``rows[i]`` predicted as ``cols[j]``."""
    if len(preds) != len(gts):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(gts)} ground-truth labels",
                             preds=len(preds), gts=len(gts))
    ri = {c: i for i, c in enumerate(rows)}
    ci = {c: j for j, c in enumerate(cols)}
    m = [[0] * len(cols) for _ in rows]
    for p, g in zip(preds, gts):
        if g not in ri or p not in ci:
            raise UnknownLabel(f"label outside the matrix axes: {g!r} -> {p!r}", label=g if g not in ri else p)
        m[ri[g]][ci[p]] += 1
    return m
