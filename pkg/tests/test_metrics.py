import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import f1_score

from cuecast.core import BASIC, CHALLENGE, COMPOUND, ClassSet
from cuecast.errors import LengthMismatch, UnknownLabel, ZeroSupport
from cuecast.ingest import TimelineEntry, parse_timeline
from cuecast.metrics import (
    ClassCounts,
    confusion,
    confusion_matrix,
    distribution_report,
    f1_aggregate,
    f1_per_class,
    fold_summary,
    format_distribution,
)

from oracles import f1_oracle

ABC = ClassSet("abc", ("A", "B", "C"))


def test_confusion_examples():
    c = confusion(["A", "B", "C"], ["A", "B", "C"], ABC)
    assert c.fp == c.fn == (0, 0, 0) and c.tp == (1, 1, 1)
    c = confusion(["A"], ["B"], ABC)
    assert c.tp == (0, 0, 0) and c.fp == (1, 0, 0) and c.fn == (0, 1, 0)
    with pytest.raises(LengthMismatch):
        confusion(["A"], [], ABC)
    with pytest.raises(UnknownLabel):
        confusion(["Z"], ["A"], ABC)


def test_confusion_random_vs_loops():
    rng = random.Random(2)
    preds = [rng.choice(BASIC.labels) for _ in range(500)]
    gts = [rng.choice(BASIC.labels) for _ in range(500)]
    c = confusion(preds, gts, BASIC)
    for i, k in enumerate(BASIC.labels):
        assert c.tp[i] == sum(p == k == g for p, g in zip(preds, gts))
        assert c.fp[i] == sum(p == k != g for p, g in zip(preds, gts))
        assert c.fn[i] == sum(g == k != p for p, g in zip(preds, gts))
    assert sum(c.tp) == sum(p == g for p, g in zip(preds, gts))


def test_extra_labels_score_as_errors():
    c = confusion(["Other", "Sadly Angry"], ["Sadly Angry", "Sadly Angry"], CHALLENGE, extra_labels=["Other"])
    i = CHALLENGE.index("Sadly Angry")
    assert (c.tp[i], c.fp[i], c.fn[i]) == (1, 0, 1)


def _counts(tp, fp, fn):
    return ClassCounts(("A",), (tp,), (fp,), (fn,))


def test_f1_per_class_examples():
    assert f1_per_class(_counts(3, 1, 2), "A") == pytest.approx(2 / 3, abs=1e-15)
    assert f1_per_class(_counts(0, 0, 0), 0) == 0
    assert f1_per_class(_counts(0, 4, 0), 0) == 0
    assert f1_per_class(_counts(5, 0, 0), 0) == 1


def test_aggregate_examples():
    # F1 = (1, 0) with supports (9, 1)
    counts = ClassCounts(("A", "B"), (9, 0), (1, 0), (0, 1))
    r = f1_aggregate(counts)
    assert r.per_class[1] == 0
    counts = ClassCounts(("A", "B"), (9, 0), (0, 0), (0, 1))
    r = f1_aggregate(counts)
    assert r.per_class == (1.0, 0.0)
    assert r.average_f1 == pytest.approx(0.5) and r.weighted_f1 == pytest.approx(0.9)
    perfect = confusion(list("ABC"), list("ABC"), ABC)
    assert f1_aggregate(perfect).average_f1 == 1 == f1_aggregate(perfect).weighted_f1


def test_absent_class_still_weighs_in_average():
    r = f1_aggregate(confusion(["A", "B"], ["A", "B"], ABC))
    assert r.per_class == (1.0, 1.0, 0.0)
    assert r.average_f1 == pytest.approx(2 / 3)
    assert r.weighted_f1 == 1.0


def test_zero_support():
    empty = confusion([], [], ABC)
    with pytest.raises(ZeroSupport):
        f1_aggregate(empty, "weighted")
    r = f1_aggregate(empty, "average")
    assert r.average_f1 == 0 and r.weighted_f1 is None
    with pytest.raises(ValueError):
        f1_aggregate(empty, "macro")


labels3 = st.sampled_from(ABC.labels)


@settings(max_examples=200)
@given(st.lists(st.tuples(labels3, labels3), min_size=1, max_size=30))
def test_f1_matches_exact_oracle(pairs):
    preds, gts = [p for p, _ in pairs], [g for _, g in pairs]
    r = f1_aggregate(confusion(preds, gts, ABC))
    per_class, avg, weighted = f1_oracle(preds, gts, ABC.labels)
    assert r.per_class == pytest.approx(per_class, abs=1e-12)
    assert abs(r.average_f1 - avg) <= 1e-12
    assert abs(r.weighted_f1 - weighted) <= 1e-12


@settings(max_examples=100)
@given(st.lists(st.tuples(labels3, labels3), min_size=1, max_size=30), st.randoms(use_true_random=False))
def test_permutation_and_sharding(pairs, rnd):
    preds, gts = [p for p, _ in pairs], [g for _, g in pairs]
    whole = confusion(preds, gts, ABC)
    shuffled = pairs[:]
    rnd.shuffle(shuffled)
    assert confusion([p for p, _ in shuffled], [g for _, g in shuffled], ABC) == whole
    cut = rnd.randint(0, len(pairs))
    assert confusion(preds[:cut], gts[:cut], ABC) + confusion(preds[cut:], gts[cut:], ABC) == whole


@settings(max_examples=100)
@given(st.lists(st.tuples(labels3, labels3), min_size=1, max_size=30))
def test_f1_properties(pairs):
    preds, gts = [p for p, _ in pairs], [g for _, g in pairs]
    c = confusion(preds, gts, ABC)
    r = f1_aggregate(c)
    for i, f in enumerate(r.per_class):
        assert 0 <= f <= 1
        assert (f == 1) == (c.fp[i] == 0 and c.fn[i] == 0 and c.tp[i] > 0)
    if len(set(r.support)) == 1:
        assert r.weighted_f1 == pytest.approx(r.average_f1, abs=1e-12)


def test_cross_check_sklearn():
    # a second, independent implementation of the same averages
    rng = random.Random(9)
    for _ in range(50):
        gts = [rng.choice(CHALLENGE.labels) for _ in range(200)]
        preds = [rng.choice(CHALLENGE.labels) for _ in range(200)]
        r = f1_aggregate(confusion(preds, gts, CHALLENGE))
        labels = list(CHALLENGE.labels)
        macro = f1_score(gts, preds, labels=labels, average="macro", zero_division=0)
        weighted = f1_score(gts, preds, labels=labels, average="weighted", zero_division=0)
        assert r.average_f1 == pytest.approx(macro, abs=1e-12)
        assert r.weighted_f1 == pytest.approx(weighted, abs=1e-12)


def test_fold_summary_population_std():
    # per-fold scores whose mean/std are reported with population std
    mean, std = fold_summary([40, 50])
    assert (mean, std) == (45, 5)
    assert fold_summary([3.0]) == (3.0, 0.0)
    assert fold_summary([3.0], ddof=1) == (3.0, 0.0)
    mean, std = fold_summary([40, 50], ddof=1)
    assert std == pytest.approx(7.0710678118654755)
    with pytest.raises(ValueError):
        fold_summary([])


def test_distribution_examples():
    rows, total = distribution_report([])
    assert total.count == 0 and all(r.count == 0 for r in rows)
    rows, total = distribution_report([TimelineEntry("v", 0.0, 2.5, "Sadly Angry")])
    text = format_distribution(rows, total)
    assert "Sadly Angry,1,2.50\n" in text
    assert text.endswith("Total,1,2.50\n")
    with pytest.raises(UnknownLabel):
        distribution_report([TimelineEntry("v", 0, 1, "joy")])


def test_distribution_toy(toy_dir):
    rows, total = distribution_report(parse_timeline(toy_dir / "timeline.csv").entries)
    assert [r.label for r in rows] == list(COMPOUND.labels)
    assert total.count == 5
    assert total.duration_s == pytest.approx(5.2)


def test_confusion_matrix():
    m = confusion_matrix(["A", "B", "B"], ["A", "A", "C"], ["A", "B", "C"], ["A", "B", "C"])
    assert m == [[1, 1, 0], [0, 0, 0], [0, 1, 0]]
    with pytest.raises(UnknownLabel):
        confusion_matrix(["Z"], ["A"], ["A"], ["A"])


@pytest.mark.parametrize("folds,ddof,printed", [
    ((34.82, 54.47, 36.47, 51.06, 48.08), 0, "44.98 ± 7.90"),
    ((48.09, 48.09, 34.59, 59.24, 55.83), 0, "49.17 ± 8.49"),
    ((42.74, 65.56, 41.66, 54.74, 70.65), 0, "55.07 ± 11.70"),
    ((42.74, 65.56, 41.66, 54.74, 70.65), 1, "55.07 ± 13.08"),
    ((9.31, 4.83, 8.27, 12.18, 8.87), 1, "8.69 ± 2.63"),
])
def test_fold_summary_published_rows(folds, ddof, printed):
    # the cross-validation tables mix population and sample std
    mean, std = fold_summary(folds, ddof=ddof)
    assert f"{mean:.2f} ± {std:.2f}" == printed
