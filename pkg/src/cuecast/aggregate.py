"""Frame-to-video aggregation, compound derivation and frame-level label ensembling.

Every vote and argmax breaks ties towards the lowest canonical class id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import BASIC, COMPOUND, OTHER, ClassSet, CompoundEmotion, ScoreVector, argmax, normalize, pair_of
from .errors import BadProbabilitySum, EmptyVideo, LengthMismatch, MisalignedLogs, MixedClassSets, WrongClassSet
from .ingest import PredictionLog

STRATEGIES = ("majority", "avg-logits", "avg-probs")


@dataclass(frozen=True)
class EnsembleSpec:
    window: int = 10
    weights: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("ensemble window must be at least 1")
        for model, w in self.weights.items():
            if isinstance(w, bool) or not isinstance(w, int) or w < 1:
                raise ValueError(f"weight for {model!r} must be a positive integer, got {w!r}")

    def weight(self, model_id: str) -> int:
        return self.weights.get(model_id, 1)


def _vote(counts: Sequence[int]) -> int:
    return argmax(counts)


def video_label_majority(labels: Sequence[str], class_set: ClassSet) -> str:
    """Most frequent frame label."""
    if not labels:
        raise EmptyVideo("no frames to aggregate")
    counts = [0] * len(class_set)
    for label in labels:
        counts[class_set.index(label)] += 1
    return class_set.labels[_vote(counts)]


def _stack(frames: Sequence[ScoreVector], kind: str) -> tuple[ClassSet, np.ndarray]:
    if not frames:
        raise EmptyVideo("no frames to aggregate")
    cs = frames[0].class_set
    if any(f.class_set != cs for f in frames):
        raise MixedClassSets("frames mix class sets")
    if any(f.kind != kind for f in frames):
        raise ValueError(f"expected {kind} vectors")
    return cs, np.array([f.values for f in frames], dtype=np.float64)


def video_label_avg_logits(frames: Sequence[ScoreVector]) -> str:
    """Class with the largest mean logit."""
    cs, x = _stack(frames, "logits")
    return cs.labels[argmax(x.mean(axis=0).tolist())]


def video_label_avg_probs(frames: Sequence[ScoreVector]) -> str:
    """Class with the largest mean probability."""
    cs, x = _stack(frames, "probabilities")
    sums = x.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > 1e-6)
    if bad.size:
        raise BadProbabilitySum(int(bad[0]), float(sums[bad[0]]))
    return cs.labels[argmax(x.mean(axis=0).tolist())]


def video_label(log: PredictionLog, strategy: str) -> str:
    """Collapse a frame-level log to one video label with the given strategy.

    Logit logs are softmaxed for ``avg-probs``; probability logs cannot be
    turned back into logits, so ``avg-logits`` requires a logit log.
    """
    if strategy == "majority":
        return video_label_majority(log.labels(), log.class_set)
    if log.kind == "label":
        raise ValueError(f"strategy {strategy!r} needs score vectors, log {log.model_id} has labels")
    if strategy == "avg-logits":
        if log.kind != "logits":
            raise ValueError("avg-logits needs a logit log")
        return video_label_avg_logits(log.frames)
    if strategy == "avg-probs":
        frames = log.frames if log.kind == "probabilities" else [normalize(f) for f in log.frames]
        return video_label_avg_probs(frames)
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def compound_from_basic(probs: ScoreVector) -> CompoundEmotion:
    """Compound class whose two basic emotions have the largest summed probability."""
    if probs.class_set != BASIC:
        raise WrongClassSet("compound derivation needs the 7 basic classes", class_set=probs.class_set.name)
    best, best_score = None, -math.inf
    for compound in CompoundEmotion:
        if compound is CompoundEmotion.OTHER:
            continue
        a, b = pair_of(compound)
        score = probs.values[a] + probs.values[b]
        if score > best_score:
            best, best_score = compound, score
    return best


def ensemble_labels(
    sequences: Mapping[str, Sequence[str]],
    class_set: ClassSet,
    spec: EnsembleSpec = EnsembleSpec(),
) -> list[str]:
    """Trailing-window weighted vote over several models' frame labels.

    For frame ``t`` every (model, frame) pair with frame in
    ``[max(0, t - window + 1), t]`` casts ``weight(model)`` votes.
    """
    if not sequences:
        raise MisalignedLogs("no models to ensemble")
    lengths = {len(s) for s in sequences.values()}
    if len(lengths) != 1:
        raise MisalignedLogs("models cover different numbers of frames", lengths=sorted(lengths))
    n = lengths.pop()
    n_classes = len(class_set)
    # per-frame weighted vote histogram, then a sliding sum over the window
    votes = np.zeros((n, n_classes), dtype=np.int64)
    frames = np.arange(n)
    for model, labels in sequences.items():
        idx = np.fromiter((class_set.index(l) for l in labels), dtype=np.int64, count=n)
        np.add.at(votes, (frames, idx), spec.weight(model))
    cum = np.vstack([np.zeros((1, n_classes), dtype=np.int64), np.cumsum(votes, axis=0)])
    lo = np.maximum(0, frames - spec.window + 1)
    window_votes = cum[frames + 1] - cum[lo]
    # np.argmax returns the first maximum, i.e. the lowest class id
    return [class_set.labels[i] for i in np.argmax(window_votes, axis=1)]


def ensemble_frames(logs: Sequence[PredictionLog], spec: EnsembleSpec = EnsembleSpec()) -> list[str]:
    """Ensemble the frame labels of several models on the same video."""
    if not logs:
        raise MisalignedLogs("no logs to ensemble")
    videos = {log.video_id for log in logs}
    if len(videos) != 1:
        raise MisalignedLogs("logs cover different videos", videos=sorted(videos))
    if len({len(log) for log in logs}) != 1:
        raise MisalignedLogs("logs cover different frame ranges", lengths=sorted({len(l) for l in logs}))
    ids = [log.model_id for log in logs]
    if len(set(ids)) != len(ids):
        raise MisalignedLogs("duplicate model ids", models=ids)
    class_set = _label_space(logs)
    return ensemble_labels({log.model_id: log.labels() for log in logs}, class_set, spec)


def _label_space(logs: Sequence[PredictionLog]) -> ClassSet:
    # compound logs with and without Other vote in the same 8-class space
    spaces = {BASIC if log.class_set == BASIC else COMPOUND for log in logs}
    if len(spaces) != 1:
        raise MixedClassSets("logs mix basic and compound classes")
    return spaces.pop()


def exclude_other(preds: Sequence[str], gts: Sequence[str]) -> tuple[list[str], list[str]]:
    """Drop positions whose ground truth is ``Other``; ``Other`` predictions stay."""
    if len(preds) != len(gts):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(gts)} ground-truth labels",
                             preds=len(preds), gts=len(gts))
    kept = [(p, g) for p, g in zip(preds, gts) if g != OTHER]
    return [p for p, _ in kept], [g for _, g in kept]
