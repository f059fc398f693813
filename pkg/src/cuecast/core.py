"""Emotion taxonomies, label resolution and score vectors.

Canonical ordering is alphabetical by class name in every taxonomy. Class
ids are positions in that ordering and every tie in the toolkit is broken
towards the lowest id.

Basic (MELD) classes::

    0 anger  1 disgust  2 fear  3 joy  4 neutral  5 sadness  6 surprise

Compound classes (challenge subset plus ``Other``)::

    0 Angrily Surprised      4 Other
    1 Disgustedly Surprised  5 Sadly Angry
    2 Fearfully Surprised    6 Sadly Fearful
    3 Happily Surprised      7 Sadly Surprised

"Happy"/"Happily" in the compound vocabulary is the basic class ``joy``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import BadProbabilitySum, NonFiniteInput, OtherHasNoPair, UnknownLabel, WrongClassSet

PROBABILITY_TOLERANCE = 1e-6


class BasicEmotion(IntEnum):
    ANGER = 0
    DISGUST = 1
    FEAR = 2
    JOY = 3
    NEUTRAL = 4
    SADNESS = 5
    SURPRISE = 6

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "BasicEmotion":
        return cls(BASIC.index(BASIC.resolve(text)))


class CompoundEmotion(IntEnum):
    ANGRILY_SURPRISED = 0
    DISGUSTEDLY_SURPRISED = 1
    FEARFULLY_SURPRISED = 2
    HAPPILY_SURPRISED = 3
    OTHER = 4
    SADLY_ANGRY = 5
    SADLY_FEARFUL = 6
    SADLY_SURPRISED = 7

    @property
    def label(self) -> str:
        return self.name.replace("_", " ").title()

    @property
    def pair(self) -> tuple[BasicEmotion, BasicEmotion] | None:
        return PAIR_MAP.get(self)

    @classmethod
    def parse(cls, text: str) -> "CompoundEmotion":
        return cls(COMPOUND.index(COMPOUND.resolve(text)))


# (adverb emotion, head emotion), e.g. Sadly Angry -> (sadness, anger)
PAIR_MAP: dict[CompoundEmotion, tuple[BasicEmotion, BasicEmotion]] = {
    CompoundEmotion.ANGRILY_SURPRISED: (BasicEmotion.ANGER, BasicEmotion.SURPRISE),
    CompoundEmotion.DISGUSTEDLY_SURPRISED: (BasicEmotion.DISGUST, BasicEmotion.SURPRISE),
    CompoundEmotion.FEARFULLY_SURPRISED: (BasicEmotion.FEAR, BasicEmotion.SURPRISE),
    CompoundEmotion.HAPPILY_SURPRISED: (BasicEmotion.JOY, BasicEmotion.SURPRISE),
    CompoundEmotion.SADLY_ANGRY: (BasicEmotion.SADNESS, BasicEmotion.ANGER),
    CompoundEmotion.SADLY_FEARFUL: (BasicEmotion.SADNESS, BasicEmotion.FEAR),
    CompoundEmotion.SADLY_SURPRISED: (BasicEmotion.SADNESS, BasicEmotion.SURPRISE),
}


def pair_of(compound: CompoundEmotion) -> tuple[BasicEmotion, BasicEmotion]:
    """Return the two basic emotions a compound class is made of."""
    compound = CompoundEmotion(compound)
    if compound is CompoundEmotion.OTHER:
        raise OtherHasNoPair("'Other' has no basic-emotion pair")
    return PAIR_MAP[compound]


def _key(text: str) -> str:
    return re.sub(r"[\s_]+", " ", str(text).strip().lower())


@dataclass(frozen=True)
class ClassSet:
    """An ordered label vocabulary with case-insensitive alias resolution."""

    name: str
    labels: tuple[str, ...]
    aliases: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        table = {_key(label): label for label in self.labels}
        for alias, target in self.aliases:
            if target in self.labels:
                table.setdefault(_key(alias), target)
        object.__setattr__(self, "_table", table)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"{label!r} is not a {self.name} class", label=label) from None

    def resolve(self, text: str) -> str:
        """Map free-form text (any case, aliases) to the canonical label."""
        try:
            return self._table[_key(text)]  # type: ignore[attr-defined]
        except KeyError:
            raise UnknownLabel(f"{text!r} is not a {self.name} class", label=text) from None

    def subset(self, name: str, drop: Iterable[str]) -> "ClassSet":
        dropped = set(drop)
        return ClassSet(name, tuple(l for l in self.labels if l not in dropped), self.aliases)


_BASIC_ALIASES = (
    ("angry", "anger"), ("angrily", "anger"),
    ("disgusted", "disgust"), ("disgustedly", "disgust"),
    ("fearful", "fear"), ("fearfully", "fear"), ("scared", "fear"),
    ("happy", "joy"), ("happily", "joy"), ("happiness", "joy"), ("joyful", "joy"),
    ("sad", "sadness"), ("sadly", "sadness"),
    ("surprised", "surprise"),
)

_COMPOUND_ALIASES = (
    # short forms used when prompting zero-shot models
    ("anger-surprise", "Angrily Surprised"),
    ("disgust-surprise", "Disgustedly Surprised"),
    ("fear-surprise", "Fearfully Surprised"),
    ("happy-surprise", "Happily Surprised"),
    ("joy-surprise", "Happily Surprised"),
    ("anger-sadness", "Sadly Angry"),
    ("fear-sadness", "Sadly Fearful"),
    ("sad-surprise", "Sadly Surprised"),
)

BASIC = ClassSet("basic", tuple(e.label for e in BasicEmotion), _BASIC_ALIASES)
COMPOUND = ClassSet("compound", tuple(e.label for e in CompoundEmotion), _COMPOUND_ALIASES)
# the seven classes that are scored; Other is train-only
CHALLENGE = COMPOUND.subset("challenge", [CompoundEmotion.OTHER.label])
OTHER = CompoundEmotion.OTHER.label

CLASS_SETS = {cs.name: cs for cs in (BASIC, COMPOUND, CHALLENGE)}


def class_set(name: str) -> ClassSet:
    try:
        return CLASS_SETS[name]
    except KeyError:
        raise WrongClassSet(f"unknown class set {name!r}", class_set=name) from None


@dataclass(frozen=True)
class ScoreVector:
    """Per-class logits or probabilities over a class set."""

    class_set: ClassSet
    values: tuple[float, ...]
    kind: str = "probabilities"

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if self.kind not in ("logits", "probabilities"):
            raise ValueError(f"kind must be 'logits' or 'probabilities', got {self.kind!r}")
        if len(values) != len(self.class_set):
            raise WrongClassSet(
                f"{len(values)} values for {len(self.class_set)} {self.class_set.name} classes",
                expected=len(self.class_set), found=len(values),
            )
        if not all(math.isfinite(v) for v in values):
            raise NonFiniteInput("score vector contains non-finite values")
        if self.kind == "probabilities":
            total = math.fsum(values)
            if min(values) < 0 or abs(total - 1.0) > PROBABILITY_TOLERANCE:
                raise BadProbabilitySum(None, total)

    def argmax(self) -> int:
        """Index of the largest value; ties go to the lowest index."""
        return argmax(self.values)

    def top_label(self) -> str:
        return self.class_set.labels[self.argmax()]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.class_set.labels, self.values))


def argmax(values: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


def softmax(values: Sequence[float]) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("softmax input contains non-finite values")
    e = np.exp(x - x.max())
    return e / e.sum()


def normalize(v: ScoreVector) -> ScoreVector:
    """Softmax a logit vector into a probability vector over the same classes."""
    if v.kind != "logits":
        raise ValueError("normalize expects a logit vector")
    return ScoreVector(v.class_set, tuple(softmax(v.values).tolist()), "probabilities")
