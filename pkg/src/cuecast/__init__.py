"""Deterministic tooling around compound emotion recognition pipelines.

Turns facial/vocal cue tables into LLM prompts, cuts annotation timelines
into segments and folds, aggregates and ensembles frame-level predictions,
and scores them with per-class, average and weighted F1.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    BASIC,
    CHALLENGE,
    COMPOUND,
    BasicEmotion,
    ClassSet,
    CompoundEmotion,
    ScoreVector,
    normalize,
    pair_of,
)
from .errors import CuecastError  # noqa: E402

__all__ = [
    "BASIC",
    "CHALLENGE",
    "COMPOUND",
    "BasicEmotion",
    "ClassSet",
    "CompoundEmotion",
    "CuecastError",
    "ScoreVector",
    "normalize",
    "pair_of",
]
