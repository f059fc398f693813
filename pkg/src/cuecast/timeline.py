"""Frame windows, segment cutting and stratified k-fold splitting."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .core import COMPOUND
from .errors import EmptySegment, NonPositiveRate, TooFewSegments
from .ingest import SegmentTimeline

WINDOW_POLICIES = ("truncate_at_edges", "require_full")


@dataclass(frozen=True)
class WindowSpec:
    size: int
    hop: int
    policy: str = "truncate_at_edges"

    def __post_init__(self) -> None:
        if self.size <= 0 or self.hop <= 0:
            raise ValueError("window size and hop must be positive")
        if self.hop > self.size:
            raise ValueError(f"hop ({self.hop}) must not exceed size ({self.size})")
        if self.policy not in WINDOW_POLICIES:
            raise ValueError(f"policy must be one of {WINDOW_POLICIES}")


def build_windows(n_frames: int, spec: WindowSpec) -> list[tuple[int, int]]:
    """Inclusive ``(first, last)`` frame windows starting at multiples of ``spec.hop``.

    With ``truncate_at_edges`` every start below ``n_frames`` yields a window,
    clipped at the last frame. With ``require_full`` windows that would run
    past the end are dropped.
    """
    windows = []
    for start in range(0, n_frames, spec.hop):
        end = start + spec.size - 1
        if end >= n_frames:
            if spec.policy == "require_full":
                break
            end = n_frames - 1
        windows.append((start, end))
    return windows


def audio_hop_seconds(frame_rate: float) -> float:
    """Audio hop length that yields one audio step per video frame."""
    if not frame_rate > 0:
        raise NonPositiveRate(f"frame rate must be positive, got {frame_rate}", frame_rate=frame_rate)
    return 1.0 / frame_rate


@dataclass(frozen=True)
class Segment:
    segment_id: str
    video_id: str
    start_s: float
    end_s: float
    label: str
    first_frame: int
    last_frame: int

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s

    @property
    def n_frames(self) -> int:
        return self.last_frame - self.first_frame + 1


def _exact(x: float) -> Fraction:
    # decimal reading of the value, so 0.1 s at 30 fps is exactly frame 3
    return Fraction(repr(float(x)))


def frame_span(start_s: float, end_s: float, frame_rate: float) -> tuple[int, int]:
    fps = _exact(frame_rate)
    return math.floor(_exact(start_s) * fps), math.ceil(_exact(end_s) * fps) - 1


def cut_segments(tl: SegmentTimeline, frame_rate: float) -> list[Segment]:
    """One :class:`Segment` per timeline entry, ordered by (video, start).

    Frame spans use floor(start*fps) .. ceil(end*fps)-1. When two segments of
    a video share a boundary frame, the later segment keeps it.
    """
    if not frame_rate > 0:
        raise NonPositiveRate(f"frame rate must be positive, got {frame_rate}", frame_rate=frame_rate)
    segments = []
    for video in tl.videos():
        spans = []
        entries = tl.for_video(video)
        for e in entries:
            spans.append(list(frame_span(e.start_s, e.end_s, frame_rate)))
        for i in range(len(spans) - 1):
            nxt_first = spans[i + 1][0]
            if spans[i][1] >= nxt_first:
                spans[i][1] = nxt_first - 1
        for k, (e, (first, last)) in enumerate(zip(entries, spans)):
            if last < first:
                raise EmptySegment(
                    f"segment {video}@{e.start_s}-{e.end_s} has no frames at {frame_rate} fps",
                    video=video, row=e.row,
                )
            segments.append(Segment(f"{video}#{k:03d}", video, e.start_s, e.end_s, e.label, first, last))
    return segments


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    seed: int
    mapping: dict[str, int]

    def fold_of(self, segment_id: str) -> int:
        return self.mapping[segment_id]

    def members(self, fold: int) -> list[str]:
        return sorted(s for s, f in self.mapping.items() if f == fold)


def _canonical_key(s: Segment):
    return (s.video_id, s.start_s, s.end_s, s.label, s.segment_id)


def kfold_split(segments: list[Segment], k: int = 5, seed: int = 0) -> FoldAssignment:
    """Stratified assignment of segments to ``k`` folds.

    Classes are visited in canonical order; within a class the segments are
    sorted canonically, shuffled with ``seed`` and dealt round-robin, the
    dealer position carrying over between classes so fold sizes also stay
    within one of each other.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(segments) < k:
        raise TooFewSegments(f"{len(segments)} segments cannot fill {k} folds", found=len(segments), k=k)
    ids = [s.segment_id for s in segments]
    if len(set(ids)) != len(ids):
        raise ValueError("segment ids must be unique")

    rng = random.Random(seed)
    by_label: dict[str, list[Segment]] = {}
    for s in segments:
        by_label.setdefault(s.label, []).append(s)

    def label_order(label: str):
        return (0, COMPOUND.index(label)) if label in COMPOUND else (1, label)

    mapping: dict[str, int] = {}
    dealer = 0
    for label in sorted(by_label, key=label_order):
        group = sorted(by_label[label], key=_canonical_key)
        rng.shuffle(group)
        for s in group:
            mapping[s.segment_id] = dealer % k
            dealer += 1
    return FoldAssignment(k, seed, dict(sorted(mapping.items())))
