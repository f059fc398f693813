"""Strict readers and writers for cue tables, timelines, prediction logs and transcripts.

Dialect: UTF-8, comma separated, ``.`` decimal point, mandatory header row.
Readers never return partial results: the first invalid record raises an
error carrying its line (or frame) number.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Iterable, Union

from .core import BASIC, CHALLENGE, COMPOUND, PROBABILITY_TOLERANCE, ClassSet, ScoreVector
from .errors import (
    BadProbabilitySum,
    DuplicateFrame,
    GapInFrames,
    MalformedRow,
    NegativeDuration,
    NonFiniteScore,
    OverlapError,
    SchemaError,
    ScoreOutOfRange,
    UnknownLabel,
    WrongAUCount,
)

Source = Union[str, bytes, Path, IO[str], IO[bytes]]

CUE_KINDS = ("au_intensity", "tone", "avd", "emotion_prob")
BOUNDED_KINDS = {"au_intensity", "avd", "emotion_prob"}
AU_COUNT = 20

# Py-Feat's 20 action units, in its output order
DEFAULT_AUS = (
    "AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU10", "AU11", "AU12",
    "AU14", "AU15", "AU17", "AU20", "AU23", "AU24", "AU25", "AU26", "AU28", "AU43",
)

AU_NAMES = {
    "AU01": "Inner brow raiser",
    "AU02": "Outer brow raiser",
    "AU04": "Brow lowerer",
    "AU05": "Upper lid raiser",
    "AU06": "Cheek raiser",
    "AU07": "Lid tightener",
    "AU09": "Nose wrinkler",
    "AU10": "Upper lip raiser",
    "AU11": "Nasolabial deepener",
    "AU12": "Lip corner puller",
    "AU14": "Dimpler",
    "AU15": "Lip corner depressor",
    "AU17": "Chin raiser",
    "AU20": "Lip stretcher",
    "AU23": "Lip tightener",
    "AU24": "Lip pressor",
    "AU25": "Lips part",
    "AU26": "Jaw drop",
    "AU28": "Lip suck",
    "AU43": "Eyes closed",
}

AVD_COLUMNS = ("arousal", "valence", "dominance")
_AU_RE = re.compile(r"^AU\d{2}$")


def _read_text(source: Source) -> str:
    if isinstance(source, Path):
        return source.read_bytes().decode("utf-8")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _fmt(x: float) -> str:
    # shortest repr round-trips exactly; integers keep a trailing .0
    return repr(float(x))


@dataclass(frozen=True)
class CueTable:
    """Per-frame cue scores (AU intensities, tone, AVD or emotion probabilities)."""

    kind: str
    cue_names: tuple[str, ...]
    frames: tuple[int, ...]
    rows: tuple[tuple[float, ...], ...]
    video_id: str = ""
    frame_rate: float = 25.0

    def __len__(self) -> int:
        return len(self.frames)

    def row(self, i: int) -> dict[str, float]:
        return dict(zip(self.cue_names, self.rows[i]))

    def column(self, name: str) -> list[float]:
        j = self.cue_names.index(name)
        return [r[j] for r in self.rows]

    def rows_between(self, first: int, last: int) -> list[tuple[float, ...]]:
        """Rows whose frame index lies in ``[first, last]``."""
        return [r for f, r in zip(self.frames, self.rows) if first <= f <= last]

    def latest_before(self, frame: int) -> tuple[float, ...] | None:
        found = None
        for f, r in zip(self.frames, self.rows):
            if f > frame:
                break
            found = r
        return found


def parse_cue_table(
    source: Source,
    kind: str,
    *,
    video_id: str = "",
    frame_rate: float = 25.0,
    au_set: Iterable[str] | None = None,
) -> CueTable:
    if kind not in CUE_KINDS:
        raise ValueError(f"unknown cue kind {kind!r}; expected one of {CUE_KINDS}")
    if not frame_rate > 0:
        raise ValueError("frame_rate must be positive")
    reader = csv.reader(io.StringIO(_read_text(source)))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "missing header") from None
    header = [h.strip() for h in header]
    if not header or header[0] != "frame" or len(header) < 2:
        raise MalformedRow(1, "header must start with 'frame' and name at least one cue")
    cues = tuple(header[1:])
    if len(set(cues)) != len(cues) or any(not c for c in cues):
        raise MalformedRow(1, "cue names must be unique and non-empty")

    if kind == "au_intensity":
        if len(cues) != AU_COUNT:
            raise WrongAUCount(len(cues))
        bad = [c for c in cues if not _AU_RE.match(c)]
        if bad:
            raise MalformedRow(1, f"action unit columns must look like AU01, got {bad[0]!r}")
        if au_set is not None and set(cues) != set(au_set):
            raise MalformedRow(1, "action unit columns differ from the configured AU set")
    elif kind == "avd" and set(cues) != set(AVD_COLUMNS):
        raise MalformedRow(1, f"avd tables need exactly the columns {', '.join(AVD_COLUMNS)}")

    frames: list[int] = []
    rows: list[tuple[float, ...]] = []
    seen: set[int] = set()
    for line_no, rec in enumerate(reader, start=2):
        if not rec or (len(rec) == 1 and not rec[0].strip()):
            continue
        if len(rec) != len(header):
            raise MalformedRow(line_no, f"expected {len(header)} fields, got {len(rec)}")
        try:
            frame = int(rec[0])
        except ValueError:
            raise MalformedRow(line_no, f"frame index {rec[0]!r} is not an integer") from None
        if frame in seen:
            raise DuplicateFrame(frame)
        if frames and frame < frames[-1]:
            raise MalformedRow(line_no, "frame indices must be increasing")
        if frame < 0:
            raise MalformedRow(line_no, "negative frame index")
        values = []
        for name, cell in zip(cues, rec[1:]):
            try:
                v = float(cell)
            except ValueError:
                raise MalformedRow(line_no, f"{name}={cell!r} is not a number") from None
            if not math.isfinite(v):
                raise NonFiniteScore(line_no, name)
            if kind in BOUNDED_KINDS and not 0.0 <= v <= 1.0:
                raise ScoreOutOfRange(line_no, name, v)
            values.append(v)
        seen.add(frame)
        frames.append(frame)
        rows.append(tuple(values))
    return CueTable(kind, cues, tuple(frames), tuple(rows), video_id, float(frame_rate))


def format_cue_table(table: CueTable) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["frame", *table.cue_names])
    for f, r in zip(table.frames, table.rows):
        w.writerow([f, *(_fmt(v) for v in r)])
    return out.getvalue()


@dataclass(frozen=True)
class TimelineEntry:
    video_id: str
    start_s: float
    end_s: float
    label: str
    row: int = field(default=0, compare=False)

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class SegmentTimeline:
    entries: tuple[TimelineEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def videos(self) -> list[str]:
        return sorted({e.video_id for e in self.entries})

    def for_video(self, video_id: str) -> list[TimelineEntry]:
        return sorted((e for e in self.entries if e.video_id == video_id), key=lambda e: e.start_s)


TIMELINE_HEADER = ["video_id", "start_s", "end_s", "label"]


def parse_timeline(source: Source, class_set: ClassSet = COMPOUND) -> SegmentTimeline:
    """Read a ``video_id,start_s,end_s,label`` annotation export.

    Labels are matched case-insensitively (aliases allowed) and stored in
    canonical form. Gaps between segments are legal; overlaps are not.
    """
    reader = csv.reader(io.StringIO(_read_text(source)))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MalformedRow(1, "missing header") from None
    if header != TIMELINE_HEADER:
        raise MalformedRow(1, f"header must be {','.join(TIMELINE_HEADER)}")
    entries = []
    for line_no, rec in enumerate(reader, start=2):
        if not rec or (len(rec) == 1 and not rec[0].strip()):
            continue
        if len(rec) != 4:
            raise MalformedRow(line_no, f"expected 4 fields, got {len(rec)}")
        video, start, end, label = (c.strip() for c in rec)
        if not video:
            raise MalformedRow(line_no, "empty video_id")
        try:
            s, e = float(start), float(end)
        except ValueError:
            raise MalformedRow(line_no, "start_s/end_s must be numbers") from None
        if not (math.isfinite(s) and math.isfinite(e)):
            raise NonFiniteScore(line_no, "start_s" if not math.isfinite(s) else "end_s")
        if s < 0:
            raise MalformedRow(line_no, "negative start time")
        if e <= s:
            raise NegativeDuration(line_no)
        try:
            canonical = class_set.resolve(label)
        except UnknownLabel:
            raise UnknownLabel(f"unknown label {label!r} at line {line_no}", row=line_no, label=label) from None
        entries.append(TimelineEntry(video, s, e, canonical, line_no))

    by_video: dict[str, list[TimelineEntry]] = {}
    for entry in entries:
        by_video.setdefault(entry.video_id, []).append(entry)
    for video, items in by_video.items():
        items = sorted(items, key=lambda x: (x.start_s, x.end_s))
        for a, b in zip(items, items[1:]):
            if b.start_s < a.end_s:
                raise OverlapError(video, a.row, b.row)
    return SegmentTimeline(tuple(entries))


def format_timeline(tl: SegmentTimeline) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TIMELINE_HEADER)
    for e in tl.entries:
        w.writerow([e.video_id, _fmt(e.start_s), _fmt(e.end_s), e.label])
    return out.getvalue()


PREDICTION_KINDS = ("logits", "probabilities", "label")


@dataclass(frozen=True)
class PredictionLog:
    """Frame-level output of one model on one video.

    ``frames`` holds either :class:`ScoreVector` objects (``kind`` logits or
    probabilities) or canonical label strings (``kind == "label"``). Frame
    ``i`` of the video is ``frames[i]``.
    """

    model_id: str
    video_id: str
    class_set: ClassSet
    kind: str
    frames: tuple[Any, ...]
    frame_rate: float = 25.0
    header_class_set: str = field(default="", compare=False)

    def __len__(self) -> int:
        return len(self.frames)

    def labels(self) -> list[str]:
        if self.kind == "label":
            return list(self.frames)
        return [v.top_label() for v in self.frames]


def _vector_class_set(name: str, n: int, line: int) -> ClassSet:
    if name == "basic" and n == len(BASIC):
        return BASIC
    if name == "compound":
        if n == len(COMPOUND):
            return COMPOUND
        if n == len(CHALLENGE):
            return CHALLENGE
    raise SchemaError(line, f"{n} values do not fit class set {name!r}")


def parse_predictions(source: Source) -> PredictionLog:
    """Read a JSON-lines prediction log: one header object, then one object per frame."""
    lines = _read_text(source).splitlines()
    records = []
    for line_no, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as err:
            raise SchemaError(line_no, f"invalid JSON ({err.msg})") from None
        if not isinstance(obj, dict):
            raise SchemaError(line_no, "each line must be a JSON object")
        records.append((line_no, obj))
    if not records:
        raise SchemaError(1, "empty prediction log")

    head_line, head = records[0]
    for key in ("model_id", "video_id", "frame_rate", "class_set"):
        if key not in head:
            raise SchemaError(head_line, f"header is missing {key!r}")
    if head["class_set"] not in ("basic", "compound"):
        raise SchemaError(head_line, "class_set must be 'basic' or 'compound'")
    rate = head["frame_rate"]
    if isinstance(rate, bool) or not isinstance(rate, (int, float)) or not rate > 0:
        raise SchemaError(head_line, "frame_rate must be a positive number")
    label_set = BASIC if head["class_set"] == "basic" else COMPOUND

    kind = None
    vector_set: ClassSet | None = None
    frames: list[Any] = []
    for line_no, obj in records[1:]:
        frame = obj.get("frame")
        if isinstance(frame, bool) or not isinstance(frame, int):
            raise SchemaError(line_no, "'frame' must be an integer")
        if frame != len(frames):
            raise GapInFrames(len(frames), frame)
        k = obj.get("kind")
        if k not in PREDICTION_KINDS:
            raise SchemaError(line_no, f"'kind' must be one of {PREDICTION_KINDS}")
        if kind is None:
            kind = k
        elif k != kind:
            raise SchemaError(line_no, f"mixed kinds in one log ({kind} then {k})")
        if k == "label":
            if set(obj) != {"frame", "kind", "label"} or not isinstance(obj["label"], str):
                raise SchemaError(line_no, "label frames need exactly frame, kind and a string label")
            try:
                frames.append(label_set.resolve(obj["label"]))
            except UnknownLabel:
                raise SchemaError(line_no, f"unknown label {obj['label']!r}") from None
            continue
        values = obj.get("values")
        if set(obj) != {"frame", "kind", "values"} or not isinstance(values, list):
            raise SchemaError(line_no, "score frames need exactly frame, kind and a values list")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            raise SchemaError(line_no, "values must be numbers")
        cs = _vector_class_set(head["class_set"], len(values), line_no)
        if vector_set is None:
            vector_set = cs
        elif cs is not vector_set:
            raise SchemaError(line_no, "vector length changed within the log")
        if not all(math.isfinite(v) for v in values):
            raise SchemaError(line_no, "non-finite value")
        if k == "probabilities":
            total = math.fsum(values)
            if min(values) < 0 or abs(total - 1.0) > PROBABILITY_TOLERANCE:
                raise BadProbabilitySum(frame, total)
        frames.append(ScoreVector(cs, tuple(values), k))

    if kind is None:
        raise SchemaError(head_line, "log has a header but no frames")
    return PredictionLog(
        model_id=str(head["model_id"]),
        video_id=str(head["video_id"]),
        class_set=vector_set if vector_set is not None else label_set,
        kind=kind,
        frames=tuple(frames),
        frame_rate=float(rate),
        header_class_set=head["class_set"],
    )


def format_predictions(log: PredictionLog) -> str:
    cs_name = log.header_class_set or ("basic" if log.class_set is BASIC else "compound")
    head = {"model_id": log.model_id, "video_id": log.video_id,
            "frame_rate": log.frame_rate, "class_set": cs_name}
    lines = [json.dumps(head)]
    for i, f in enumerate(log.frames):
        if log.kind == "label":
            lines.append(json.dumps({"frame": i, "kind": "label", "label": f}))
        else:
            lines.append(json.dumps({"frame": i, "kind": log.kind, "values": list(f.values)}))
    return "\n".join(lines) + "\n"


def read_transcript(source: Source) -> str:
    """Plain UTF-8 transcript; whitespace runs (including newlines) collapse to one space."""
    return " ".join(_read_text(source).split())


def parse_video_labels(source: Source, class_set: ClassSet) -> dict[str, str]:
    """Video-level ground truth: ``video_id,label`` rows."""
    reader = csv.reader(io.StringIO(_read_text(source)))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MalformedRow(1, "missing header") from None
    if header != ["video_id", "label"]:
        raise MalformedRow(1, "header must be video_id,label")
    labels: dict[str, str] = {}
    for line_no, rec in enumerate(reader, start=2):
        if not rec or (len(rec) == 1 and not rec[0].strip()):
            continue
        if len(rec) != 2:
            raise MalformedRow(line_no, f"expected 2 fields, got {len(rec)}")
        video, label = rec[0].strip(), rec[1].strip()
        if video in labels:
            raise MalformedRow(line_no, f"duplicate video {video!r}")
        try:
            labels[video] = class_set.resolve(label)
        except UnknownLabel:
            raise UnknownLabel(f"unknown label {label!r} at line {line_no}", row=line_no, label=label) from None
    return labels


def parse_frame_labels(source: Source) -> list[str]:
    """Header-less ``{"frame": int, "label": str}`` lines, as written by ``ensemble``.

    Labels are kept as written; frames must run 0..n-1 in order.
    """
    labels: list[str] = []
    for line_no, text in enumerate(_read_text(source).splitlines(), start=1):
        if not text.strip():
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as err:
            raise SchemaError(line_no, f"invalid JSON ({err.msg})") from None
        if not isinstance(obj, dict) or set(obj) != {"frame", "label"}:
            raise SchemaError(line_no, "expected {\"frame\": int, \"label\": str}")
        frame, label = obj["frame"], obj["label"]
        if isinstance(frame, bool) or not isinstance(frame, int) or not isinstance(label, str):
            raise SchemaError(line_no, "frame must be an integer and label a string")
        if frame != len(labels):
            raise GapInFrames(len(labels), frame)
        labels.append(label)
    return labels
