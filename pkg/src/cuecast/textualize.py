"""Turn numeric cue tables into short text descriptions and assemble LLM prompts."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

from .errors import EmptyTones, EmptyWindow, OutOfRange, TooFewClasses
from .ingest import AU_NAMES, AVD_COLUMNS, CueTable
from .timeline import WindowSpec, build_windows

PLACEHOLDER = "none"
AU_TEXT_STYLES = ("code_name", "code", "name")

# Caption strings as printed in the template, including the missing space
# before the colon on the emotions line.
CAPTIONS = (
    "Speech transcription of the video : ",
    "Facial Action Units activated during the video : ",
    "Emotions predicted from visual modality: ",
    "Characteristics of the prosody : ",
    "Audio emotional state : ",
)
LINE_END = "; "


@dataclass(frozen=True)
class TextualizeConfig:
    au_threshold: float = 0.5
    tone_top_k: int = 10
    tone_threshold: float = 0.5
    emotion_top_k: int = 3
    avd_threshold: float = 0.5
    au_text_style: str = "code_name"
    window: WindowSpec = field(default_factory=lambda: WindowSpec(15, 10))

    def __post_init__(self) -> None:
        for name in ("au_threshold", "avd_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not math.isfinite(self.tone_threshold):
            raise ValueError("tone_threshold must be finite")
        if self.tone_top_k < 1 or self.emotion_top_k < 1:
            raise ValueError("top-k counts must be at least 1")
        if self.au_text_style not in AU_TEXT_STYLES:
            raise ValueError(f"au_text_style must be one of {AU_TEXT_STYLES}")


def _prefix(score: float, threshold: float) -> str:
    return "High" if score >= threshold else "Low"


def _ranked(scores: Mapping[str, float]) -> list[str]:
    return sorted(scores, key=lambda name: (-scores[name], name))


def summarize_au(
    window_rows: Sequence[Sequence[float]],
    cfg: TextualizeConfig,
    au_names: Sequence[str],
) -> list[str]:
    """AUs whose maximum intensity over the window reaches ``cfg.au_threshold``.

    ``window_rows`` holds one row of intensities per frame, columns in the
    order of ``au_names``; the result keeps that order.
    """
    if len(window_rows) == 0:
        raise EmptyWindow("no frames in the window")
    peaks = [max(col) for col in zip(*window_rows)]
    if len(peaks) != len(au_names):
        raise ValueError(f"{len(peaks)} intensity columns for {len(au_names)} AU names")
    return [name for name, peak in zip(au_names, peaks) if peak >= cfg.au_threshold]


def au_text(codes: Sequence[str], style: str = "code_name") -> list[str]:
    if style == "code":
        return list(codes)
    if style == "name":
        return [AU_NAMES.get(c, c) for c in codes]
    return [f"{c} ({AU_NAMES[c]})" if c in AU_NAMES else c for c in codes]


def top_emotions(probs: Mapping[str, float], k: int = 3) -> list[str]:
    """The ``k`` highest-scoring emotion names; equal scores sort by name."""
    if len(probs) < k:
        raise TooFewClasses(f"need at least {k} emotion scores, got {len(probs)}", found=len(probs), k=k)
    if not all(math.isfinite(v) for v in probs.values()):
        raise OutOfRange("emotion scores must be finite")
    return _ranked(probs)[:k]


def tone_description(tone_scores: Mapping[str, float], cfg: TextualizeConfig) -> list[str]:
    if not tone_scores:
        raise EmptyTones("no tone scores")
    top = _ranked(tone_scores)[: cfg.tone_top_k]
    return [f"{_prefix(tone_scores[name], cfg.tone_threshold)} {name}" for name in top]


def avd_description(arousal: float, valence: float, dominance: float, cfg: TextualizeConfig) -> str:
    parts = []
    for name, v in zip(AVD_COLUMNS, (arousal, valence, dominance)):
        if not (math.isfinite(v) and 0.0 <= v <= 1.0):
            raise OutOfRange(f"{name} score {v} outside [0, 1]", dimension=name, value=v)
        parts.append(f"{_prefix(v, cfg.avd_threshold)} {name}")
    return ", ".join(parts)


@dataclass(frozen=True)
class PromptRecord:
    video_id: str
    frame_index: int
    transcription: str
    au_text: str
    emotions_text: str
    tone_text: str
    avd_text: str
    rendered: str

    def to_dict(self) -> dict:
        return asdict(self)


def _slot(items: Sequence[str] | str) -> str:
    text = items if isinstance(items, str) else ", ".join(items)
    return text if text.strip() else PLACEHOLDER


def render_prompt(transcription: str, au: str, emotions: str, tone: str, avd: str) -> str:
    values = (transcription, au, emotions, tone, avd)
    lines = [caption + value for caption, value in zip(CAPTIONS, values)]
    return (LINE_END + "\n").join(lines)


def assemble_prompt(
    transcription: str,
    au_names: Sequence[str],
    emotion_names: Sequence[str],
    tone_items: Sequence[str],
    avd_text: str,
    *,
    video_id: str = "",
    frame_index: int = 0,
) -> PromptRecord:
    """Fill the five-line prompt template. Empty slots read ``none``."""
    fields = (
        _slot(transcription),
        _slot(au_names),
        _slot(emotion_names),
        _slot(tone_items),
        _slot(avd_text),
    )
    return PromptRecord(video_id, frame_index, *fields, render_prompt(*fields))


def _window_rows(table: CueTable | None, first: int, last: int):
    if table is None:
        return []
    rows = table.rows_between(first, last)
    if not rows:
        # sparse tables (e.g. tone every few frames) fall back to the last known row
        prev = table.latest_before(last)
        rows = [prev] if prev is not None else []
    return rows


def _column_max(table: CueTable, rows) -> dict[str, float]:
    return {name: max(col) for name, col in zip(table.cue_names, zip(*rows))}


def textualize_video(
    *,
    au: CueTable,
    cfg: TextualizeConfig,
    transcription: str = "",
    emotions: CueTable | None = None,
    tone: CueTable | None = None,
    avd: CueTable | None = None,
    video_id: str | None = None,
) -> list[PromptRecord]:
    """One prompt per window of the AU table.

    Windows tile the frame range ``0 .. last AU frame`` per ``cfg.window``;
    each record is stamped with the window's first frame. AU, emotion and tone
    scores are reduced by their maximum over the window, AVD by its mean.
    """
    vid = video_id if video_id is not None else au.video_id
    if not au.frames:
        return []
    n_frames = au.frames[-1] + 1
    records = []
    for first, last in build_windows(n_frames, cfg.window):
        rows = au.rows_between(first, last)
        codes = summarize_au(rows, cfg, au.cue_names) if rows else []

        emo_names: list[str] = []
        emo_rows = _window_rows(emotions, first, last)
        if emo_rows:
            peaks = _column_max(emotions, emo_rows)
            emo_names = top_emotions(peaks, min(cfg.emotion_top_k, len(peaks)))

        tone_items: list[str] = []
        tone_rows = _window_rows(tone, first, last)
        if tone_rows:
            tone_items = tone_description(_column_max(tone, tone_rows), cfg)

        avd_str = ""
        avd_rows = _window_rows(avd, first, last)
        if avd_rows:
            means = {name: math.fsum(col) / len(col) for name, col in zip(avd.cue_names, zip(*avd_rows))}
            avd_str = avd_description(means["arousal"], means["valence"], means["dominance"], cfg)

        records.append(
            assemble_prompt(
                transcription,
                au_text(codes, cfg.au_text_style),
                emo_names,
                tone_items,
                avd_str,
                video_id=vid,
                frame_index=first,
            )
        )
    return records
