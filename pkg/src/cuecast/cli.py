"""Command-line front end.

Subcommands: textualize, segment, split, aggregate, ensemble, evaluate, report.
Outputs go to ``--out DIR`` and are written atomically. Validation failures
exit 1 with one JSON error record on stderr; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .aggregate import STRATEGIES, EnsembleSpec, compound_from_basic, ensemble_frames, video_label
from .config import RunConfig, load_config, parse_weights
from .core import BASIC, CHALLENGE, COMPOUND, OTHER, ClassSet, normalize
from .errors import CuecastError, MisalignedLogs, UnknownLabel
from .ingest import (
    PredictionLog,
    SegmentTimeline,
    format_predictions,
    parse_cue_table,
    parse_frame_labels,
    parse_predictions,
    parse_timeline,
    parse_video_labels,
    read_transcript,
)
from .metrics import (
    confusion,
    confusion_matrix,
    distribution_report,
    f1_aggregate,
    fold_summary,
    format_distribution,
)
from .textualize import textualize_video
from .timeline import WindowSpec, cut_segments, kfold_split

THREADS_ENV = "CUECAST_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw) if raw else (os.cpu_count() or 1)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def _pmap(fn: Callable, items: Sequence) -> list:
    # map keeps input order, so output never depends on the worker count
    n = min(thread_count(), max(1, len(items)))
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def write_atomic(path: Path, data: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data.encode("utf-8") if isinstance(data, str) else data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonl(records) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _files(path: Path | None, suffix: str) -> dict[str, Path]:
    """Map video id (file stem) to file for a file or a directory of files."""
    if path is None:
        return {}
    if path.is_dir():
        return {p.stem: p for p in sorted(path.glob(f"*{suffix}"))}
    return {path.stem: path}


def _prediction_files(cfg: RunConfig) -> list[Path]:
    files: list[Path] = []
    for p in cfg.predictions:
        files.extend(sorted(p.rglob("*.jsonl")) if p.is_dir() else [p])
    if not files:
        raise ValueError("no prediction files given (--predictions)")
    return files


def _require(cfg: RunConfig, key: str) -> Path:
    p = cfg.path(key)
    if p is None:
        raise ValueError(f"--{key} is required")
    return p


# subcommands


def cmd_textualize(args, cfg: RunConfig) -> int:
    au_files = _files(_require(cfg, "au"), ".csv")
    if not au_files:
        raise ValueError("no AU tables found")
    tone = _files(cfg.path("tone"), ".csv")
    avd = _files(cfg.path("avd"), ".csv")
    emotions = _files(cfg.path("emotions"), ".csv")
    transcripts = _files(cfg.path("transcript"), ".txt")
    tcfg = replace(cfg.textualize, window=cfg.window)

    def one(video: str):
        def table(files, kind):
            return parse_cue_table(files[video], kind, video_id=video, frame_rate=cfg.fps) if video in files else None

        return textualize_video(
            au=table(au_files, "au_intensity"),
            cfg=tcfg,
            transcription=read_transcript(transcripts[video]) if video in transcripts else "",
            emotions=table(emotions, "emotion_prob"),
            tone=table(tone, "tone"),
            avd=table(avd, "avd"),
            video_id=video,
        )

    per_video = _pmap(one, sorted(au_files))
    records = [r.to_dict() for recs in per_video for r in recs]
    write_atomic(cfg.out / "prompts.jsonl", _jsonl(records))
    return 0


def _segments(cfg: RunConfig):
    tl = parse_timeline(_require(cfg, "timeline"))
    return tl, cut_segments(tl, cfg.fps)


def cmd_segment(args, cfg: RunConfig) -> int:
    _, segments = _segments(cfg)
    rows = [("segment_id", "video_id", "start_s", "end_s", "label", "first_frame", "last_frame")]
    rows += [(s.segment_id, s.video_id, repr(s.start_s), repr(s.end_s), s.label, s.first_frame, s.last_frame)
             for s in segments]
    write_atomic(cfg.out / "segments.csv", _csv(rows))
    return 0


def cmd_split(args, cfg: RunConfig) -> int:
    _, segments = _segments(cfg)
    folds = kfold_split(segments, k=args.k, seed=cfg.seed)
    rows = [("segment_id", "fold")] + sorted(folds.mapping.items())
    write_atomic(cfg.out / "folds.csv", _csv(rows))
    return 0


def _load_logs(cfg: RunConfig) -> list[PredictionLog]:
    return _pmap(parse_predictions, _prediction_files(cfg))


def _derive_compound_log(log: PredictionLog) -> PredictionLog:
    if log.class_set != BASIC or log.kind == "label":
        raise ValueError(f"--derive-compound needs basic-class score vectors ({log.model_id}/{log.video_id})")
    frames = log.frames if log.kind == "probabilities" else [normalize(f) for f in log.frames]
    labels = tuple(compound_from_basic(f).label for f in frames)
    return PredictionLog(log.model_id, log.video_id, COMPOUND, "label", labels, log.frame_rate, "compound")


def cmd_aggregate(args, cfg: RunConfig) -> int:
    logs = _load_logs(cfg)
    if args.derive_compound:
        derived = _pmap(_derive_compound_log, logs)
        for log in derived:
            write_atomic(cfg.out / "compound" / log.model_id / f"{log.video_id}.jsonl", format_predictions(log))
        logs = derived
    seen: dict[str, str] = {}
    for log in logs:
        if log.video_id in seen:
            raise ValueError(f"video {log.video_id!r} appears in more than one log; aggregate one model at a time")
        seen[log.video_id] = log.model_id
    labels = _pmap(lambda log: video_label(log, args.strategy), logs)
    records = sorted(({"video_id": log.video_id, "label": lab} for log, lab in zip(logs, labels)),
                     key=lambda r: r["video_id"])
    write_atomic(cfg.out / "video_labels.jsonl", _jsonl(records))
    return 0


def cmd_ensemble(args, cfg: RunConfig) -> int:
    logs = _load_logs(cfg)
    by_video: dict[str, list[PredictionLog]] = {}
    for log in logs:
        by_video.setdefault(log.video_id, []).append(log)
    videos = sorted(by_video)
    spec = cfg.ensemble
    results = _pmap(lambda v: ensemble_frames(sorted(by_video[v], key=lambda l: l.model_id), spec), videos)
    for video, labels in zip(videos, results):
        write_atomic(cfg.out / "ensemble" / f"{video}.jsonl",
                     _jsonl({"frame": i, "label": lab} for i, lab in enumerate(labels)))
    return 0


def _frame_predictions(path: Path) -> tuple[str, list[str], float | None, PredictionLog | None]:
    """(video id, frame labels, frame rate, full log) for a header log or a bare label file."""
    text = path.read_text(encoding="utf-8")
    first = next((line for line in text.splitlines() if line.strip()), "")
    try:
        is_log = "model_id" in json.loads(first)
    except (json.JSONDecodeError, TypeError):
        is_log = False
    if is_log:
        log = parse_predictions(text)
        return log.video_id, log.labels(), log.frame_rate, log
    return path.stem, parse_frame_labels(text), None, None


def _label_space(labels) -> ClassSet:
    labels = set(labels)
    if labels <= set(COMPOUND.labels):
        return COMPOUND
    if labels <= set(BASIC.labels):
        return BASIC
    bad = sorted(labels - set(COMPOUND.labels) - set(BASIC.labels)) or sorted(labels)
    raise UnknownLabel(f"unknown or mixed labels: {bad[:3]}", label=bad[0])


def _score(preds, gts, space: ClassSet, exclude_other: bool):
    if space is COMPOUND and exclude_other:
        keep = [(p, g) for p, g in zip(preds, gts) if g != OTHER]
        preds, gts = [p for p, _ in keep], [g for _, g in keep]
        return confusion(preds, gts, CHALLENGE, extra_labels={OTHER}), preds, gts, CHALLENGE
    return confusion(preds, gts, space), preds, gts, space


def cmd_evaluate(args, cfg: RunConfig) -> int:
    files = _prediction_files(cfg)
    loaded = _pmap(_frame_predictions, files)
    by_video: dict[str, tuple] = {}
    for item in loaded:
        if item[0] in by_video:
            raise ValueError(f"video {item[0]!r} has more than one prediction file")
        by_video[item[0]] = item
    report: dict = {"level": args.level, "exclude_other": bool(args.exclude_other)}
    fold_scores: list[tuple[int, float]] = []

    if args.level == "video":
        gt_space = _label_space(lab for item in loaded for lab in item[1])
        truth = parse_video_labels(_require(cfg, "labels"), gt_space)
        preds, gts = [], []
        for video in sorted(truth):
            if video not in by_video:
                raise MisalignedLogs(f"no predictions for video {video!r}", video=video)
            _, labels, _, log = by_video[video]
            if log is None:
                if args.strategy != "majority":
                    raise ValueError("bare label files only support --strategy majority")
                log = PredictionLog("", video, gt_space, "label", tuple(labels))
            preds.append(video_label(log, args.strategy))
            gts.append(truth[video])
        report["strategy"] = args.strategy
        space = gt_space
        counts, preds, gts, evaluated = _score(preds, gts, space, args.exclude_other)
    else:
        tl = parse_timeline(_require(cfg, "timeline"))
        space = COMPOUND
        fold_of = {}
        if cfg.path("folds") is not None:
            with open(cfg.path("folds"), encoding="utf-8", newline="") as fh:
                rows = list(csv.reader(fh))
            if not rows or rows[0] != ["segment_id", "fold"]:
                raise ValueError("folds file must have header segment_id,fold")
            fold_of = {sid: int(f) for sid, f in rows[1:]}
        preds, gts, sample_folds = [], [], []
        for video in tl.videos():
            if video not in by_video:
                raise MisalignedLogs(f"no predictions for annotated video {video!r}", video=video)
            _, labels, rate, _ = by_video[video]
            sub = SegmentTimeline(tuple(tl.for_video(video)))
            for seg in cut_segments(sub, rate or cfg.fps):
                if seg.last_frame >= len(labels):
                    raise MisalignedLogs(
                        f"segment {seg.segment_id} ends at frame {seg.last_frame} but {video} has {len(labels)} frames",
                        video=video, segment=seg.segment_id,
                    )
                for t in range(seg.first_frame, seg.last_frame + 1):
                    preds.append(labels[t])
                    gts.append(seg.label)
                    sample_folds.append(fold_of.get(seg.segment_id))
        if fold_of:
            for fold in sorted({f for f in sample_folds if f is not None}):
                idx = [i for i, f in enumerate(sample_folds) if f == fold]
                c, *_ = _score([preds[i] for i in idx], [gts[i] for i in idx], space, args.exclude_other)
                if sum(c.support):
                    fold_scores.append((fold, f1_aggregate(c).weighted_f1))
        counts, preds, gts, evaluated = _score(preds, gts, space, args.exclude_other)

    f1 = f1_aggregate(counts, "weighted")
    report["class_set"] = evaluated.name
    report["n_samples"] = len(gts)
    report["average_f1"] = f1.average_f1
    report["weighted_f1"] = f1.weighted_f1
    report["per_class"] = [
        {"class": c, "f1": f, "support": s, "tp": tp, "fp": fp, "fn": fn}
        for c, f, s, tp, fp, fn in zip(f1.classes, f1.per_class, f1.support, counts.tp, counts.fp, counts.fn)
    ]
    cols = list(evaluated.labels) + ([OTHER] if evaluated is CHALLENGE else [])
    report["confusion"] = {"rows": list(evaluated.labels), "cols": cols,
                           "matrix": confusion_matrix(preds, gts, evaluated.labels, cols)}
    if fold_scores:
        mean, std = fold_summary([s for _, s in fold_scores])
        report["folds"] = [{"fold": f, "weighted_f1": s} for f, s in fold_scores]
        report["fold_mean"] = mean
        report["fold_std"] = std

    write_atomic(cfg.out / "report.json", json.dumps(report, indent=2, ensure_ascii=False) + "\n")
    write_atomic(cfg.out / "report.txt", format_report_text(report))
    return 0


def format_report_text(report: dict) -> str:
    width = max(len(r["class"]) for r in report["per_class"]) + 2
    lines = [f"level: {report['level']}" + (f"  strategy: {report['strategy']}" if "strategy" in report else ""),
             f"samples: {report['n_samples']}  exclude_other: {str(report['exclude_other']).lower()}", ""]
    lines.append(f"{'class':<{width}}{'F1':>8}{'support':>9}{'TP':>7}{'FP':>7}{'FN':>7}")
    for r in report["per_class"]:
        lines.append(f"{r['class']:<{width}}{100 * r['f1']:>8.2f}{r['support']:>9}{r['tp']:>7}{r['fp']:>7}{r['fn']:>7}")
    lines.append("")
    lines.append(f"average F1:  {100 * report['average_f1']:.2f}")
    lines.append(f"weighted F1: {100 * report['weighted_f1']:.2f}")
    if "folds" in report:
        per = "  ".join(f"{100 * f['weighted_f1']:.2f}" for f in report["folds"])
        lines.append(f"folds:       {per}")
        lines.append(f"mean ± std:  {100 * report['fold_mean']:.2f} ± {100 * report['fold_std']:.2f}")
    return "\n".join(lines) + "\n"


def cmd_report(args, cfg: RunConfig) -> int:
    from . import plotting

    if cfg.path("timeline") is None and args.report is None:
        raise ValueError("report needs --timeline and/or --report")
    if cfg.path("timeline") is not None:
        tl = parse_timeline(cfg.path("timeline"))
        rows, total = distribution_report(tl.entries)
        write_atomic(cfg.out / "distribution.csv", format_distribution(rows, total))
        plotting.plot_distribution(rows, cfg.out / "distribution.png")
    if args.report is not None:
        rep = json.loads(Path(args.report).read_text(encoding="utf-8"))
        classes = [r["class"] for r in rep["per_class"]]
        f1 = [r["f1"] for r in rep["per_class"]]
        lines = [("class", "f1", "support")] + [(r["class"], f"{r['f1']:.4f}", r["support"]) for r in rep["per_class"]]
        lines += [("average", f"{rep['average_f1']:.4f}", rep["n_samples"]),
                  ("weighted", f"{rep['weighted_f1']:.4f}", rep["n_samples"])]
        cfg.out.mkdir(parents=True, exist_ok=True)
        write_atomic(cfg.out / "per_class_f1.csv", _csv(lines))
        plotting.plot_per_class_f1(classes, f1, cfg.out / "per_class_f1.png",
                                   rep["average_f1"], rep["weighted_f1"])
        conf = rep["confusion"]
        plotting.plot_confusion(conf["rows"], conf["cols"], conf["matrix"], cfg.out / "confusion.png")
    return 0


COMMANDS = {
    "textualize": cmd_textualize,
    "segment": cmd_segment,
    "split": cmd_split,
    "aggregate": cmd_aggregate,
    "ensemble": cmd_ensemble,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--fps", type=float, help="video frame rate for second<->frame conversion")
    common.add_argument("--window", type=int, help="window length in frames (textualize: context, ensemble: vote)")
    common.add_argument("--hop", type=int, help="window hop in frames")
    common.add_argument("--weights", help="ensemble vote weights, model=k,...")
    common.add_argument("--strategy", choices=STRATEGIES, default="majority")
    common.add_argument("--exclude-other", action="store_true", help='drop ground-truth "Other" from scoring')
    for key in ("au", "tone", "avd", "emotions", "transcript", "timeline", "labels", "folds"):
        common.add_argument(f"--{key}", type=Path)
    common.add_argument("--predictions", type=Path, nargs="+", help="prediction logs or directories")

    parser = argparse.ArgumentParser(prog="cuecast", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("textualize", parents=[common], help="cue tables -> prompt records (JSONL)")
    sub.add_parser("segment", parents=[common], help="timeline -> frame-spanned segments (CSV)")
    p = sub.add_parser("split", parents=[common], help="stratified k-fold assignment (CSV)")
    p.add_argument("--k", type=int, default=5)
    p = sub.add_parser("aggregate", parents=[common], help="frame predictions -> video labels")
    p.add_argument("--derive-compound", action="store_true",
                   help="map basic-class frame scores to compound labels first")
    sub.add_parser("ensemble", parents=[common], help="frame-level weighted label voting across models")
    p = sub.add_parser("evaluate", parents=[common], help="F1 report for frame- or video-level predictions")
    p.add_argument("--level", choices=("frame", "video"), default="frame")
    p = sub.add_parser("report", parents=[common], help="distribution table and figures")
    p.add_argument("--report", type=Path, help="report.json written by evaluate")
    return parser


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    paths = dict(cfg.paths)
    for key in ("au", "tone", "avd", "emotions", "transcript", "timeline", "labels", "folds"):
        if getattr(args, key) is not None:
            paths[key] = getattr(args, key)
    window = cfg.window
    if args.command != "ensemble" and (args.window is not None or args.hop is not None):
        size = args.window if args.window is not None else window.size
        hop = args.hop if args.hop is not None else min(window.hop, size)
        window = WindowSpec(size, hop, window.policy)
    ensemble = cfg.ensemble
    if args.command == "ensemble" and args.window is not None:
        ensemble = EnsembleSpec(args.window, ensemble.weights)
    if args.weights is not None:
        ensemble = EnsembleSpec(ensemble.window, parse_weights(args.weights))
    cfg = replace(
        cfg,
        paths=paths,
        predictions=tuple(args.predictions) if args.predictions else cfg.predictions,
        window=window,
        textualize=replace(cfg.textualize, window=window),
        ensemble=ensemble,
        seed=args.seed if args.seed is not None else cfg.seed,
        fps=args.fps if args.fps is not None else cfg.fps,
        out=args.out if args.out is not None else cfg.out,
    )
    cfg.check_paths()
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](args, cfg)
    except CuecastError as err:
        record = err.to_record()
    except (ValueError, OSError, KeyError) as err:
        record = {"error": "InputError", "type": type(err).__name__, "message": str(err)}
    print(json.dumps(record, sort_keys=True, default=str), file=sys.stderr)
    return 1
