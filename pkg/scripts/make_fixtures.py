"""Regenerate the bundled data files under src/cuecast/data/.

    python scripts/make_fixtures.py

Output is deterministic; the committed files are what this script writes.
"""

from __future__ import annotations

import json
from decimal import Decimal
from pathlib import Path

import numpy as np

from cuecast.core import BASIC, CHALLENGE, COMPOUND
from cuecast.ingest import AVD_COLUMNS, DEFAULT_AUS

DATA = Path(__file__).resolve().parents[1] / "src" / "cuecast" / "data"

# Published per-class segment counts and durations (seconds). Durations are
# two-decimal roundings of the real sums; the per-class sums here sit a few
# thousandths above each printed value so that both every row and the
# printed grand total (847.15) are reproduced after rounding.
PUBLISHED = [
    ("Angrily Surprised", 8, "53.92", "0.004"),
    ("Sadly Angry", 16, "100.60", "0.004"),
    ("Fearfully Surprised", 24, "98.85", "0.004"),
    ("Happily Surprised", 15, "150.57", "0.004"),
    ("Sadly Fearful", 19, "107.56", "0.004"),
    ("Disgustedly Surprised", 10, "82.45", "0.004"),
    ("Sadly Surprised", 13, "182.17", "0.003"),
    ("Other", 20, "71.00", "0.003"),
]
N_VIDEOS = 56


def distribution_timeline() -> str:
    per_class = []
    for label, n, printed, offset in PUBLISHED:
        total = Decimal(printed) + Decimal(offset)
        weights = [Decimal(4 + (i * 7) % 5) for i in range(n)]
        scale = total / sum(weights)
        durs = [(w * scale).quantize(Decimal("0.01")) for w in weights[:-1]]
        durs.append(total - sum(durs))
        per_class.append([(label, d) for d in durs])

    # interleave classes so every video mixes labels
    order = []
    while any(per_class):
        for group in per_class:
            if group:
                order.append(group.pop(0))
    cursor = {f"video{v:02d}": Decimal("0.5") for v in range(1, N_VIDEOS + 1)}
    lines = ["video_id,start_s,end_s,label"]
    for i, (label, d) in enumerate(order):
        video = f"video{i % N_VIDEOS + 1:02d}"
        start = cursor[video]
        end = start + d
        lines.append(f"{video},{start},{end},{label}")
        cursor[video] = end + Decimal("1.0")
    return "\n".join(lines) + "\n"


FPS = 25
TOY_VIDEOS = {"v01": 80, "v02": 60}
TOY_TIMELINE = [
    ("v01", "0.0", "1.2", "Fearfully Surprised"),
    ("v01", "1.2", "2.0", "Other"),
    ("v01", "2.4", "3.2", "Sadly Angry"),
    ("v02", "0.0", "1.0", "Happily Surprised"),
    ("v02", "1.0", "2.4", "Sadly Surprised"),
]
TRANSCRIPTS = {
    "v01": "Oh my god, what was that?\nNo. No, please.\n",
    "v02": "OK! That's amazing... wait, what?\n",
}
PYFEAT_EMOTIONS = ("anger", "disgust", "fear", "happiness", "sadness", "surprise", "neutral")
TONES = ("amusement", "anger", "anxiety", "awe", "confusion", "contempt", "disappointment",
         "distress", "excitement", "fear", "sadness", "surprise (negative)")


def _frame_truth(video: str, n: int) -> list[str | None]:
    truth: list[str | None] = [None] * n
    for v, s, e, label in TOY_TIMELINE:
        if v != video:
            continue
        first = int(Decimal(s) * FPS)
        last = int((Decimal(e) * FPS).to_integral_value(rounding="ROUND_CEILING")) - 1
        for t in range(first, min(last, n - 1) + 1):
            truth[t] = label
    return truth


def _csv(header, rows) -> str:
    return ",".join(header) + "\n" + "".join(",".join(str(x) for x in r) + "\n" for r in rows)


def _log(model, video, class_set, frames) -> str:
    head = {"model_id": model, "video_id": video, "frame_rate": FPS, "class_set": class_set}
    return "\n".join([json.dumps(head)] + [json.dumps(f) for f in frames]) + "\n"


def toy(rng: np.random.Generator) -> dict[str, str]:
    files: dict[str, str] = {}
    files["timeline.csv"] = _csv(("video_id", "start_s", "end_s", "label"), TOY_TIMELINE)
    for video, n in TOY_VIDEOS.items():
        au = np.round(rng.beta(0.6, 6.0, size=(n, len(DEFAULT_AUS))), 3)
        au[: n // 2, DEFAULT_AUS.index("AU06")] = np.round(rng.uniform(0.55, 0.95, n // 2), 3)
        au[:, DEFAULT_AUS.index("AU12")] = np.round(rng.uniform(0.2, 0.7, n), 3)
        files[f"au/{video}.csv"] = _csv(("frame", *DEFAULT_AUS), [(t, *au[t]) for t in range(n)])

        emo = np.round(rng.dirichlet(np.ones(len(PYFEAT_EMOTIONS)) * 0.7, size=n), 4)
        files[f"emotions/{video}.csv"] = _csv(("frame", *PYFEAT_EMOTIONS), [(t, *emo[t]) for t in range(n)])

        tone_frames = range(0, n, 5)
        tone = np.round(rng.beta(1.0, 3.0, size=(len(tone_frames), len(TONES))), 3)
        files[f"tone/{video}.csv"] = _csv(("frame", *TONES), [(t, *r) for t, r in zip(tone_frames, tone)])
        avd = np.round(rng.uniform(0, 1, size=(len(tone_frames), 3)), 3)
        files[f"avd/{video}.csv"] = _csv(("frame", *AVD_COLUMNS), [(t, *r) for t, r in zip(tone_frames, avd)])
        files[f"transcripts/{video}.txt"] = TRANSCRIPTS[video]

        truth = _frame_truth(video, n)
        feat, text, mllm = [], [], []
        for t in range(n):
            gt = truth[t] or "Other"
            logits = rng.normal(0, 1, len(COMPOUND))
            if rng.random() < 0.7:
                logits[COMPOUND.index(gt)] += 3.0
            feat.append({"frame": t, "kind": "logits", "values": [round(float(x), 4) for x in logits]})

            alpha = np.full(len(CHALLENGE), 0.5)
            if gt in CHALLENGE and rng.random() < 0.6:
                alpha[CHALLENGE.index(gt)] += 4.0
            p = rng.dirichlet(alpha)
            p = np.round(p, 6)
            p[-1] = round(1.0 - float(p[:-1].sum()), 6)
            if p[-1] < 0:
                p = np.full(len(CHALLENGE), round(1 / len(CHALLENGE), 6))
                p[-1] = round(1.0 - float(p[:-1].sum()), 6)
            text.append({"frame": t, "kind": "probabilities", "values": [float(x) for x in p]})

            label = "Fearfully Surprised" if rng.random() < 0.8 else gt
            mllm.append({"frame": t, "kind": "label", "label": label})
        files[f"predictions/feature/{video}.jsonl"] = _log("feature", video, "compound", feat)
        files[f"predictions/text/{video}.jsonl"] = _log("text", video, "compound", text)
        files[f"predictions/mllm/{video}.jsonl"] = _log("mllm", video, "compound", mllm)

    # video-level basic-emotion set: 8 clips, one logit log each
    labels = []
    for i in range(8):
        video = f"clip{i + 1:02d}"
        gt = BASIC.labels[int(rng.integers(len(BASIC)))]
        labels.append((video, gt))
        frames = []
        for t in range(12):
            logits = rng.normal(0, 1.5, len(BASIC))
            logits[BASIC.index(gt)] += rng.uniform(-0.5, 2.5)
            frames.append({"frame": t, "kind": "logits", "values": [round(float(x), 4) for x in logits]})
        files[f"basic/predictions/{video}.jsonl"] = _log("text", video, "basic", frames)
    files["basic/labels.csv"] = _csv(("video_id", "label"), labels)

    files["config.ini"] = (
        "[run]\nseed = 7\nfps = 25.0\n\n"
        "[paths]\nau = au\ntone = tone\navd = avd\nemotions = emotions\n"
        "transcript = transcripts\ntimeline = timeline.csv\n"
        "predictions = predictions/feature predictions/text predictions/mllm\n\n"
        "[textualize]\nau_threshold = 0.5\ntone_top_k = 10\ntone_threshold = 0.5\n"
        "emotion_top_k = 3\navd_threshold = 0.5\nau_text_style = code_name\n\n"
        "[window]\nsize = 15\nhop = 10\npolicy = truncate_at_edges\n\n"
        "[ensemble]\nwindow = 10\nweights = feature=2,text=1,mllm=1\n"
    )
    return files


def main() -> None:
    (DATA / "distribution_timeline.csv").write_text(distribution_timeline(), encoding="utf-8")
    rng = np.random.default_rng(20240917)
    for rel, text in toy(rng).items():
        path = DATA / "toy" / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


if __name__ == "__main__":
    main()
