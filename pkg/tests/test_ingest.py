import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuecast.core import CHALLENGE, COMPOUND
from cuecast.errors import (
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
from cuecast.ingest import (
    DEFAULT_AUS,
    format_cue_table,
    format_predictions,
    format_timeline,
    parse_cue_table,
    parse_frame_labels,
    parse_predictions,
    parse_timeline,
    parse_video_labels,
    read_transcript,
)

AU_HEADER = "frame," + ",".join(DEFAULT_AUS) + "\n"


def au_row(frame, value=0.1):
    return f"{frame}," + ",".join([str(value)] * 20) + "\n"


def test_au_table_three_rows():
    t = parse_cue_table(AU_HEADER + au_row(0) + au_row(1) + au_row(2), "au_intensity")
    assert len(t) == 3
    assert t.cue_names == DEFAULT_AUS
    assert t.frames == (0, 1, 2)


def test_accepts_bytes_and_streams():
    text = AU_HEADER + au_row(0)
    assert parse_cue_table(text.encode(), "au_intensity") == parse_cue_table(io.BytesIO(text.encode()), "au_intensity")
    assert parse_cue_table(io.StringIO(text), "au_intensity").frames == (0,)


def test_nan_score():
    bad = AU_HEADER + au_row(0) + "1," + ",".join(["NaN"] + ["0.1"] * 19) + "\n"
    with pytest.raises(NonFiniteScore) as err:
        parse_cue_table(bad, "au_intensity")
    assert err.value.fields == {"line": 3, "col": "AU01"}


def test_duplicate_frame():
    with pytest.raises(DuplicateFrame) as err:
        parse_cue_table(AU_HEADER + au_row(4) + au_row(5) + au_row(5), "au_intensity")
    assert err.value.fields["idx"] == 5


def test_wrong_au_count():
    header = "frame," + ",".join(DEFAULT_AUS[:19]) + "\n"
    with pytest.raises(WrongAUCount) as err:
        parse_cue_table(header + "0," + ",".join(["0.1"] * 19) + "\n", "au_intensity")
    assert err.value.fields["found"] == 19


@pytest.mark.parametrize("text", [
    "",
    "time,AU01\n",
    AU_HEADER + "0,0.1\n",
    AU_HEADER + "x," + ",".join(["0.1"] * 20) + "\n",
    AU_HEADER + au_row(3) + au_row(2),
])
def test_malformed(text):
    with pytest.raises((MalformedRow, WrongAUCount)):
        parse_cue_table(text, "au_intensity")


def test_bounded_kinds_reject_out_of_range():
    with pytest.raises(ScoreOutOfRange):
        parse_cue_table(AU_HEADER + au_row(0, 1.5), "au_intensity")
    # tone scores are only required to be finite
    t = parse_cue_table("frame,confusion\n0,1.5\n", "tone")
    assert t.rows == ((1.5,),)


def test_avd_columns():
    with pytest.raises(MalformedRow):
        parse_cue_table("frame,arousal,valence\n0,0.1,0.2\n", "avd")
    t = parse_cue_table("frame,arousal,valence,dominance\n0,0.1,0.2,0.3\n", "avd")
    assert t.row(0) == {"arousal": 0.1, "valence": 0.2, "dominance": 0.3}


scores = st.floats(min_value=0, max_value=1, allow_nan=False)


@settings(max_examples=50)
@given(st.lists(st.lists(scores, min_size=20, max_size=20), min_size=1, max_size=8))
def test_cue_table_round_trip(rows):
    text = AU_HEADER + "".join(f"{i}," + ",".join(repr(v) for v in r) + "\n" for i, r in enumerate(rows))
    once = parse_cue_table(text, "au_intensity")
    canonical = format_cue_table(once)
    again = parse_cue_table(canonical, "au_intensity")
    assert again == once
    assert format_cue_table(again) == canonical


TL_HEADER = "video_id,start_s,end_s,label\n"


def test_timeline_single_row():
    tl = parse_timeline(TL_HEADER + "v1,0.0,2.5,Sadly Angry\n")
    assert len(tl) == 1
    assert tl.entries[0].duration == 2.5
    assert tl.entries[0].label == "Sadly Angry"


def test_timeline_case_insensitive():
    tl = parse_timeline(TL_HEADER + "v1,0,1,sadly angry\n")
    assert tl.entries[0].label == "Sadly Angry"


def test_timeline_overlap():
    with pytest.raises(OverlapError) as err:
        parse_timeline(TL_HEADER + "v1,0,2,Other\nv1,1,3,Other\n")
    assert err.value.fields == {"video": "v1", "row_a": 2, "row_b": 3}


def test_timeline_touching_and_gaps_are_fine():
    tl = parse_timeline(TL_HEADER + "v1,2,3,Other\nv1,0,2,Sadly Angry\nv1,5,6,Other\nv2,0,2,Other\n")
    assert len(tl) == 4


def test_timeline_errors():
    with pytest.raises(NegativeDuration) as err:
        parse_timeline(TL_HEADER + "v1,2,2,Other\n")
    assert err.value.fields["row"] == 2
    with pytest.raises(UnknownLabel) as err:
        parse_timeline(TL_HEADER + "v1,0,1,Joyfully Bored\n")
    assert err.value.fields["row"] == 2
    with pytest.raises(MalformedRow):
        parse_timeline("video,start,end,label\n")


def test_timeline_round_trip(toy_dir):
    tl = parse_timeline(toy_dir / "timeline.csv")
    text = format_timeline(tl)
    assert parse_timeline(text) == tl
    assert format_timeline(parse_timeline(text)) == text


def _log(frames, class_set="compound"):
    head = {"model_id": "m", "video_id": "v", "frame_rate": 25, "class_set": class_set}
    return "\n".join([json.dumps(head)] + [json.dumps(f) for f in frames]) + "\n"


def test_predictions_uniform_probs():
    frames = [{"frame": i, "kind": "probabilities", "values": [1 / 7] * 7} for i in range(3)]
    log = parse_predictions(_log(frames))
    assert len(log) == 3
    assert log.class_set == CHALLENGE
    assert log.labels() == ["Angrily Surprised"] * 3


def test_predictions_gap():
    frames = [{"frame": i, "kind": "label", "label": "Other"} for i in (0, 2)]
    with pytest.raises(GapInFrames) as err:
        parse_predictions(_log(frames))
    assert err.value.fields == {"expected": 1, "found": 2}


def test_predictions_bad_sum():
    frames = [{"frame": 0, "kind": "probabilities", "values": [0.8] + [0.0] * 6}]
    with pytest.raises(BadProbabilitySum) as err:
        parse_predictions(_log(frames))
    assert err.value.fields["frame"] == 0
    assert err.value.fields["sum"] == pytest.approx(0.8)


@pytest.mark.parametrize("frames", [
    [{"frame": 0, "kind": "logits"}],
    [{"frame": 0, "kind": "scores", "values": [0] * 8}],
    [{"frame": 0, "kind": "logits", "values": [0] * 5}],
    [{"frame": 0, "kind": "label", "label": "Bored"}],
    [{"frame": 0, "kind": "label", "label": "Other"}, {"frame": 1, "kind": "logits", "values": [0] * 8}],
    [{"frame": "0", "kind": "label", "label": "Other"}],
])
def test_predictions_schema_errors(frames):
    with pytest.raises(SchemaError):
        parse_predictions(_log(frames))


def test_predictions_header_required():
    with pytest.raises(SchemaError) as err:
        parse_predictions('{"frame": 0, "kind": "label", "label": "Other"}\n')
    assert err.value.fields["line"] == 1
    with pytest.raises(SchemaError):
        parse_predictions("not json\n")


def test_prediction_class_sets():
    log = parse_predictions(_log([{"frame": 0, "kind": "logits", "values": [0, 0, 0, 0, 9, 0, 0, 0]}]))
    assert log.class_set == COMPOUND and log.labels() == ["Other"]
    log = parse_predictions(_log([{"frame": 0, "kind": "logits", "values": [0, 0, 0, 9, 0, 0, 0]}], "basic"))
    assert log.labels() == ["joy"]
    log = parse_predictions(_log([{"frame": 0, "kind": "label", "label": "happy"}], "basic"))
    assert log.frames == ("joy",)


@pytest.mark.parametrize("name", ["feature", "text", "mllm"])
def test_prediction_round_trip(toy_dir, name):
    path = toy_dir / "predictions" / name / "v01.jsonl"
    log = parse_predictions(path)
    text = format_predictions(log)
    assert parse_predictions(text) == log
    assert format_predictions(parse_predictions(text)) == text


def test_frame_labels():
    assert parse_frame_labels('{"frame": 0, "label": "Other"}\n{"frame": 1, "label": "x"}\n') == ["Other", "x"]
    with pytest.raises(GapInFrames):
        parse_frame_labels('{"frame": 1, "label": "Other"}\n')


def test_video_labels():
    got = parse_video_labels("video_id,label\na,Happy\nb,neutral\n", __import__("cuecast").BASIC)
    assert got == {"a": "joy", "b": "neutral"}


def test_transcript_whitespace():
    assert read_transcript("  Hello\nthere  \n\n") == "Hello there"
