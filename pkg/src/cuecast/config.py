"""Run configuration stored as an INI file.

Example::

    [run]
    seed = 7
    fps = 25.0
    out = out

    [paths]
    au = data/au
    timeline = data/timeline.csv
    predictions = preds/feature preds/text

    [textualize]
    au_threshold = 0.5
    tone_top_k = 10

    [window]
    size = 15
    hop = 10
    policy = truncate_at_edges

    [ensemble]
    window = 10
    weights = feature=2,text=1

Relative paths resolve against the directory holding the config file.
Command-line flags override file values.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .aggregate import EnsembleSpec
from .textualize import TextualizeConfig
from .timeline import WindowSpec

PATH_KEYS = ("au", "tone", "avd", "emotions", "transcript", "timeline", "labels", "folds")


def parse_weights(text: str) -> dict[str, int]:
    """``"feature=2,text=1"`` -> ``{"feature": 2, "text": 1}``."""
    weights: dict[str, int] = {}
    for item in filter(None, (p.strip() for p in text.split(","))):
        model, sep, value = item.partition("=")
        if not sep or not model.strip():
            raise ValueError(f"bad weight {item!r}; expected model=k")
        try:
            k = int(value)
        except ValueError:
            raise ValueError(f"weight for {model.strip()!r} must be an integer") from None
        if k < 1:
            raise ValueError(f"weight for {model.strip()!r} must be >= 1")
        weights[model.strip()] = k
    return weights


def format_weights(weights: dict[str, int]) -> str:
    return ",".join(f"{m}={k}" for m, k in sorted(weights.items()))


@dataclass(frozen=True)
class RunConfig:
    paths: dict[str, Path] = field(default_factory=dict)
    predictions: tuple[Path, ...] = ()
    textualize: TextualizeConfig = field(default_factory=TextualizeConfig)
    window: WindowSpec = field(default_factory=lambda: WindowSpec(15, 10))
    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    seed: int = 0
    fps: float = 25.0
    out: Path = Path("out")

    def path(self, key: str) -> Path | None:
        return self.paths.get(key)

    def check_paths(self) -> None:
        missing = [str(p) for p in (*self.paths.values(), *self.predictions) if not p.exists()]
        if missing:
            raise FileNotFoundError(f"missing input path(s): {', '.join(missing)}")

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp["run"] = {"seed": str(self.seed), "fps": repr(self.fps)}
        # the default output dir is relative to the working directory, not the file
        if self.out != Path("out"):
            cp["run"]["out"] = str(self.out)
        p = {k: str(v) for k, v in sorted(self.paths.items())}
        if self.predictions:
            p["predictions"] = " ".join(str(x) for x in self.predictions)
        cp["paths"] = p
        t = self.textualize
        cp["textualize"] = {
            f.name: repr(getattr(t, f.name)) if isinstance(getattr(t, f.name), float) else str(getattr(t, f.name))
            for f in fields(t) if f.name != "window"
        }
        cp["window"] = {"size": str(self.window.size), "hop": str(self.window.hop), "policy": self.window.policy}
        cp["ensemble"] = {"window": str(self.ensemble.window), "weights": format_weights(dict(self.ensemble.weights))}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _resolve(base: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def load_config(path: str | Path | None = None, text: str | None = None, base: Path | None = None) -> RunConfig:
    """Read a config file (or text). Missing sections keep their defaults."""
    cp = configparser.ConfigParser(interpolation=None)
    if path is not None:
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
        base = base or path.parent
    elif text is not None:
        cp.read_string(text)
    base = base or Path(".")

    run = cp["run"] if cp.has_section("run") else {}
    paths: dict[str, Path] = {}
    predictions: tuple[Path, ...] = ()
    if cp.has_section("paths"):
        for key, value in cp["paths"].items():
            if key == "predictions":
                predictions = tuple(_resolve(base, v) for v in value.split())
            elif key in PATH_KEYS:
                paths[key] = _resolve(base, value)
            else:
                raise ValueError(f"unknown [paths] key {key!r}")

    window = WindowSpec(15, 10)
    if cp.has_section("window"):
        w = cp["window"]
        window = WindowSpec(w.getint("size", 15), w.getint("hop", 10), w.get("policy", "truncate_at_edges"))

    tcfg = TextualizeConfig(window=window)
    if cp.has_section("textualize"):
        s = cp["textualize"]
        kwargs = {}
        for f in fields(TextualizeConfig):
            if f.name == "window" or f.name not in s:
                continue
            default = getattr(tcfg, f.name)
            if isinstance(default, bool):
                kwargs[f.name] = s.getboolean(f.name)
            elif isinstance(default, int):
                kwargs[f.name] = s.getint(f.name)
            elif isinstance(default, float):
                kwargs[f.name] = s.getfloat(f.name)
            else:
                kwargs[f.name] = s.get(f.name)
        unknown = set(s) - {f.name for f in fields(TextualizeConfig)}
        if unknown:
            raise ValueError(f"unknown [textualize] key(s): {', '.join(sorted(unknown))}")
        tcfg = replace(tcfg, **kwargs)

    ensemble = EnsembleSpec()
    if cp.has_section("ensemble"):
        e = cp["ensemble"]
        ensemble = EnsembleSpec(e.getint("window", 10), parse_weights(e.get("weights", "")))

    return RunConfig(
        paths=paths,
        predictions=predictions,
        textualize=tcfg,
        window=window,
        ensemble=ensemble,
        seed=int(run.get("seed", 0)),
        fps=float(run.get("fps", 25.0)),
        out=_resolve(base, run.get("out", "out")) if "out" in run else Path("out"),
    )
