"""YAML manifests describing a mixed-media request and its pipeline flags.

Example::

    version: 1
    pipeline:
      conv3d: true
      evs_q: 0.5
      patch_budget: 1024
      stage: 256k
    items:
      - {kind: video, id: clip, duration: 90, fps: 30, width: 512, height: 512}
      - {kind: audio, id: track, duration: 90}
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from .errors import InvalidInputError
from .sequencer import DEFAULT_WINDOW_SECONDS, KINDS, STAGE_LIMITS
from .video import FRAME_PATCH_TARGETS, TokenOverheadModel

MANIFEST_VERSION = 1


class ManifestError(InvalidInputError):
    """One or more field-level problems; ``errors`` holds ``(line, field, message)``."""

    def __init__(self, source: str, errors: list[tuple[int | None, str, str]]):
        self.source = source
        self.errors = errors
        lines = [
            f"{source}:{line if line is not None else '?'}: {where}: {msg}"
            for line, where, msg in errors
        ]
        super().__init__("\n".join(lines))


@dataclass(frozen=True)
class PipelineFlags:
    conv3d: bool = False
    evs_q: float | None = None
    patch_budget: int | str = "default"
    stage: str = "256k"
    window: float = DEFAULT_WINDOW_SECONDS
    max_frames: int = 256
    overhead: TokenOverheadModel = field(default_factory=TokenOverheadModel)

    @property
    def frame_patches(self) -> int:
        return 1024 if self.patch_budget == "default" else int(self.patch_budget)


@dataclass(frozen=True)
class ManifestEntry:
    kind: str
    id: str
    start: float = 0.0
    duration: float = 0.0
    width: int | None = None
    height: int | None = None
    fps: float | None = None
    frames: int | None = None
    tokens: int | None = None


@dataclass(frozen=True)
class Manifest:
    pipeline: PipelineFlags
    entries: tuple[ManifestEntry, ...]


# --- YAML with line numbers -------------------------------------------------

def _construct(loader: yaml.SafeLoader, node: yaml.Node, path: tuple, lines: dict) -> Any:
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        return {
            k.value: _construct(loader, v, path + (k.value,), lines) for k, v in node.value
        }
    if isinstance(node, yaml.SequenceNode):
        return [_construct(loader, v, path + (i,), lines) for i, v in enumerate(node.value)]
    return loader.construct_object(node)


def _load(text: str, source: str) -> tuple[Any, dict]:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark else None
        raise ManifestError(source, [(line, "<syntax>", str(getattr(exc, "problem", exc)))]) from None
    lines: dict = {}
    if node is None:
        return {}, lines
    return _construct(yaml.SafeLoader(""), node, (), lines), lines


def _fmt_path(path: tuple) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else p)
    return out


class _Checker:
    def __init__(self, source: str, lines: dict):
        self.source = source
        self.lines = lines
        self.errors: list[tuple[int | None, str, str]] = []

    def fail(self, path: tuple, msg: str) -> None:
        line = None
        for n in range(len(path), -1, -1):
            if path[:n] in self.lines:
                line = self.lines[path[:n]]
                break
        self.errors.append((line, _fmt_path(path), msg))

    def number(self, doc: dict, key: str, path: tuple, *, lo=None, hi=None, lo_open=False,
               hi_open=False, integer=False, default=None):
        if key not in doc:
            return default
        v = doc[key]
        ok_type = isinstance(v, int) if integer else isinstance(v, (int, float))
        if isinstance(v, bool) or not ok_type:
            self.fail(path + (key,), f"expected {'an integer' if integer else 'a number'}, got {v!r}")
            return default
        too_low = lo is not None and (v <= lo if lo_open else v < lo)
        too_high = hi is not None and (v >= hi if hi_open else v > hi)
        if too_low or too_high:
            lb = "(" if lo_open else "["
            rb = ")" if hi_open else "]"
            self.fail(path + (key,), f"{v} is outside {lb}{lo if lo is not None else '-inf'}, "
                                     f"{hi if hi is not None else 'inf'}{rb}")
            return default
        return v


def _parse_pipeline(doc: Any, chk: _Checker) -> PipelineFlags:
    path = ("pipeline",)
    if doc is None:
        return PipelineFlags()
    if not isinstance(doc, dict):
        chk.fail(path, "expected a mapping")
        return PipelineFlags()
    known = {f.name for f in fields(PipelineFlags)}
    for key in doc:
        if key not in known:
            chk.fail(path + (key,), "unknown pipeline flag")

    kw: dict[str, Any] = {}
    if "conv3d" in doc:
        if isinstance(doc["conv3d"], bool):
            kw["conv3d"] = doc["conv3d"]
        else:
            chk.fail(path + ("conv3d",), f"expected true/false, got {doc['conv3d']!r}")
    if doc.get("evs_q") is not None:
        q = chk.number(doc, "evs_q", path, lo=0, hi=1, hi_open=True)
        if q is not None:
            kw["evs_q"] = float(q)
    if "patch_budget" in doc:
        pb = doc["patch_budget"]
        if pb == "default" or (isinstance(pb, int) and not isinstance(pb, bool) and pb in FRAME_PATCH_TARGETS):
            kw["patch_budget"] = pb
        else:
            chk.fail(path + ("patch_budget",), f"expected one of {FRAME_PATCH_TARGETS} or 'default', got {pb!r}")
    if "stage" in doc:
        if doc["stage"] in STAGE_LIMITS:
            kw["stage"] = doc["stage"]
        else:
            chk.fail(path + ("stage",), f"expected one of {sorted(STAGE_LIMITS)}, got {doc['stage']!r}")
    w = chk.number(doc, "window", path, lo=0, lo_open=True)
    if w is not None:
        kw["window"] = w
    mf = chk.number(doc, "max_frames", path, lo=1, integer=True)
    if mf is not None:
        kw["max_frames"] = mf
    if "overhead" in doc:
        ov = doc["overhead"]
        opath = path + ("overhead",)
        if not isinstance(ov, dict):
            chk.fail(opath, "expected a mapping")
        else:
            vals = {}
            for key in ov:
                if key not in ("per_frame", "per_image_fixed", "per_sequence_fixed"):
                    chk.fail(opath + (key,), "unknown overhead field")
            for key in ("per_frame", "per_image_fixed", "per_sequence_fixed"):
                v = chk.number(ov, key, opath, lo=0, integer=True)
                if v is not None:
                    vals[key] = v
            kw["overhead"] = TokenOverheadModel(**vals)
    return PipelineFlags(**kw)


_REQUIRED = {
    "image": ("width", "height"),
    "video": ("duration", "width", "height"),
    "audio": ("duration",),
    "text": ("tokens",),
}


def _parse_entry(doc: Any, i: int, chk: _Checker) -> ManifestEntry | None:
    path = ("items", i)
    if not isinstance(doc, dict):
        chk.fail(path, "expected a mapping")
        return None
    n_before = len(chk.errors)
    kind = doc.get("kind")
    if kind not in KINDS:
        chk.fail(path + ("kind",), f"expected one of {list(KINDS)}, got {kind!r}")
        return None
    known = {f.name for f in fields(ManifestEntry)}
    for key in doc:
        if key not in known:
            chk.fail(path + (key,), "unknown item field")
    for key in _REQUIRED[kind]:
        if key not in doc:
            chk.fail(path, f"{kind} item requires '{key}'")
    if kind == "video" and "frames" not in doc and "fps" not in doc:
        chk.fail(path, "video item requires 'frames' or 'fps'")
    ident = doc.get("id", f"{kind}{i}")
    if not isinstance(ident, (str, int)) or isinstance(ident, bool):
        chk.fail(path + ("id",), "id must be a string")
    kw: dict[str, Any] = {"kind": kind, "id": str(ident)}
    kw["start"] = chk.number(doc, "start", path, lo=0, default=0.0)
    kw["duration"] = chk.number(doc, "duration", path, lo=0, lo_open=kind in ("audio", "video"),
                                default=0.0)
    kw["width"] = chk.number(doc, "width", path, lo=1, integer=True)
    kw["height"] = chk.number(doc, "height", path, lo=1, integer=True)
    kw["fps"] = chk.number(doc, "fps", path, lo=0, lo_open=True)
    kw["frames"] = chk.number(doc, "frames", path, lo=1, integer=True)
    kw["tokens"] = chk.number(doc, "tokens", path, lo=0, integer=True)
    if len(chk.errors) > n_before:
        return None
    return ManifestEntry(**kw)


def parse_manifest_text(text: str, source: str = "<manifest>") -> Manifest:
    doc, lines = _load(text, source)
    chk = _Checker(source, lines)
    if not isinstance(doc, dict):
        raise ManifestError(source, [(1, "<root>", "manifest must be a mapping")])
    for key in doc:
        if key not in ("version", "pipeline", "items"):
            chk.fail((key,), "unknown top-level key")
    if doc.get("version", MANIFEST_VERSION) != MANIFEST_VERSION:
        chk.fail(("version",), f"unsupported manifest version {doc.get('version')!r}")
    pipeline = _parse_pipeline(doc.get("pipeline"), chk)
    items = doc.get("items", [])
    entries = []
    if not isinstance(items, list):
        chk.fail(("items",), "expected a list")
    else:
        seen = set()
        for i, item in enumerate(items):
            entry = _parse_entry(item, i, chk)
            if entry is None:
                continue
            if entry.id in seen:
                chk.fail(("items", i, "id"), f"duplicate id {entry.id!r}")
            seen.add(entry.id)
            entries.append(entry)
    if chk.errors:
        raise ManifestError(source, chk.errors)
    return Manifest(pipeline, tuple(entries))


def parse_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read manifest {path}: {exc.strerror}") from None
    return parse_manifest_text(text, str(path))


def manifest_to_dict(manifest: Manifest) -> dict:
    flags = asdict(manifest.pipeline)
    if flags["evs_q"] is None:
        del flags["evs_q"]
    items = [{k: v for k, v in asdict(e).items() if v is not None} for e in manifest.entries]
    return {"version": MANIFEST_VERSION, "pipeline": flags, "items": items}


def dump_manifest(manifest: Manifest) -> str:
    return yaml.safe_dump(manifest_to_dict(manifest), sort_keys=False)
