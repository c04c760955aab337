from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from omnitok.errors import InvalidInputError
from omnitok.manifest import (
    Manifest,
    ManifestEntry,
    ManifestError,
    PipelineFlags,
    dump_manifest,
    parse_manifest,
    parse_manifest_text,
)
from omnitok.video import TokenOverheadModel

DATA = Path(__file__).parent / "data"


def test_minimal_image_defaults():
    m = parse_manifest(DATA / "image_only.yaml")
    assert m.pipeline == PipelineFlags()
    assert m.pipeline.overhead == TokenOverheadModel()
    assert m.entries == (ManifestEntry("image", "photo", width=512, height=512),)


def test_av_manifest():
    m = parse_manifest(DATA / "av_manifest.yaml")
    assert m.pipeline.conv3d and m.pipeline.evs_q == 0.5
    assert [e.kind for e in m.entries] == ["text", "image", "video", "audio"]


def test_evs_out_of_range_names_field_and_line():
    text = "pipeline:\n  conv3d: true\n  evs_q: 1.5\nitems: []\n"
    with pytest.raises(ManifestError) as exc:
        parse_manifest_text(text, "m.yaml")
    (line, where, msg), = exc.value.errors
    assert (line, where) == (3, "pipeline.evs_q")
    assert "1.5" in msg
    assert "m.yaml:3: pipeline.evs_q" in str(exc.value)


def test_collects_several_errors():
    text = (
        "pipeline:\n"
        "  stage: 32k\n"
        "  patch_budget: 300\n"
        "items:\n"
        "  - {kind: audio, id: a}\n"
        "  - {kind: hologram, id: h}\n"
        "  - {kind: image, id: a, width: 0, height: 4}\n"
    )
    with pytest.raises(ManifestError) as exc:
        parse_manifest_text(text)
    fields = [(line, where) for line, where, _ in exc.value.errors]
    assert (2, "pipeline.stage") in fields
    assert (3, "pipeline.patch_budget") in fields
    assert (5, "items[0]") in fields
    assert (6, "items[1].kind") in fields
    assert (7, "items[2].width") in fields


def test_syntax_error_has_line():
    with pytest.raises(ManifestError) as exc:
        parse_manifest_text("items:\n  - {kind: image\n  - x\n")
    assert exc.value.errors[0][0] is not None


def test_missing_file():
    with pytest.raises(InvalidInputError):
        parse_manifest(DATA / "nope.yaml")


def test_duplicate_ids():
    with pytest.raises(ManifestError, match="duplicate"):
        parse_manifest_text("items:\n  - {kind: text, id: x, tokens: 1}\n  - {kind: text, id: x, tokens: 2}\n")


def test_round_trip_file():
    m = parse_manifest(DATA / "av_manifest.yaml")
    assert parse_manifest_text(dump_manifest(m)) == m


entries = st.lists(
    st.one_of(
        st.builds(lambda i, w, h: ManifestEntry("image", f"i{i}", width=w, height=h),
                  st.integers(), st.integers(1, 8192), st.integers(1, 8192)),
        st.builds(lambda i, s, d, f: ManifestEntry("video", f"v{i}", start=s, duration=d, fps=f,
                                                   width=640, height=360),
                  st.integers(), st.floats(0, 1e4), st.floats(0.01, 1e4), st.floats(0.1, 120)),
        st.builds(lambda i, s, d: ManifestEntry("audio", f"a{i}", start=s, duration=d),
                  st.integers(), st.floats(0, 1e4), st.floats(0.01, 1e5)),
        st.builds(lambda i, t: ManifestEntry("text", f"t{i}", tokens=t), st.integers(), st.integers(0, 10**6)),
    ),
    max_size=6,
    unique_by=lambda e: e.id,
)
flags = st.builds(
    PipelineFlags,
    conv3d=st.booleans(),
    evs_q=st.one_of(st.none(), st.floats(0, 0.99)),
    patch_budget=st.sampled_from(["default", 256, 512, 768, 1024]),
    stage=st.sampled_from(["16k", "48k", "256k"]),
    max_frames=st.integers(1, 512),
    overhead=st.builds(TokenOverheadModel, st.integers(0, 50), st.integers(0, 5), st.integers(0, 100)),
)


@given(flags, entries)
def test_round_trip_property(pipeline, items):
    m = Manifest(pipeline, tuple(items))
    once = parse_manifest_text(dump_manifest(m))
    assert once == m
    assert parse_manifest_text(dump_manifest(once)) == once
