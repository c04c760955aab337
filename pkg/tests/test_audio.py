import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from omnitok.audio import audio_token_count, mel_frame_count, segment_clips
from omnitok.errors import InvalidInputError


@pytest.mark.parametrize("duration,frames", [(30, 3000), (0.01, 1), (0.505, 51), (1.1, 110)])
def test_mel_frames(duration, frames):
    assert mel_frame_count(duration) == frames


@pytest.mark.parametrize("duration,tokens", [(30, 375), (1, 13), (0.5, 7)])
def test_audio_tokens(duration, tokens):
    assert audio_token_count(duration) == tokens


@pytest.mark.parametrize("bad", [0, -1, -0.01])
def test_rejects_non_positive(bad):
    with pytest.raises(InvalidInputError):
        mel_frame_count(bad)
    with pytest.raises(InvalidInputError):
        segment_clips(bad)


def test_segment_61s():
    plan = segment_clips(61)
    assert [c.length for c in plan.clips] == [30, 30, 1]
    assert [c.tokens for c in plan.clips] == [375, 375, 13]
    assert plan.total_tokens == 763
    assert [c.start for c in plan.clips] == [0, 30, 60]


def test_segment_single_clip():
    plan = segment_clips(30)
    assert len(plan.clips) == 1 and plan.total_tokens == 375


def test_five_hours():
    plan = segment_clips(5 * 3600)
    assert len(plan.clips) == 600
    assert plan.total_tokens == 225_000


def test_short_input_flagged_not_padded():
    plan = segment_clips(0.2)
    assert plan.below_minimum
    assert plan.clips[0].length == 0.2
    assert not segment_clips(0.5).below_minimum


durations = st.decimals(min_value="0.01", max_value="20000", places=2).map(float)


@given(durations)
def test_clips_tile_the_stream(duration):
    plan = segment_clips(duration)
    assert all(c.length <= 30 for c in plan.clips)
    assert all(c.length == 30 for c in plan.clips[:-1])
    assert sum(c.length for c in plan.clips) == pytest.approx(duration)
    for a, b in zip(plan.clips, plan.clips[1:]):
        assert b.start == pytest.approx(a.start + a.length)


@given(durations)
def test_token_sum_bounds(duration):
    plan = segment_clips(duration)
    floor = math.ceil(duration * 12.5 - 1e-9)
    assert floor <= plan.total_tokens <= floor + len(plan.clips)


@given(durations, durations)
def test_monotone(a, b):
    a, b = sorted((a, b))
    assert audio_token_count(a) <= audio_token_count(b)
    assert segment_clips(a).total_tokens <= segment_clips(b).total_tokens


@given(st.integers(1, 1000))
def test_exact_multiples_of_30(k):
    assert segment_clips(30 * k).total_tokens == 375 * k


@pytest.mark.parametrize("d", [0.01, 0.5, 29.99, 30, 30.01, 61, 3600, 18000.5, 21600])
def test_total_matches_clip_plan(d):
    from omnitok.audio import total_audio_tokens
    assert total_audio_tokens(d) == segment_clips(d).total_tokens
