"""Audio clip segmentation and token arithmetic.

Log-mel frames arrive every 10 ms; three stride-2 subsampling stages reduce
them 8x, giving 12.5 tokens per second. Streams are cut into 30 s clips and
the last clip keeps whatever remains, unpadded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ._exact import exact
from .errors import InvalidInputError

MEL_FRAMES_PER_SECOND = 100
SUBSAMPLING = 8
CLIP_SECONDS = 30
MIN_TRAINED_SECONDS = Fraction(1, 2)
SAMPLE_RATE_HZ = 16_000


@dataclass(frozen=True)
class AudioClip:
    start: float
    length: float
    mel_frames: int
    tokens: int


@dataclass(frozen=True)
class AudioClipPlan:
    total_duration: float
    clips: tuple[AudioClip, ...]
    below_minimum: bool = False  # shorter than the shortest trained input

    @property
    def total_tokens(self) -> int:
        return sum(c.tokens for c in self.clips)

    def to_dict(self) -> dict:
        return {
            "duration_s": self.total_duration,
            "clips": len(self.clips),
            "clip_tokens": [c.tokens for c in self.clips],
            "total_tokens": self.total_tokens,
            "below_minimum": self.below_minimum,
        }


def _check_duration(duration) -> Fraction:
    d = exact(duration)
    if d <= 0:
        raise InvalidInputError(f"audio duration must be > 0, got {duration}")
    return d


def mel_frame_count(duration: float) -> int:
    return math.ceil(_check_duration(duration) * MEL_FRAMES_PER_SECOND)


def audio_token_count(duration: float) -> int:
    return -(-mel_frame_count(duration) // SUBSAMPLING)


def total_audio_tokens(duration: float) -> int:
    """Token count of the clip plan for ``duration``, without building the clips."""
    full, rest = divmod(_check_duration(duration), CLIP_SECONDS)
    return int(full) * audio_token_count(CLIP_SECONDS) + (audio_token_count(rest) if rest else 0)


def segment_clips(duration: float) -> AudioClipPlan:
    d = _check_duration(duration)
    full, rest = divmod(d, CLIP_SECONDS)
    full = int(full)
    mel_full = mel_frame_count(CLIP_SECONDS)
    tok_full = audio_token_count(CLIP_SECONDS)
    clips = [AudioClip(float(i * CLIP_SECONDS), float(CLIP_SECONDS), mel_full, tok_full)
             for i in range(full)]
    if rest > 0:
        clips.append(AudioClip(float(full * CLIP_SECONDS), float(rest),
                               mel_frame_count(rest), audio_token_count(rest)))
    return AudioClipPlan(float(duration), tuple(clips), below_minimum=d < MIN_TRAINED_SECONDS)
