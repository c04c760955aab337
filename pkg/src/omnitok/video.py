"""Frame sampling, per-frame resolution and video token budgets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ._exact import exact
from .errors import InvalidInputError
from .vision import SHUFFLE_FACTOR, PatchBudget, ResolutionPlan, plan_image_resolution

FRAME_PATCH_TARGETS = (256, 512, 768, 1024)
STAGE_MAX_FRAMES = {"stage1": 64, "stage4": 64, "stage5": 256, "stage6": 256}
TUBELET_FRAMES = 2


@dataclass(frozen=True)
class TokenOverheadModel:
    """Wrapper tokens added around visual content.

    The defaults are fitted to the reported 512-frame totals, not measured.
    """

    per_frame: int = 19
    per_image_fixed: int = 2
    per_sequence_fixed: int = 50

    def __post_init__(self):
        for name in ("per_frame", "per_image_fixed", "per_sequence_fixed"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"overhead {name} must be >= 0")


ZERO_OVERHEAD = TokenOverheadModel(0, 0, 0)


@dataclass(frozen=True)
class FrameSamplingPlan:
    duration: float
    native_fps: float
    max_frames: int
    sampled_timestamps: list[float] = field(default_factory=list)

    @property
    def frames(self) -> int:
        return len(self.sampled_timestamps)


@dataclass(frozen=True)
class VideoTokenBudget:
    frames: int
    tubelets: int
    patches_per_frame: int
    visual_tokens: int
    overhead_tokens: int
    total_tokens: int
    conv3d: bool = False

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "tubelets": self.tubelets,
            "patches_per_frame": self.patches_per_frame,
            "conv3d": self.conv3d,
            "visual_tokens": self.visual_tokens,
            "overhead_tokens": self.overhead_tokens,
            "total_tokens": self.total_tokens,
        }


def sample_frames(duration: float, native_fps: float, max_frames: int) -> FrameSamplingPlan:
    """Pick frame timestamps: every native frame if they fit, else centre-of-bin sampling."""
    if duration <= 0 or native_fps <= 0 or max_frames < 1:
        raise InvalidInputError(
            f"need duration > 0, fps > 0, max_frames >= 1; got "
            f"{duration}, {native_fps}, {max_frames}"
        )
    # a clip shorter than one frame period still shows frame 0
    native = max(1, math.floor(exact(duration) * exact(native_fps)))
    if native <= max_frames:
        stamps = [i / native_fps for i in range(native)]
    else:
        step = duration / max_frames
        stamps = [(i + 0.5) * step for i in range(max_frames)]
    return FrameSamplingPlan(duration, native_fps, max_frames, stamps)


def plan_frame_resolution(width: int, height: int, target_patches: int) -> ResolutionPlan:
    if target_patches not in FRAME_PATCH_TARGETS:
        raise InvalidInputError(
            f"target_patches must be one of {FRAME_PATCH_TARGETS}, got {target_patches}"
        )
    return plan_image_resolution(width, height, PatchBudget(4, target_patches))


def tubelet_count(frames: int, conv3d: bool) -> int:
    # an odd trailing frame is paired with a copy of itself
    return math.ceil(frames / TUBELET_FRAMES) if conv3d else frames


def video_token_budget(
    frames: int,
    patches_per_frame: int,
    conv3d: bool,
    overhead: TokenOverheadModel | None = None,
) -> VideoTokenBudget:
    """Token budget of one video.

    Conv3D fuses frame pairs into tubelets, halving visual tokens; the
    per-frame overhead is charged on every sampled frame either way.
    """
    overhead = overhead or TokenOverheadModel()
    if frames < 1:
        raise InvalidInputError(f"frames must be >= 1, got {frames}")
    if patches_per_frame < 1 or patches_per_frame % SHUFFLE_FACTOR:
        raise InvalidInputError(
            f"patches_per_frame must be a positive multiple of {SHUFFLE_FACTOR}, "
            f"got {patches_per_frame}"
        )
    tubelets = tubelet_count(frames, conv3d)
    visual = tubelets * (patches_per_frame // SHUFFLE_FACTOR)
    extra = frames * overhead.per_frame + overhead.per_sequence_fixed
    return VideoTokenBudget(
        frames=frames,
        tubelets=tubelets,
        patches_per_frame=patches_per_frame,
        visual_tokens=visual,
        overhead_tokens=extra,
        total_tokens=visual + extra,
        conv3d=conv3d,
    )
