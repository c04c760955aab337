"""Dynamic-resolution planning for single images.

An image is cut into 16x16 ViT patches; a 2x2 pixel shuffle then folds every
four patches into one LLM token. Grids are kept even in both directions so the
shuffle tiles exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BudgetInfeasibleError, InvalidInputError

PATCH_SIZE = 16
SHUFFLE_FACTOR = 4  # 2x2 spatial grouping
DEFAULT_MIN_PATCHES = 1024
DEFAULT_MAX_PATCHES = 13312


@dataclass(frozen=True)
class PatchBudget:
    min_patches: int = DEFAULT_MIN_PATCHES
    max_patches: int = DEFAULT_MAX_PATCHES

    def __post_init__(self):
        if not 0 < self.min_patches <= self.max_patches:
            raise InvalidInputError(
                f"patch budget needs 0 < min <= max, got "
                f"[{self.min_patches}, {self.max_patches}]"
            )


@dataclass(frozen=True)
class ResolutionPlan:
    source_width: int
    source_height: int
    target_width: int
    target_height: int
    grid_w: int
    grid_h: int
    vit_tokens: int
    llm_tokens: int

    def to_dict(self) -> dict:
        return {
            "source": [self.source_width, self.source_height],
            "target": [self.target_width, self.target_height],
            "grid": [self.grid_w, self.grid_h],
            "vit_tokens": self.vit_tokens,
            "llm_tokens": self.llm_tokens,
        }


def _nearest_even(x: float) -> int:
    # half-up on x/2 so the rule does not depend on banker's rounding
    return max(2, 2 * math.floor(x / 2 + 0.5))


def _aspect_error(gw: int, gh: int, width: int, height: int) -> float:
    return abs(math.log((gw / gh) * (height / width)))


def plan_image_resolution(
    width: int, height: int, budget: PatchBudget | None = None
) -> ResolutionPlan:
    """Choose an even patch grid for a ``width`` x ``height`` image.

    The native grid is scaled uniformly so its area lands inside the budget,
    rounded to even sides, then nudged two patches at a time until the patch
    count is within ``[min_patches, max_patches]``.
    """
    budget = budget or PatchBudget()
    if width < 1 or height < 1:
        raise InvalidInputError(f"image dimensions must be positive, got {width}x{height}")
    if budget.min_patches < 4 or budget.max_patches < 4:
        raise BudgetInfeasibleError(
            f"budget [{budget.min_patches}, {budget.max_patches}] is below the "
            "smallest even grid (2x2 = 4 patches)"
        )

    native = (width / PATCH_SIZE) * (height / PATCH_SIZE)
    if budget.min_patches <= native <= budget.max_patches:
        gw_f, gh_f = width / PATCH_SIZE, height / PATCH_SIZE
    else:
        target = min(max(native, budget.min_patches), budget.max_patches)
        # depends only on the aspect ratio, so equal-aspect inputs share a grid
        gw_f = math.sqrt(target * width / height)
        gh_f = math.sqrt(target * height / width)

    gw, gh = _nearest_even(gw_f), _nearest_even(gh_f)

    while gw * gh > budget.max_patches:
        if gw >= gh:
            gw -= 2
        else:
            gh -= 2

    while gw * gh < budget.min_patches:
        err_w = _aspect_error(gw + 2, gh, width, height)
        err_h = _aspect_error(gw, gh + 2, width, height)
        if err_w < err_h:
            gw += 2
        else:
            gh += 2

    if gw * gh > budget.max_patches:
        raise BudgetInfeasibleError(
            f"no even grid for {width}x{height} has a patch count in "
            f"[{budget.min_patches}, {budget.max_patches}]"
        )

    vit = gw * gh
    return ResolutionPlan(
        source_width=width,
        source_height=height,
        target_width=PATCH_SIZE * gw,
        target_height=PATCH_SIZE * gh,
        grid_w=gw,
        grid_h=gh,
        vit_tokens=vit,
        llm_tokens=vit // SHUFFLE_FACTOR,
    )


def image_llm_tokens(plan: ResolutionPlan, overhead) -> int:
    """LLM tokens for one image including its fixed wrapper tokens."""
    return plan.llm_tokens + overhead.per_image_fixed
