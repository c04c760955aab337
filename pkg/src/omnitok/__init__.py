"""Token-economy arithmetic for an omni-modal LLM input pipeline."""

from .audio import audio_token_count, mel_frame_count, segment_clips, total_audio_tokens
from .budget import BudgetConfig, BudgetController
from .evs import (
    FeatureTensor,
    RetentionMask,
    evs_dissimilarity,
    evs_prune,
    retained_visual_tokens,
    synth_feature_tensor,
)
from .footprint import CacheConfig, ParamGroup, ParamGroupInventory, cache_bytes, effective_bpw
from .packer import pack, utilization_stats
from .sequencer import MediaItem, build_timeline, check_context, interleave
from .video import TokenOverheadModel, plan_frame_resolution, sample_frames, video_token_budget
from .vision import PatchBudget, ResolutionPlan, image_llm_tokens, plan_image_resolution

__version__ = "0.1.0"
