"""Mixed-precision weight footprint and serving-cache arithmetic.

Sizes are decimal (1 GB = 1e9 bytes). The shipped inventories are estimates:
the per-group parameter split of the model is not public, so the groups are
sized to the 30.75e9 total implied by a 61.5 GB BF16 checkpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import InvalidInputError

GB = 1e9

BF16_BITS = 16.0
FP8_BITS = 8.0
# per-tensor FP32 scale; amortised over the tensor it scales
PER_TENSOR_SCALE_BITS = 32


def nvfp4_bits(tensor_elements: int | None = None) -> float:
    """Storage bits per weight for NVFP4: E2M1 values, an FP8 scale per 16, an FP32 scale per tensor."""
    bits = 4.0 + 8.0 / 16
    if tensor_elements:
        bits += PER_TENSOR_SCALE_BITS / tensor_elements
    return bits


def fp8_bits(tensor_elements: int | None = None) -> float:
    bits = FP8_BITS
    if tensor_elements:
        bits += PER_TENSOR_SCALE_BITS / tensor_elements
    return bits


@dataclass(frozen=True)
class ParamGroup:
    name: str
    param_count: float
    bits: float
    encoder: bool = False

    def __post_init__(self):
        if self.param_count <= 0:
            raise InvalidInputError(f"group {self.name!r}: param_count must be > 0")
        if self.bits <= 0:
            raise InvalidInputError(f"group {self.name!r}: bits must be > 0")

    @property
    def total_bits(self) -> float:
        return self.param_count * self.bits


@dataclass(frozen=True)
class ParamGroupInventory:
    groups: tuple[ParamGroup, ...]
    name: str = "custom"

    @property
    def param_count(self) -> float:
        return sum(g.param_count for g in self.groups)


@dataclass(frozen=True)
class Footprint:
    bpw: float
    total_bytes: float

    @property
    def gigabytes(self) -> float:
        return self.total_bytes / GB


def effective_bpw(inventory: ParamGroupInventory, exclude_encoders: bool = False) -> Footprint:
    """Parameter-weighted mean bits and total bytes.

    ``exclude_encoders`` drops encoder groups from the bpw average only;
    their bytes are always counted.
    """
    if not inventory.groups:
        raise InvalidInputError("inventory has no parameter groups")
    counted = [g for g in inventory.groups if not (exclude_encoders and g.encoder)]
    if not counted:
        raise InvalidInputError("every group is an encoder; nothing left to average")
    bpw = sum(g.total_bits for g in counted) / sum(g.param_count for g in counted)
    total_bytes = sum(g.total_bits for g in inventory.groups) / 8
    return Footprint(bpw, total_bytes)


@dataclass(frozen=True)
class CacheConfig:
    layers_attention: int
    layers_ssm: int
    kv_bytes_per_token_per_layer: float
    ssm_state_bytes_per_layer: float
    kv_precision_bits: int = 8
    ssm_precision_bits: int = 32

    def __post_init__(self):
        if min(self.layers_attention, self.layers_ssm) < 0:
            raise InvalidInputError("layer counts must be >= 0")
        if min(self.kv_bytes_per_token_per_layer, self.ssm_state_bytes_per_layer) < 0:
            raise InvalidInputError("cache byte sizes must be >= 0")


def cache_bytes(config: CacheConfig, tokens: int, concurrency: int = 1) -> float:
    if tokens < 0 or concurrency < 0:
        raise InvalidInputError("tokens and concurrency must be >= 0")
    kv = tokens * config.layers_attention * config.kv_bytes_per_token_per_layer
    ssm = config.layers_ssm * config.ssm_state_bytes_per_layer
    return concurrency * (kv + ssm)


# --- estimated inventories --------------------------------------------------
# Parameter counts below are estimates chosen to sum to 30.75e9.
# Encoders and projectors stay BF16 in every recipe.

_ENCODERS = (
    ("vision_encoder", 0.66e9),
    ("audio_encoder", 0.60e9),
    ("mlp_projectors", 0.04e9),
)
# Language-model groups: (name, params, recipe role)
#   "keep"   - BF16 in every recipe (embeddings, lm_head, router)
#   "dense"  - other linear layers, BF16 under NVFP4, FP8 under FP8
#   "fp8"    - Mamba in/out proj, shared experts, attention o_proj
#   "routed" - routed MoE experts
_LM_GROUPS = (
    ("embeddings", 0.35e9, "keep"),
    ("lm_head", 0.35e9, "keep"),
    ("moe_router", 0.005e9, "keep"),
    ("attention_qkv_and_misc", 0.195e9, "dense"),
    ("mamba_in_out_proj", 0.62e9, "fp8"),
    ("shared_experts", 0.40e9, "fp8"),
    ("attention_o_proj", 0.061e9, "fp8"),
    ("routed_experts", 27.469e9, "routed"),
)
# one routed-expert projection (hidden 2688 x expert ffn 1856)
_EXPERT_TENSOR = 2688 * 1856

_RECIPE_BITS = {
    "bf16": {"keep": BF16_BITS, "dense": BF16_BITS, "fp8": BF16_BITS, "routed": BF16_BITS},
    "fp8": {"keep": BF16_BITS, "dense": FP8_BITS, "fp8": FP8_BITS, "routed": FP8_BITS},
    "nvfp4": {
        "keep": BF16_BITS,
        "dense": BF16_BITS,
        "fp8": FP8_BITS,
        "routed": nvfp4_bits(_EXPERT_TENSOR),
    },
}
PRESETS = tuple(_RECIPE_BITS)

# reported (size GB, effective bpw) per recipe
REPORTED = {"bf16": (61.5, 16.0), "fp8": (32.8, 8.5), "nvfp4": (20.9, 4.98)}


def preset_inventory(recipe: str) -> ParamGroupInventory:
    if recipe not in _RECIPE_BITS:
        raise InvalidInputError(f"unknown recipe {recipe!r}; expected one of {PRESETS}")
    bits = _RECIPE_BITS[recipe]
    groups = [ParamGroup(n, c, BF16_BITS, encoder=True) for n, c in _ENCODERS]
    groups += [ParamGroup(n, c, bits[role]) for n, c, role in _LM_GROUPS]
    return ParamGroupInventory(tuple(groups), name=recipe)


def load_inventory(path: str | Path) -> ParamGroupInventory:
    """Read an inventory from YAML/JSON: ``groups: [{name, count, bits, encoder?}]``."""
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("groups"), list):
        raise InvalidInputError(f"{path}: expected a mapping with a 'groups' list")
    groups = []
    for i, g in enumerate(doc["groups"]):
        if not isinstance(g, dict):
            raise InvalidInputError(f"{path}: groups[{i}] must be a mapping")
        try:
            groups.append(
                ParamGroup(
                    name=str(g["name"]),
                    param_count=float(g["count"]),
                    bits=float(g["bits"]),
                    encoder=bool(g.get("encoder", False)),
                )
            )
        except KeyError as exc:
            raise InvalidInputError(f"{path}: groups[{i}] missing field {exc}") from None
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"{path}: groups[{i}]: {exc}") from None
    return ParamGroupInventory(tuple(groups), name=str(doc.get("name", path.stem)))


# Illustrative serving-cache geometry for the hybrid backbone (estimate).
DEFAULT_CACHE = CacheConfig(
    layers_attention=6,
    layers_ssm=23,
    kv_bytes_per_token_per_layer=2 * 2 * 128 * 1,  # K+V, 2 KV heads, head dim 128, FP8
    ssm_state_bytes_per_layer=64 * 64 * 128 * 4,  # heads x head dim x state, FP32
)
