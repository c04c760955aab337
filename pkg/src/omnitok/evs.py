"""Efficient Video Sampling: dissimilarity-ranked pruning of video tokens.

Each spatial position is compared with the same position in the previous
tubelet; the globally most-changed tokens are kept. The first tubelet carries
the ``PINNED`` sentinel and is always retained.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._exact import retained_count
from .errors import InvalidInputError
from .video import SHUFFLE_FACTOR, VideoTokenBudget

PINNED = math.inf  # ranks above every finite dissimilarity, including 2.0

TENSOR_MAGIC = b"EVST"
MASK_MAGIC = b"EVSM"
FORMAT_VERSION = 1

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


@dataclass(frozen=True)
class FeatureTensor:
    """Tubelet features, shape ``(T, S, D)``."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise InvalidInputError(f"feature tensor must be (T>=1, S>=1, D>=1), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("feature tensor contains non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def tubelets(self) -> int:
        return self.data.shape[0]

    @property
    def spatial(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class RetentionMask:
    keep: np.ndarray  # (T, S) bool
    retained: int
    budget_q: float

    def kept_indices(self) -> np.ndarray:
        """Linear indices ``t*S + s`` of kept tokens, in input order."""
        return np.flatnonzero(self.keep.ravel())


def _check_q(q: float) -> None:
    if not 0 <= q < 1:
        raise InvalidInputError(f"pruning rate q must be in [0, 1), got {q}")


def _dot_last(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # fixed left-to-right accumulation over the feature axis; bit-reproducible
    acc = np.zeros(a.shape[:-1])
    for d in range(a.shape[-1]):
        acc = acc + a[..., d] * b[..., d]
    return acc


def evs_dissimilarity(tensor: FeatureTensor) -> np.ndarray:
    """Cosine dissimilarity to the previous tubelet, shape ``(T, S)``.

    Values lie in [0, 2]; a zero-norm vector on either side gives 1. Row 0
    is ``PINNED``.
    """
    f = tensor.data
    out = np.full(f.shape[:2], PINNED)
    if f.shape[0] > 1:
        cur, prev = f[1:], f[:-1]
        dots = _dot_last(cur, prev)
        norms = np.sqrt(_dot_last(cur, cur)) * np.sqrt(_dot_last(prev, prev))
        with np.errstate(divide="ignore", invalid="ignore"):
            d = 1.0 - dots / norms
        # clip only absorbs rounding past the exact cosine range
        out[1:] = np.where(norms == 0.0, 1.0, np.clip(d, 0.0, 2.0))
    return out


def evs_budget(tubelets: int, spatial: int, q: float) -> int:
    """K = max(S, ceil((1 - q) * T * S))."""
    _check_q(q)
    return max(spatial, retained_count(q, tubelets * spatial))


def select_top(dissimilarity: np.ndarray, k: int) -> np.ndarray:
    """Boolean mask of the ``k`` largest entries; ties go to the smaller linear index."""
    flat = dissimilarity.ravel()
    order = np.argsort(-flat, kind="stable")
    keep = np.zeros(flat.size, dtype=bool)
    keep[order[:k]] = True
    return keep.reshape(dissimilarity.shape)


def evs_prune(tensor: FeatureTensor, q: float) -> RetentionMask:
    _check_q(q)
    k = evs_budget(tensor.tubelets, tensor.spatial, q)
    keep = select_top(evs_dissimilarity(tensor), k)
    return RetentionMask(keep=keep, retained=int(keep.sum()), budget_q=q)


def apply_mask(tensor: FeatureTensor, mask: RetentionMask) -> np.ndarray:
    """Kept token vectors as ``(retained, D)``, temporal-spatial order preserved."""
    return tensor.data.reshape(-1, tensor.dim)[mask.kept_indices()]


def retained_visual_tokens(budget: VideoTokenBudget, q: float) -> int:
    _check_q(q)
    floor = budget.patches_per_frame // SHUFFLE_FACTOR
    return max(floor, retained_count(q, budget.visual_tokens))


def pruned_total_tokens(budget: VideoTokenBudget, q: float) -> int:
    return retained_visual_tokens(budget, q) + budget.overhead_tokens


# --- deterministic fixtures -------------------------------------------------

def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` SplitMix64 outputs for ``seed`` as uint64."""
    steps = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK64) + steps * np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def synth_feature_tensor(seed: int, T: int, S: int, D: int) -> FeatureTensor:
    """Reproducible tensor with entries uniform in [-1, 1), row-major draw order."""
    if min(T, S, D) < 1:
        raise InvalidInputError(f"T, S, D must be >= 1, got {T}, {S}, {D}")
    bits = splitmix64(seed, T * S * D)
    unit = (bits >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return FeatureTensor((2.0 * unit - 1.0).reshape(T, S, D))


# --- binary formats ---------------------------------------------------------

def encode_tensor(tensor: FeatureTensor) -> bytes:
    header = TENSOR_MAGIC + struct.pack("<4I", FORMAT_VERSION, *tensor.data.shape)
    return header + tensor.data.astype("<f4").tobytes()


def decode_tensor(blob: bytes) -> FeatureTensor:
    if len(blob) < 20 or blob[:4] != TENSOR_MAGIC:
        raise InvalidInputError("not an EVST tensor file")
    version, t, s, d = struct.unpack_from("<4I", blob, 4)
    if version != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported EVST version {version}")
    expected = 20 + 4 * t * s * d
    if len(blob) != expected:
        raise InvalidInputError(f"EVST payload is {len(blob)} bytes, expected {expected}")
    data = np.frombuffer(blob, dtype="<f4", offset=20).reshape(t, s, d)
    return FeatureTensor(data.astype(np.float64))


def encode_mask(mask: RetentionMask) -> bytes:
    t, s = mask.keep.shape
    header = MASK_MAGIC + struct.pack("<3I", FORMAT_VERSION, t, s)
    return header + mask.keep.astype(np.uint8).tobytes()


def decode_mask(blob: bytes, q: float = 0.0) -> RetentionMask:
    if len(blob) < 16 or blob[:4] != MASK_MAGIC:
        raise InvalidInputError("not an EVSM mask file")
    version, t, s = struct.unpack_from("<3I", blob, 4)
    if version != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported EVSM version {version}")
    if len(blob) != 16 + t * s:
        raise InvalidInputError("EVSM payload size does not match its header")
    raw = np.frombuffer(blob, dtype=np.uint8, offset=16)
    if np.any(raw > 1):
        raise InvalidInputError("EVSM entries must be 0 or 1")
    keep = raw.astype(bool).reshape(t, s)
    return RetentionMask(keep=keep, retained=int(keep.sum()), budget_q=q)


def read_tensor(path: str | Path) -> FeatureTensor:
    return decode_tensor(Path(path).read_bytes())


def write_tensor(path: str | Path, tensor: FeatureTensor) -> None:
    Path(path).write_bytes(encode_tensor(tensor))


def read_mask(path: str | Path) -> RetentionMask:
    return decode_mask(Path(path).read_bytes())


def write_mask(path: str | Path, mask: RetentionMask) -> None:
    Path(path).write_bytes(encode_mask(mask))
