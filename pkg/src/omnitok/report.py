"""Report builders shared by the CLI.

Every builder returns a plain dict whose key order is the output order. The
``check_*`` helpers recompute totals from the parts and raise
``InvariantViolation`` on any mismatch.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import replace

from . import audio, evs, footprint, packer, sequencer, video, vision
from .budget import BudgetConfig, Event, run_stream
from .errors import InvariantViolation
from .manifest import Manifest, ManifestEntry, PipelineFlags, manifest_to_dict

SCHEMA = "omnitok.report/1"


def _header(command: str) -> dict:
    return {"schema": SCHEMA, "command": command}


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=True) + "\n"


def _require(cond: bool, what: str) -> None:
    if not cond:
        raise InvariantViolation(what)


# --- images -----------------------------------------------------------------

def image_report(width: int, height: int, budget: vision.PatchBudget,
                 overhead: video.TokenOverheadModel) -> dict:
    plan = vision.plan_image_resolution(width, height, budget)
    rep = _header("plan-image")
    rep["budget"] = {"min_patches": budget.min_patches, "max_patches": budget.max_patches}
    rep["plan"] = plan.to_dict()
    rep["per_image_fixed"] = overhead.per_image_fixed
    rep["total_tokens"] = vision.image_llm_tokens(plan, overhead)
    _require(plan.llm_tokens * vision.SHUFFLE_FACTOR == plan.vit_tokens, "vit/llm ratio")
    _require(rep["total_tokens"] == plan.llm_tokens + overhead.per_image_fixed, "image total")
    return rep


# --- video ------------------------------------------------------------------

def frame_plan(width: int, height: int, frame_patches: int) -> vision.ResolutionPlan:
    return video.plan_frame_resolution(width, height, frame_patches)


def video_report(frames: int, width: int, height: int, frame_patches: int, conv3d: bool,
                 evs_q: float | None, overhead: video.TokenOverheadModel, stage: str,
                 sampling: video.FrameSamplingPlan | None = None) -> dict:
    plan = frame_plan(width, height, frame_patches)
    chosen = video.video_token_budget(frames, plan.vit_tokens, conv3d, overhead)
    retained = chosen.visual_tokens if evs_q is None else evs.retained_visual_tokens(chosen, evs_q)
    total = retained + chosen.overhead_tokens

    baseline = video.video_token_budget(frames, plan.vit_tokens, False, overhead)
    fused = video.video_token_budget(frames, plan.vit_tokens, True, overhead)
    variants = {"baseline": baseline.total_tokens, "conv3d": fused.total_tokens}
    if evs_q is not None:
        variants["conv3d_evs"] = evs.pruned_total_tokens(fused, evs_q)

    rep = _header("plan-video")
    if sampling is not None:
        rep["sampling"] = {
            "duration_s": sampling.duration,
            "native_fps": sampling.native_fps,
            "max_frames": sampling.max_frames,
            "frames": sampling.frames,
            "first_timestamp_s": sampling.sampled_timestamps[0],
            "last_timestamp_s": sampling.sampled_timestamps[-1],
        }
    rep["frame_plan"] = plan.to_dict()
    rep["budget"] = chosen.to_dict()
    rep["evs_q"] = evs_q
    rep["retained_visual_tokens"] = retained
    rep["total_tokens"] = total
    rep["variants"] = {
        k: {"total_tokens": v, "reduction_vs_baseline": round(1 - v / baseline.total_tokens, 6)}
        for k, v in variants.items()
    }
    rep["fit"] = sequencer.check_context(_single_layout(total), stage).to_dict()

    _require(chosen.total_tokens == chosen.visual_tokens + chosen.overhead_tokens, "video total")
    _require(retained <= chosen.visual_tokens, "evs never adds tokens")
    return rep


def _single_layout(total: int) -> sequencer.SequenceLayout:
    # a stand-alone item whose total already includes its sequence overhead
    return sequencer.SequenceLayout((), 0, total, sequencer.STAGE_LIMITS["256k"], True)


# --- audio ------------------------------------------------------------------

def audio_report(duration: float, stage: str) -> dict:
    plan = audio.segment_clips(duration)
    rep = _header("plan-audio")
    rep.update(plan.to_dict())
    rep["mel_frames"] = sum(c.mel_frames for c in plan.clips)
    rep["tokens_per_second"] = round(plan.total_tokens / duration, 6)
    rep["fit"] = sequencer.check_context(_single_layout(plan.total_tokens), stage).to_dict()
    _require(plan.total_tokens == sum(rep["clip_tokens"]), "audio total")
    return rep


# --- manifests --------------------------------------------------------------

def entry_tokens(entry: ManifestEntry, flags: PipelineFlags) -> tuple[int, dict]:
    """Token budget of one manifest entry, without the per-sequence overhead."""
    ov = flags.overhead
    if entry.kind == "image":
        plan = vision.plan_image_resolution(entry.width, entry.height)
        return vision.image_llm_tokens(plan, ov), {"grid": [plan.grid_w, plan.grid_h],
                                                   "vit_tokens": plan.vit_tokens}
    if entry.kind == "video":
        frames = entry.frames
        if frames is None:
            frames = video.sample_frames(entry.duration, entry.fps, flags.max_frames).frames
        plan = frame_plan(entry.width, entry.height, flags.frame_patches)
        budget = video.video_token_budget(
            frames, plan.vit_tokens, flags.conv3d, replace(ov, per_sequence_fixed=0)
        )
        visual = budget.visual_tokens
        if flags.evs_q is not None:
            visual = evs.retained_visual_tokens(budget, flags.evs_q)
        return visual + budget.overhead_tokens, {
            "frames": frames,
            "tubelets": budget.tubelets,
            "patches_per_frame": budget.patches_per_frame,
            "visual_tokens": visual,
            "overhead_tokens": budget.overhead_tokens,
        }
    if entry.kind == "audio":
        plan = audio.segment_clips(entry.duration)
        return plan.total_tokens, {"clips": len(plan.clips)}
    return entry.tokens, {}


def sequence_report(manifest: Manifest) -> dict:
    flags = manifest.pipeline
    items, entries = [], []
    for e in manifest.entries:
        tokens, detail = entry_tokens(e, flags)
        items.append(sequencer.MediaItem(e.kind, e.id, tokens, e.start, e.duration))
        entries.append({"id": e.id, "kind": e.kind, "tokens": tokens, **detail})
    windows = sequencer.build_timeline(items, flags.window)
    layout = sequencer.interleave(windows, flags.overhead, sequencer.STAGE_LIMITS[flags.stage])

    rep = _header("sequence")
    rep["pipeline"] = manifest_to_dict(manifest)["pipeline"]
    rep["entries"] = entries
    rep["layout"] = layout.to_dict()
    rep["fit"] = sequencer.check_context(layout, flags.stage).to_dict()
    check_sequence(rep)
    return rep


def check_sequence(rep: dict) -> None:
    layout = rep["layout"]
    by_id: dict[str, int] = {}
    for span in layout["spans"]:
        by_id[span["id"]] = by_id.get(span["id"], 0) + span["tokens"]
    for e in rep["entries"]:
        _require(by_id.get(e["id"], 0) == e["tokens"], f"span tokens of {e['id']} do not sum to its budget")
    expect = sum(e["tokens"] for e in rep["entries"]) + layout["overhead_tokens"]
    _require(layout["total_tokens"] == expect, "layout total")
    _require(rep["fit"]["total"] == expect, "fit total")


# --- packing ----------------------------------------------------------------

def pack_report(lengths: list[int], capacity: int, buffer_size: int) -> dict:
    packed = packer.pack(lengths, capacity, buffer_size)
    stats = packer.utilization_stats(packed)
    rep = _header("pack")
    rep["capacity"] = capacity
    rep["buffer"] = buffer_size
    rep["sequences"] = len(lengths)
    rep["bins"] = [{"ids": b.ids, "lengths": b.lengths, "fill": b.fill} for b in packed.bins]
    rep["utilization"] = packed.utilization
    rep["stats"] = stats.to_dict()

    placed = sorted(i for b in packed.bins for i in b.ids)
    _require(placed == list(range(len(lengths))), "every sequence packed exactly once")
    _require(all(b.fill <= capacity for b in packed.bins), "bin overflow")
    _require(sum(b.fill for b in packed.bins) == sum(lengths), "token conservation")
    return rep


# --- EVS --------------------------------------------------------------------

def evs_report(tensor: evs.FeatureTensor, q: float, source: str) -> tuple[dict, evs.RetentionMask]:
    mask = evs.evs_prune(tensor, q)
    rep = _header("evs-prune")
    rep["source"] = source
    rep["shape"] = {"tubelets": tensor.tubelets, "spatial": tensor.spatial, "dim": tensor.dim}
    rep["q"] = q
    rep["retained"] = mask.retained
    rep["budget"] = evs.evs_budget(tensor.tubelets, tensor.spatial, q)
    rep["kept_per_tubelet"] = [int(n) for n in mask.keep.sum(axis=1)]
    rep["mask_sha256"] = hashlib.sha256(evs.encode_mask(mask)).hexdigest()
    _require(rep["retained"] == rep["budget"], "retained equals budget")
    _require(rep["kept_per_tubelet"][0] == tensor.spatial, "anchor tubelet retained")
    return rep, mask


# --- budget replay ----------------------------------------------------------

def budget_report(events: list[Event], config: BudgetConfig) -> tuple[dict, list]:
    actions, stats = run_stream(events, config)
    rep = _header("budget-replay")
    rep["config"] = {
        "reasoning_budget": config.reasoning_budget,
        "grace": config.grace,
        "max_sequence": config.max_sequence,
    }
    rep["events"] = len(events)
    counts: dict[str, int] = {}
    for a in actions:
        counts[a.value] = counts.get(a.value, 0) + 1
    rep["actions"] = dict(sorted(counts.items()))
    rep["stats"] = stats.to_dict()
    _require(stats.reasoning_tokens <= config.reasoning_budget + config.grace, "reasoning cap")
    _require(stats.total_tokens <= config.max_sequence, "sequence cap")
    return rep, actions


# --- footprint --------------------------------------------------------------

def footprint_report(inventories: list[footprint.ParamGroupInventory], exclude_encoders: bool,
                     tokens: int, concurrency: int,
                     cache: footprint.CacheConfig = footprint.DEFAULT_CACHE) -> dict:
    rep = _header("footprint")
    rep["exclude_encoders_from_bpw"] = exclude_encoders
    rows = []
    for inv in inventories:
        fp = footprint.effective_bpw(inv, exclude_encoders)
        row = {
            "inventory": inv.name,
            "params": inv.param_count,
            "bpw": round(fp.bpw, 6),
            "bpw_whole_model": round(footprint.effective_bpw(inv).bpw, 6),
            "bpw_without_encoders": (round(footprint.effective_bpw(inv, True).bpw, 6)
                                     if any(not g.encoder for g in inv.groups) else None),
            "gigabytes": round(fp.gigabytes, 6),
        }
        if inv.name in footprint.REPORTED:
            ref_gb, ref_bpw = footprint.REPORTED[inv.name]
            row["reported_gigabytes"] = ref_gb
            row["reported_bpw"] = ref_bpw
            row["gigabytes_deviation"] = round(fp.gigabytes / ref_gb - 1, 6)
        rows.append(row)
        _require(min(g.bits for g in inv.groups) - 1e-9 <= fp.bpw
                 <= max(g.bits for g in inv.groups) + 1e-9, "bpw is a weighted mean")
    rep["inventories"] = rows
    rep["cache"] = {
        "tokens": tokens,
        "concurrency": concurrency,
        "layers_attention": cache.layers_attention,
        "layers_ssm": cache.layers_ssm,
        "bytes": footprint.cache_bytes(cache, tokens, concurrency),
    }
    return rep
