"""CLI invocations covered by the golden-file suite."""

from pathlib import Path

DATA = Path(__file__).parent / "data"

# name -> (argv, stdin)
CASES = {
    "plan_image_512": (["plan-image", "--res", "512x512"], None),
    "plan_image_wide": (["plan-image", "--res", "4000x1000", "--per-image-fixed", "0"], None),
    "plan_video_512_conv3d_evs": (
        ["plan-video", "--frames", "512", "--res", "512x512", "--conv3d", "--evs", "0.5"], None),
    "plan_video_sampled_1080p": (
        ["plan-video", "--duration", "600", "--fps", "30", "--max-frames", "64",
         "--res", "1920x1080", "--patch-budget", "512", "--conv3d", "--stage", "16k"], None),
    "plan_audio_30": (["plan-audio", "--duration", "30"], None),
    "plan_audio_6h": (["plan-audio", "--duration", "21600"], None),
    "sequence_av": (["sequence", str(DATA / "av_manifest.yaml")], None),
    "sequence_image_16k": (["sequence", str(DATA / "image_only.yaml"), "--stage", "16k"], None),
    "pack_example": (["pack", "--capacity", "16"], "10 9 5 4 2\n"),
    "pack_file_buffered": (["pack", str(DATA / "lengths.txt"), "--capacity", "16", "--buffer", "2"], None),
    "evs_file": (["evs-prune", str(DATA / "features.evst"), "--evs", "0.7"], None),
    "evs_synthetic": (["evs-prune", "--seed", "7", "--shape", "16,64,16", "--evs", "0.9"], None),
    "budget_replay": (["budget-replay", str(DATA / "reasoning_trace.txt"),
                       "--reasoning-budget", "5", "--grace", "2", "--max-sequence", "100"], None),
    "footprint_presets": (["footprint"], None),
    "footprint_file": (["footprint", str(DATA / "inventory.yaml"), "--exclude-encoders",
                        "--tokens", "100000", "--concurrency", "4"], None),
}


def normalize(text: str) -> str:
    # reports echo file paths; keep goldens independent of the checkout location
    return text.replace(str(DATA), "<data>")
