"""``omnitok`` command line.

Each subcommand prints one JSON report to stdout. Exit status is 0 on
success, 1 for bad input or usage, 2 when an internal consistency check fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import budget, evs, footprint, report, video, vision
from .errors import InvalidInputError, InvariantViolation, OmnitokError
from .manifest import parse_manifest

log = logging.getLogger("omnitok")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _resolution(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        w, h = int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("width and height must be positive")
    return w, h


def _patch_budget(text: str) -> int | str:
    if text == "default":
        return text
    try:
        value = int(text)
    except ValueError:
        value = -1
    if value not in video.FRAME_PATCH_TARGETS:
        raise argparse.ArgumentTypeError(
            f"expected one of {video.FRAME_PATCH_TARGETS} or 'default', got {text!r}"
        )
    return value


def _overhead(args) -> video.TokenOverheadModel:
    d = video.TokenOverheadModel()
    return video.TokenOverheadModel(
        per_frame=d.per_frame if args.overhead_per_frame is None else args.overhead_per_frame,
        per_image_fixed=d.per_image_fixed if args.per_image_fixed is None else args.per_image_fixed,
        per_sequence_fixed=(d.per_sequence_fixed if args.per_sequence_fixed is None
                            else args.per_sequence_fixed),
    )


def _add_overhead_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--overhead-per-frame", type=int, metavar="N")
    p.add_argument("--per-image-fixed", type=int, metavar="N")
    p.add_argument("--per-sequence-fixed", type=int, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="omnitok", description=__doc__.splitlines()[0])
    parser.add_argument("--report-dir", type=Path,
                        help="also write <command>.json/.csv/.png into this directory")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("plan-image", help="dynamic-resolution plan for one image")
    p.add_argument("--res", type=_resolution, required=True, metavar="WxH")
    p.add_argument("--min-patches", type=int, default=vision.DEFAULT_MIN_PATCHES)
    p.add_argument("--max-patches", type=int, default=vision.DEFAULT_MAX_PATCHES)
    _add_overhead_flags(p)

    p = sub.add_parser("plan-video", help="video token budget with Conv3D / EVS")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--frames", type=int, metavar="N")
    src.add_argument("--duration", type=float, metavar="SECONDS")
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--max-frames", type=int, default=256)
    p.add_argument("--res", type=_resolution, required=True, metavar="WxH")
    p.add_argument("--patch-budget", type=_patch_budget, default="default")
    p.add_argument("--conv3d", action="store_true")
    p.add_argument("--evs", type=float, metavar="Q")
    p.add_argument("--stage", choices=["16k", "48k", "256k"], default="256k")
    _add_overhead_flags(p)

    p = sub.add_parser("plan-audio", help="audio clip segmentation and token count")
    p.add_argument("--duration", type=float, required=True, metavar="SECONDS")
    p.add_argument("--stage", choices=["16k", "48k", "256k"], default="256k")

    p = sub.add_parser("sequence", help="interleave a manifest and check its context fit")
    p.add_argument("manifest", type=Path)
    p.add_argument("--stage", choices=["16k", "48k", "256k"],
                   help="override the manifest's stage")

    p = sub.add_parser("pack", help="pack whitespace-separated lengths from stdin or a file")
    p.add_argument("lengths", nargs="?", type=Path)
    p.add_argument("--capacity", type=int, required=True)
    p.add_argument("--buffer", type=int, default=512)

    p = sub.add_parser("evs-prune", help="EVS retention mask for a tensor file or synthetic tensor")
    p.add_argument("tensor", nargs="?", type=Path, help="EVST tensor file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shape", default="8,16,8", metavar="T,S,D",
                   help="synthetic tensor shape when no file is given")
    p.add_argument("--evs", type=float, default=0.5, metavar="Q")
    p.add_argument("--mask-out", type=Path, help="write the EVSM mask here")

    p = sub.add_parser("budget-replay", help="replay a token-event trace through the budget controller")
    p.add_argument("trace", type=Path)
    d = budget.BudgetConfig()
    p.add_argument("--reasoning-budget", type=int, default=d.reasoning_budget)
    p.add_argument("--grace", type=int, default=d.grace)
    p.add_argument("--max-sequence", type=int, default=d.max_sequence)

    p = sub.add_parser("footprint", help="mixed-precision weight footprint and cache size")
    p.add_argument("inventory", nargs="*", type=Path, help="YAML/JSON inventory files")
    p.add_argument("--preset", choices=[*footprint.PRESETS, "all"],
                   help="built-in estimated inventory (default: all, when no file is given)")
    p.add_argument("--exclude-encoders", action="store_true",
                   help="leave encoder groups out of the bpw average")
    p.add_argument("--tokens", type=int, default=0, help="cached tokens per sequence")
    p.add_argument("--concurrency", type=int, default=1)
    return parser


def _run(args) -> tuple[dict, object]:
    cmd = args.command
    if cmd == "plan-image":
        w, h = args.res
        rep = report.image_report(w, h, vision.PatchBudget(args.min_patches, args.max_patches),
                                  _overhead(args))
        return rep, None

    if cmd == "plan-video":
        w, h = args.res
        sampling = None
        frames = args.frames
        if frames is None:
            sampling = video.sample_frames(args.duration, args.fps, args.max_frames)
            frames = sampling.frames
        patches = 1024 if args.patch_budget == "default" else args.patch_budget
        rep = report.video_report(frames, w, h, patches, args.conv3d, args.evs,
                                  _overhead(args), args.stage, sampling)
        return rep, None

    if cmd == "plan-audio":
        from .audio import segment_clips
        return report.audio_report(args.duration, args.stage), segment_clips(args.duration)

    if cmd == "sequence":
        manifest = parse_manifest(args.manifest)
        if args.stage:
            from dataclasses import replace
            manifest = replace(manifest, pipeline=replace(manifest.pipeline, stage=args.stage))
        return report.sequence_report(manifest), None

    if cmd == "pack":
        text = args.lengths.read_text() if args.lengths else sys.stdin.read()
        try:
            lengths = [int(tok) for tok in text.split()]
        except ValueError as exc:
            raise InvalidInputError(f"lengths must be integers: {exc}") from None
        return report.pack_report(lengths, args.capacity, args.buffer), None

    if cmd == "evs-prune":
        if args.tensor:
            tensor = evs.read_tensor(args.tensor)
            source = args.tensor.name
        else:
            try:
                t, s, d = (int(x) for x in args.shape.split(","))
            except ValueError:
                raise InvalidInputError(f"--shape expects T,S,D, got {args.shape!r}") from None
            tensor = evs.synth_feature_tensor(args.seed, t, s, d)
            source = f"synthetic seed={args.seed} shape={t},{s},{d}"
        rep, mask = report.evs_report(tensor, args.evs, source)
        if args.mask_out:
            evs.write_mask(args.mask_out, mask)
        return rep, mask

    if cmd == "budget-replay":
        cfg = budget.BudgetConfig(args.reasoning_budget, args.grace, args.max_sequence)
        try:
            events = budget.read_trace(args.trace)
        except OSError as exc:
            raise InvalidInputError(f"cannot read trace {args.trace}: {exc.strerror}") from None
        return report.budget_report(events, cfg)

    if cmd == "footprint":
        inventories = [footprint.load_inventory(p) for p in args.inventory]
        preset = args.preset or (None if inventories else "all")
        if preset == "all":
            inventories += [footprint.preset_inventory(r) for r in footprint.PRESETS]
        elif preset:
            inventories.append(footprint.preset_inventory(preset))
        return report.footprint_report(inventories, args.exclude_encoders,
                                       args.tokens, args.concurrency), None

    raise UsageError(f"unknown command {cmd!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rep, extra = _run(args)
    except InvariantViolation as exc:
        log.error("internal invariant violated: %s", exc)
        return EXIT_INTERNAL
    except (OmnitokError, FileNotFoundError) as exc:
        sys.stderr.write(f"omnitok {args.command}: {exc}\n")
        return EXIT_INPUT
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_INPUT

    sys.stdout.write(report.dumps(rep))
    if args.report_dir:
        from .figures import write_artifacts
        for path in write_artifacts(rep, args.report_dir, extra):
            log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
