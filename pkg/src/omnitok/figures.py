"""Report artifacts: a JSON copy, a CSV table and a PNG figure per command."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .report import dumps  # noqa: E402

golden_mean = (np.sqrt(5) - 1.0) / 2.0
fig_width = 6.4
params = {
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": [fig_width, fig_width * golden_mean],
    "figure.dpi": 100,
    "lines.linewidth": 1.2,
}
colors = {"video": "#2b8cbe", "audio": "#e6550d", "image": "#31a354", "text": "#756bb1"}


def _table(report: dict, extra) -> tuple[list[str], list[list]]:
    cmd = report["command"]
    if cmd == "plan-image":
        p = report["plan"]
        return (["source_w", "source_h", "target_w", "target_h", "grid_w", "grid_h",
                 "vit_tokens", "llm_tokens", "total_tokens"],
                [[*p["source"], *p["target"], *p["grid"], p["vit_tokens"], p["llm_tokens"],
                  report["total_tokens"]]])
    if cmd == "plan-video":
        return (["variant", "total_tokens", "reduction_vs_baseline"],
                [[k, v["total_tokens"], v["reduction_vs_baseline"]]
                 for k, v in report["variants"].items()])
    if cmd == "plan-audio":
        return (["clip", "start_s", "length_s", "mel_frames", "tokens"],
                [[i, c.start, c.length, c.mel_frames, c.tokens] for i, c in enumerate(extra.clips)])
    if cmd == "sequence":
        return (["position", "id", "kind", "window", "tokens"],
                [[i, s["id"], s["kind"], s["window"], s["tokens"]]
                 for i, s in enumerate(report["layout"]["spans"])])
    if cmd == "pack":
        return (["bin", "fill", "items", "lengths"],
                [[i, b["fill"], len(b["ids"]), " ".join(map(str, b["lengths"]))]
                 for i, b in enumerate(report["bins"])])
    if cmd == "evs-prune":
        s = report["shape"]["spatial"]
        return (["tubelet", "kept", "dropped"],
                [[t, k, s - k] for t, k in enumerate(report["kept_per_tubelet"])])
    if cmd == "budget-replay":
        return (["metric", "value"], [[k, v] for k, v in report["stats"].items()])
    if cmd == "footprint":
        keys = list(report["inventories"][0]) if report["inventories"] else ["inventory"]
        for row in report["inventories"]:
            keys += [k for k in row if k not in keys]
        return keys, [[row.get(k, "") for k in keys] for row in report["inventories"]]
    raise ValueError(f"no table layout for {cmd!r}")


def _plot(report: dict, extra, ax) -> None:
    cmd = report["command"]
    if cmd == "plan-image":
        p = report["plan"]
        gw, gh = p["grid"]
        ax.add_patch(plt.Rectangle((0, 0), gw, gh, fill=False, hatch="..", lw=1))
        ax.set_xlim(0, max(gw, gh) * 1.05)
        ax.set_ylim(0, max(gw, gh) * 1.05)
        ax.set_aspect("equal")
        ax.set_xlabel("patch columns")
        ax.set_ylabel("patch rows")
        ax.set_title(f"grid {gw}x{gh}: {p['vit_tokens']} patches, {p['llm_tokens']} LLM tokens")
    elif cmd == "plan-video":
        names = list(report["variants"])
        vals = [report["variants"][n]["total_tokens"] for n in names]
        ax.bar(names, vals, color="#2b8cbe")
        for x, v in enumerate(vals):
            ax.text(x, v, f"{v:,}", ha="center", va="bottom")
        ax.set_ylabel("LLM input tokens")
        ax.set_title(f"{report['budget']['frames']} frames")
    elif cmd == "plan-audio":
        toks = [c.tokens for c in extra.clips]
        ax.bar(range(len(toks)), toks, color=colors["audio"], width=1.0)
        ax.set_xlabel("clip")
        ax.set_ylabel("tokens")
        ax.set_title(f"{report['total_tokens']:,} tokens over {report['clips']} clips")
    elif cmd == "sequence":
        spans = report["layout"]["spans"]
        windows = sorted({s["window"] for s in spans})
        bottom = dict.fromkeys(windows, 0)
        for kind, color in colors.items():
            vals = [sum(s["tokens"] for s in spans if s["window"] == w and s["kind"] == kind)
                    for w in windows]
            if any(vals):
                ax.bar([str(w) for w in windows], vals, bottom=[bottom[w] for w in windows],
                       color=color, label=kind)
                for w, v in zip(windows, vals):
                    bottom[w] += v
        ax.set_xlabel("window (-1 = untimed)")
        ax.set_ylabel("tokens")
        if spans:
            ax.legend()
    elif cmd == "pack":
        fills = [b["fill"] for b in report["bins"]]
        ax.bar(range(len(fills)), fills, color="#7bccc4", width=1.0)
        ax.axhline(report["capacity"], color="k", lw=0.8, ls="--")
        ax.set_xlabel("bin")
        ax.set_ylabel("tokens")
        ax.set_title(f"utilization {report['utilization']:.4f}")
    elif cmd == "evs-prune":
        ax.imshow(extra.keep, aspect="auto", cmap="Greys", interpolation="nearest")
        ax.set_xlabel("spatial position")
        ax.set_ylabel("tubelet")
        ax.set_title(f"q={report['q']}: kept {report['retained']} tokens")
    elif cmd == "budget-replay":
        passed = np.cumsum([a.value in ("Pass", "InjectThinkClose") for a in extra])
        ax.plot(passed, color="#08589e")
        cfg = report["config"]
        ax.axhline(cfg["max_sequence"], color="k", lw=0.8, ls="--")
        ax.set_xlabel("event")
        ax.set_ylabel("emitted tokens")
    elif cmd == "footprint":
        rows = report["inventories"]
        x = np.arange(len(rows))
        ax.bar(x - 0.2, [r["gigabytes"] for r in rows], 0.4, label="computed")
        if any("reported_gigabytes" in r for r in rows):
            ax.bar(x + 0.2, [r.get("reported_gigabytes", 0) for r in rows], 0.4, label="reported")
        ax.set_xticks(x, [r["inventory"] for r in rows])
        ax.set_ylabel("GB")
        ax.legend()


def write_artifacts(report: dict, out_dir: str | Path, extra=None) -> list[Path]:
    """Write ``<command>.json``, ``.csv`` and ``.png`` under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = out / report["command"]

    json_path = stem.with_suffix(".json")
    json_path.write_text(dumps(report))

    csv_path = stem.with_suffix(".csv")
    header, rows = _table(report, extra)
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)

    png_path = stem.with_suffix(".png")
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        _plot(report, extra, ax)
        fig.tight_layout()
        fig.savefig(png_path, metadata={"Software": None})
        plt.close(fig)
    return [json_path, csv_path, png_path]
