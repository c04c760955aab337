"""Prints one pass/fail line per acceptance criterion after the run."""

from __future__ import annotations

CRITERIA = {
    "C1": "image anchor: 512x512 -> 1024 patches / 256 tokens, bounds [1024, 13312]",
    "C2": "audio anchors: 30 s -> 375, rate in [12.4, 12.6], 5 h fits / 6 h overflows",
    "C3": "video totals within 5% of 141k / 75k / 42k, exact Conv3D and EVS reductions",
    "C4": "EVS mask equals full-sort oracle on 1000 random tensors",
    "C5": "EVS invariants: anchor kept, retained count over q grid, scale invariance",
    "C6": "packer: no overflow, conservation, within 10 pp of FFD on 10000 instances",
    "C7": "budget controller caps hold on 10000 fuzz streams, defaults (13000, 1024, 16384)",
    "C8": "footprint: uniform 16 bit -> 16.0, presets within 10% of reported GB",
    "C9": "CLI output byte-identical across runs and equal to goldens",
}

_results: dict[str, dict] = {}


def pytest_runtest_logreport(report):
    cid = dict(report.user_properties).get("criterion")
    if cid is None:
        return
    entry = _results.setdefault(cid, {"ok": True, "seconds": 0.0, "notes": []})
    if report.when == "call":
        entry["seconds"] += report.duration
        entry["notes"] += [v for k, v in report.user_properties if k == "note"]
    if report.failed:
        entry["ok"] = False


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            item.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid, text in CRITERIA.items():
        r = _results.get(cid)
        status = "NOT RUN" if r is None else ("PASS" if r["ok"] else "FAIL")
        secs = "" if r is None else f" ({r['seconds']:.3f} s)"
        tr.write_line(f"{cid} {status:<7} {text}{secs}")
        for note in (r or {}).get("notes", []):
            tr.write_line(f"     {note}")
