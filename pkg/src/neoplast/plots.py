"""Report figures. Every function takes a pipeline report dict and writes PNG files."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .cues import CUE_NAMES, DEFAULT_CUE_NORMS  # noqa: E402

STYLE = {
    "font.size": 8,
    "axes.titlesize": 9,
    "axes.labelsize": 8,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}
# PNG text chunks otherwise carry the matplotlib version
_METADATA = {"Software": None}


def _save(fig, path):
    fig.savefig(path, metadata=_METADATA)
    plt.close(fig)
    return path


def cue_heatmap(report, path):
    norms = {k: tuple(v) for k, v in report["config"].get("cue_norms", {}).items()}
    norms = {**DEFAULT_CUE_NORMS, **norms}
    rows = []
    for entry in report["cues"]:
        vals = []
        for name in CUE_NAMES:
            lo, hi = norms[name]
            raw = entry["cues"].get(name)
            if raw is None:  # color_diversity is derived
                raw = sum(1 for v in entry["cues"]["color_histogram"].values() if v > 0)
            vals.append(min(max((raw - lo) / (hi - lo), 0.0), 1.0))
        rows.append(vals)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 0.25 * max(len(rows), 4) + 1))
        data = np.array(rows) if rows else np.zeros((0, len(CUE_NAMES)))
        im = ax.imshow(data, aspect="auto", cmap="viridis", vmin=0, vmax=1)
        ax.set_xticks(range(len(CUE_NAMES)))
        ax.set_xticklabels(CUE_NAMES, rotation=40, ha="right")
        ax.set_ylabel("painting ordinal")
        ax.set_title("normalized cue magnitudes")
        fig.colorbar(im, ax=ax, fraction=0.04)
        return _save(fig, path)


def step1_novelty(report, path):
    step1 = report["step1"]
    t = [e["ordinal"] for e in step1]
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 4), sharex=True)
        ax1.plot(t, [e["nearest_similarity"] for e in step1], marker="o", label="nearest")
        ax1.plot(t, [e["pool_similarity"] for e in step1], marker="s", label="pooled")
        ax1.set_ylim(-0.02, 1.02)
        ax1.set_ylabel("similarity")
        ax1.legend(frameon=False)
        ax2.bar(t, [len(e["new_concepts"]) for e in step1], label="new concepts")
        ax2.plot(t, [len(e["dropped_cooccurrences"]) for e in step1], color="C3",
                 marker=".", label="dropped co-occurrences")
        ax2.set_xlabel("painting ordinal")
        ax2.legend(frameon=False)
        return _save(fig, path)


def rule_flexibility(report, path):
    comps = report["step3"].get("components", [])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 2.5))
        ax.plot([c["t_curr"] for c in comps], [c["flexibility"] for c in comps], marker="o")
        ax.set_ylim(-0.02, 1.02)
        ax.set_xlabel("rule (ordinal of later painting)")
        ax.set_ylabel("flexibility")
        return _save(fig, path)


def invariant_supports(report, path):
    step3 = report["step3"]
    labels = [s["predicate"] for s in step3["style_invariants"]]
    values = [s["support"] for s in step3["style_invariants"]]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 0.3 * max(len(labels), 3) + 0.8))
        ax.barh(range(len(labels)), values, color="#1f3a93")
        ax.set_yticks(range(len(labels)))
        ax.set_yticklabels(labels)
        ax.invert_yaxis()
        ax.axvline(step3["theta"], color="0.4", ls="--", lw=0.8)
        ax.set_xlim(0, 1.02)
        ax.set_xlabel("support")
        return _save(fig, path)


def attribution_scores(report, path):
    att = report["attribution"]
    threshold = report["config"]["verdict_threshold"]
    groups = {}
    for r in att["reports"]:
        groups.setdefault(r["label"] or "unknown", []).append(r["score"])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4, 3))
        for n, (label, scores) in enumerate(sorted(groups.items())):
            jitter = np.linspace(-0.15, 0.15, len(scores)) if len(scores) > 1 else [0.0]
            ax.scatter(np.full(len(scores), n) + jitter, scores, s=12, label=label)
        ax.axhline(threshold, color="0.4", ls="--", lw=0.8)
        ax.set_xticks(range(len(groups)))
        ax.set_xticklabels(sorted(groups))
        ax.set_ylim(-0.02, 1.05)
        ax.set_ylabel("attribution score")
        return _save(fig, path)


def write_figures(report, outdir) -> list:
    """Render every figure the report supports into ``outdir``; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = [
        cue_heatmap(report, outdir / "cues.png"),
        step1_novelty(report, outdir / "step1_novelty.png"),
        invariant_supports(report, outdir / "style_invariants.png"),
    ]
    if report["step3"].get("components"):
        paths.append(rule_flexibility(report, outdir / "flexibility.png"))
    if report.get("attribution") and report["attribution"]["reports"]:
        paths.append(attribution_scores(report, outdir / "attribution.png"))
    return paths
