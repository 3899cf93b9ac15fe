"""Seeded generators for neo-plastic and off-style compositions, and a perturbation operator.

Randomness comes from :class:`Stream`, a PCG64 bit generator seeded through
numpy's ``SeedSequence`` with a per-purpose spawn key. Only the raw 64-bit
outputs are consumed; floats and integers are derived here, so the draws do
not depend on numpy's distribution code, which carries no cross-version
stability promise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .canonical import quantize
from .errors import InapplicableOp
from .rules import AtomicChange, canonical_changes
from .scene import (
    ANCHORS, PALETTE, Color, Composition, Line, Region, corpus_feature_stats, discretize,
    palette_class, validate_composition,
)

_LAYOUT, _THICKNESS, _CELL, _DEFECT, _PERTURB = range(5)
_MASK64 = (1 << 64) - 1


class Stream:
    """Deterministic uniform draws keyed by ``(seed, *key)``."""

    def __init__(self, seed: int, *key: int):
        ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=tuple(key))
        self._bits = np.random.PCG64(ss)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        raw = int(self._bits.random_raw())
        return lo + (hi - lo) * ((raw >> 11) * 2.0 ** -53)

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi]."""
        span = hi - lo + 1
        return lo + min(int(self.uniform() * span), span - 1)

    def choice(self, items):
        return items[self.integer(0, len(items) - 1)]

    def weighted(self, items, weights):
        u = self.uniform() * sum(weights)
        acc = 0.0
        for item, w in zip(items, weights):
            acc += w
            if u < acc:
                return item
        return items[-1]


def _default_weights():
    return {"red": 0.3, "blue": 0.25, "yellow": 0.25, "black": 0.15, "gray": 0.05}


@dataclass
class GenParams:
    seed: int = 0
    n_vlines: tuple = (2, 4)
    n_hlines: tuple = (2, 4)
    thickness_range: tuple = (0.01, 0.03)
    color_weights: dict = field(default_factory=_default_weights)
    fill_probability: float = 0.5
    height_ratio: float = 1.0

    def __post_init__(self):
        for name in ("n_vlines", "n_hlines", "thickness_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} range is empty")
        if min(self.n_vlines[0], self.n_hlines[0]) < 0:
            raise ValueError("line counts must be non-negative")
        if self.thickness_range[0] <= 0:
            raise ValueError("thickness must be positive")
        if not 0.0 <= self.fill_probability <= 1.0:
            raise ValueError("fill_probability must lie in [0, 1]")
        if not self.height_ratio > 0:
            raise ValueError("height_ratio must be positive")
        unknown = set(self.color_weights) - set(PALETTE)
        if unknown:
            raise ValueError(f"unknown palette classes {sorted(unknown)}")
        if any(w < 0 for w in self.color_weights.values()):
            raise ValueError("color weights must be non-negative")
        total = sum(self.color_weights.values())
        if total <= 0:
            raise ValueError("color weights must not all be zero")
        self.color_weights = {k: v / total for k, v in sorted(self.color_weights.items())}

    def with_seed(self, seed: int) -> "GenParams":
        return GenParams(seed, self.n_vlines, self.n_hlines, self.thickness_range,
                         dict(self.color_weights), self.fill_probability, self.height_ratio)


def _positions(stream, k, extent, margin=0.08, min_gap=0.06):
    lo, hi = margin * extent, (1.0 - margin) * extent
    for _ in range(64):
        xs = sorted(round(stream.uniform(lo, hi), 4) for _ in range(k))
        bounds = [0.0] + xs + [extent]
        if all(b - a >= min_gap * extent for a, b in zip(bounds, bounds[1:])):
            return xs
    return [round(extent * (i + 1) / (k + 1), 4) for i in range(k)]


def gen_neoplastic(p: GenParams) -> Composition:
    """Black full-span grid lines over a grid of white or palette-filled cells."""
    h = p.height_ratio
    layout = Stream(p.seed, _LAYOUT)
    kv = layout.integer(*p.n_vlines)
    kh = layout.integer(*p.n_hlines)
    xs = _positions(layout, kv, 1.0)
    ys = _positions(layout, kh, h)

    names = list(p.color_weights)
    weights = [p.color_weights[n] for n in names]
    xb, yb = [0.0] + xs + [1.0], [0.0] + ys + [h]
    regions = []
    for r in range(len(yb) - 1):
        for col in range(len(xb) - 1):
            cell = Stream(p.seed, _CELL, len(regions))
            if cell.uniform() < p.fill_probability:
                name = cell.weighted(names, weights)
            else:
                name = "white"
            regions.append(Region((xb[col], yb[r], xb[col + 1], yb[r + 1]), Color.of(name)))
    if len(regions) == 1 and regions[0].color.palette == "white":
        regions = []  # the background is implicit

    lines = []
    tlo, thi = p.thickness_range
    for n, x in enumerate(xs):
        t = round(Stream(p.seed, _THICKNESS, n).uniform(tlo, thi), 4)
        lines.append(Line(90.0, x, (0.0, h), t, Color.of("black")))
    for n, y in enumerate(ys):
        t = round(Stream(p.seed, _THICKNESS, len(xs) + n).uniform(tlo, thi), 4)
        lines.append(Line(0.0, y, (0.0, 1.0), t, Color.of("black")))
    return Composition(f"neo-{p.seed}", 0, h, tuple(regions + lines), "in_style")


def _diagonal_line(stream, h, thickness_range):
    u = stream.uniform(0.0, 140.0)
    theta = quantize(10.0 + u if u < 70.0 else 100.0 + (u - 70.0))
    cx = stream.uniform(0.3, 0.7)
    cy = stream.uniform(0.3 * h, 0.7 * h)
    half = stream.uniform(0.15, 0.35) / 2.0
    t = round(stream.uniform(*thickness_range), 4)
    rad = np.radians(theta)
    if theta <= 45.0 or theta >= 135.0:
        hx = half * abs(np.cos(rad))
        span = (quantize(cx - hx), quantize(cx + hx))
        axis = quantize(cy - cx * np.tan(rad))
    else:
        hy = half * abs(np.sin(rad))
        span = (quantize(cy - hy), quantize(cy + hy))
        axis = quantize(cx - cy / np.tan(rad))
    return Line(theta, axis, span, t, Color.of("black"))


def offpalette_rgb(stream, tol=32):
    """A random RGB whose Chebyshev distance to every palette anchor exceeds ``tol``."""
    while True:
        rgb = tuple(stream.integer(0, 255) for _ in range(3))
        if min(max(abs(a - b) for a, b in zip(rgb, anchor)) for anchor in ANCHORS.values()) > tol:
            return rgb


def gen_offstyle(p: GenParams, defect: str, tol: int = 32) -> Composition:
    """A neo-plastic layout with an injected defect.

    ``diagonal_line`` adds one unfinished diagonal stroke; ``offpalette_color``
    repaints every non-white region (or one region, if all are white) in
    off-palette colors; ``both`` does both.
    """
    if defect not in ("diagonal_line", "offpalette_color", "both"):
        raise ValueError(f"unknown defect {defect!r}")
    base = gen_neoplastic(p)
    stream = Stream(p.seed, _DEFECT)
    elements = list(base.elements)
    if defect in ("offpalette_color", "both"):
        idx = [i for i, e in enumerate(elements) if e.kind == "region"]
        targets = [i for i in idx if palette_class(elements[i].color, tol) != "white"]
        if not targets and idx:
            targets = [stream.choice(idx)]
        for i in targets:
            elements[i] = Region(elements[i].rect, Color(rgb=offpalette_rgb(stream, tol)))
        if not idx:
            # nothing to recolor: add one small off-palette patch
            h = p.height_ratio
            x, y = stream.uniform(0.2, 0.6), stream.uniform(0.2 * h, 0.6 * h)
            rect = (round(x, 4), round(y, 4), round(x + 0.2, 4), round(y + 0.2 * h, 4))
            elements.append(Region(rect, Color(rgb=offpalette_rgb(stream, tol))))
    if defect in ("diagonal_line", "both"):
        elements.append(_diagonal_line(stream, p.height_ratio, p.thickness_range))
    return Composition(f"off-{defect}-{p.seed}", 0, p.height_ratio, tuple(elements), "off_style")


PERTURB_OPS = ("add_line", "remove_line", "recolor_region", "move_line", "add_region",
               "remove_region")


@dataclass(frozen=True)
class PerturbOp:
    """One edit. Element references are indices into the source composition.

    Payload keys: ``index`` for remove/recolor/move; ``color`` (a :class:`Color`)
    for recolor and add ops; ``orientation_deg``, ``axis_position``, ``span``,
    ``thickness`` for add_line; ``axis_position`` and/or ``span`` for move_line;
    ``rect`` for add_region. Missing optional keys are drawn from the seed.
    """

    op: str
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.op not in PERTURB_OPS:
            raise ValueError(f"unknown perturbation {self.op!r}")
        if self.op in ("remove_line", "recolor_region", "move_line", "remove_region"):
            if "index" not in self.payload:
                raise ValueError(f"{self.op} needs an index")


def _random_palette_color(stream, avoid=None):
    choices = [n for n in PALETTE if n != avoid]
    return Color.of(stream.choice(choices))


def _apply(op, k, working, added, stream, h):
    pl = op.payload
    if "index" in pl:
        idx = pl["index"]
        if idx not in working:
            raise InapplicableOp(k)
        e = working[idx]
        want = "line" if op.op.endswith("line") else "region"
        if e.kind != want:
            raise InapplicableOp(k, f"element {idx} is a {e.kind}, not a {want}")
    if op.op in ("remove_line", "remove_region"):
        del working[idx]
    elif op.op == "recolor_region":
        color = pl.get("color") or _random_palette_color(stream, palette_class(e.color))
        working[idx] = Region(e.rect, color)
    elif op.op == "move_line":
        axis = quantize(pl.get("axis_position", e.axis_position))
        if "span" in pl:
            span = tuple(quantize(v) for v in pl["span"])
        elif "axis_position" in pl:
            span = e.span
        else:
            s, t = e.span
            keep = stream.uniform(0.6, 0.95) * (t - s)
            span = (s, quantize(s + keep)) if stream.uniform() < 0.5 else (quantize(t - keep), t)
        working[idx] = Line(e.orientation_deg, axis, span, e.thickness, e.color)
    elif op.op == "add_line":
        deg = quantize(pl.get("orientation_deg", stream.choice([0.0, 90.0])))
        extent = 1.0 if deg <= 45.0 or deg >= 135.0 else h
        cross = h if extent == 1.0 else 1.0
        axis = quantize(pl.get("axis_position", stream.uniform(0.1, 0.9) * cross))
        span = tuple(quantize(v) for v in pl.get("span", (0.0, extent)))
        thickness = quantize(pl.get("thickness", round(stream.uniform(0.01, 0.03), 4)))
        added.append(Line(deg, axis, span, thickness, pl.get("color") or Color.of("black")))
    elif op.op == "add_region":
        if "rect" in pl:
            rect = tuple(quantize(v) for v in pl["rect"])
        else:
            w, ht = stream.uniform(0.05, 0.2), stream.uniform(0.05, 0.2) * h
            x, y = stream.uniform(0.0, 1.0 - w), stream.uniform(0.0, h - ht)
            rect = tuple(quantize(round(v, 4)) for v in (x, y, x + w, y + ht))
        added.append(Region(rect, pl.get("color") or _random_palette_color(stream)))


def perturb(c: Composition, ops, seed: int = 0, stats=None):
    """Apply ``ops`` in order to ``c``.

    Returns the successor composition (ordinal + 1) and its ground-truth atomic
    changes in canonical order. Signatures use ``stats``, defaulting to the
    feature statistics of ``c`` alone.
    """
    stats = stats or corpus_feature_stats([c])
    stream = Stream(seed, _PERTURB)
    working = dict(enumerate(c.elements))
    added = []
    for k, op in enumerate(ops):
        _apply(op, k, working, added, stream, c.height_ratio)
    new = Composition(f"{c.id}+{len(ops)}", c.ordinal + 1, c.height_ratio,
                      tuple(working[i] for i in sorted(working)) + tuple(added), c.label)
    problems = validate_composition(new)
    if problems:
        raise ValueError(f"perturbation produced an invalid composition: {problems[0]}")

    h = c.height_ratio
    changes = []
    for i, e in enumerate(c.elements):
        before = discretize(e, stats, h)
        if i not in working:
            changes.append(AtomicChange("eliminate", before, None, before.position_cell))
        else:
            after = discretize(working[i], stats, h)
            if after != before:
                changes.append(AtomicChange("modify", before, after, before.position_cell))
    for e in added:
        after = discretize(e, stats, h)
        changes.append(AtomicChange("add", None, after, after.position_cell))
    return new, canonical_changes(changes)


def random_ops(c: Composition, seed: int, n_ops: int = 3):
    """A random applicable op list that keeps element correspondence unambiguous.

    Added lines stay clear of existing parallel lines, added regions are small
    patches nested inside an existing region, and moved lines are shortened
    by at most 40%, so every geometric match survives an IoU threshold of 0.5.
    No element is referenced twice.
    """
    stream = Stream(seed, _PERTURB, 1)
    h = c.height_ratio
    free = list(range(len(c.elements)))
    ops = []
    for _ in range(n_ops):
        lines = [i for i in free if c.elements[i].kind == "line"
                 and c.elements[i].orientation_class in ("H", "V")]
        regions = [i for i in free if c.elements[i].kind == "region"]
        kinds = ["add_line", "add_region"] if regions else ["add_line"]
        if lines:
            kinds += ["remove_line", "move_line"]
        if regions:
            kinds += ["recolor_region", "remove_region"]
        kind = stream.choice(kinds)
        if kind == "add_line":
            deg = stream.choice([0.0, 90.0])
            cross = h if deg == 0.0 else 1.0
            taken = [e.axis_position for e in c.elements
                     if e.kind == "line" and e.orientation_deg == deg]
            for _ in range(32):
                axis = round(stream.uniform(0.1, 0.9) * cross, 4)
                if all(abs(axis - a) > 0.08 for a in taken):
                    break
            extent = 1.0 if deg == 0.0 else h
            span = (0.0, extent) if stream.uniform() < 0.5 else (
                0.0, round(extent * stream.uniform(0.3, 0.8), 4))
            ops.append(PerturbOp("add_line", {
                "orientation_deg": deg, "axis_position": axis, "span": span,
                "thickness": round(stream.uniform(0.01, 0.03), 4),
                "color": Color.of("black")}))
        elif kind == "add_region":
            x0, y0, x1, y1 = c.elements[stream.choice(regions)].rect
            fw, fh = stream.uniform(0.2, 0.5), stream.uniform(0.2, 0.5)
            w, ht = (x1 - x0) * fw, (y1 - y0) * fh
            x = x0 + stream.uniform(0.0, 1.0) * (x1 - x0 - w)
            y = y0 + stream.uniform(0.0, 1.0) * (y1 - y0 - ht)
            rect = tuple(round(v, 4) for v in (x, y, x + w, y + ht))
            if not (rect[0] < rect[2] and rect[1] < rect[3]):
                continue
            ops.append(PerturbOp("add_region", {"rect": rect,
                                                "color": _random_palette_color(stream)}))
        else:
            pool = lines if kind in ("remove_line", "move_line") else regions
            idx = stream.choice(pool)
            free.remove(idx)
            payload = {"index": idx}
            if kind == "recolor_region":
                current = palette_class(c.elements[idx].color)
                payload["color"] = _random_palette_color(stream, current)
            ops.append(PerturbOp(kind, payload))
    return ops
