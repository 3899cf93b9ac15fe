"""Attention-cue descriptors of a composition."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .scene import COLOR_CLASSES, boundary_contact, extract_relations, palette_class

# (lo, hi) for min-max normalization before ranking
DEFAULT_CUE_NORMS = {
    "area_entropy": (0.0, math.log(50.0)),
    "centrality": (0.0, 1.0),
    "color_diversity": (0.0, float(len(COLOR_CLASSES))),
    "crowdedness": (0.0, 50.0),
    "granularity": (0.0, 50.0),
    "max_element_area": (0.0, 1.0),
    "opposition_count": (0.0, 20.0),
    "unfinished_line_count": (0.0, 10.0),
}
CUE_NAMES = tuple(sorted(DEFAULT_CUE_NORMS))


@dataclass
class CueProfile:
    centrality: float = 0.0
    max_element_area: float = 0.0
    color_histogram: dict = field(default_factory=lambda: {c: 0 for c in COLOR_CLASSES})
    opposition_count: int = 0
    granularity: int = 0
    area_entropy: float = 0.0
    crowdedness: float = 0.0
    unfinished_line_count: int = 0

    @property
    def color_diversity(self) -> int:
        return sum(1 for v in self.color_histogram.values() if v > 0)

    def to_json(self) -> dict:
        return asdict(self)


def compute_cues(c, stats) -> CueProfile:
    elems = c.elements
    if not elems:
        return CueProfile()
    h = c.height_ratio
    diag = math.hypot(1.0, h)
    # fsum is exactly rounded, so element order cannot change the result
    total = math.fsum(e.area for e in elems)
    terms = []
    for e in elems:
        x, y = e.centroid
        terms.append(e.area * (1.0 - 2.0 * math.hypot(x - 0.5, y - h / 2.0) / diag))
    centrality = min(max(math.fsum(terms) / total, 0.0), 1.0) if total > 0 else 0.0

    hist = {cls: 0 for cls in COLOR_CLASSES}
    for e in elems:
        hist[palette_class(e.color, stats.palette_tol)] += 1

    region_areas = [e.area for e in elems if e.kind == "region"]
    entropy = 0.0
    if region_areas:
        s = math.fsum(region_areas)
        entropy = -math.fsum(a / s * math.log(a / s) for a in region_areas if a > 0)
        entropy = max(entropy, 0.0)

    relations = extract_relations(c, stats)
    return CueProfile(
        centrality=centrality,
        max_element_area=max(e.area for e in elems),
        color_histogram=hist,
        opposition_count=sum(1 for r in relations if r.relkind == "color_opposition"),
        granularity=len(elems),
        area_entropy=entropy,
        crowdedness=len(elems) / c.area,
        unfinished_line_count=sum(
            1 for e in elems
            if e.kind == "line" and boundary_contact(e, h, stats.epsilon) != "both_ends"
        ),
    )


def cue_magnitudes(p: CueProfile, norms=None) -> dict:
    norms = norms or DEFAULT_CUE_NORMS
    out = {}
    for name in CUE_NAMES:
        lo, hi = norms[name]
        value = float(getattr(p, name))
        out[name] = min(max((value - lo) / (hi - lo), 0.0), 1.0) if hi > lo else 0.0
    return out


def rank_cues(p: CueProfile, norms=None) -> list:
    """Cue names by descending normalized magnitude, ties in name order."""
    mags = cue_magnitudes(p, norms)
    return sorted(CUE_NAMES, key=lambda n: (-mags[n], n))


def cue_delta(before: CueProfile, after: CueProfile) -> dict:
    """Scalar cue changes from one painting to the next."""
    return {n: float(getattr(after, n)) - float(getattr(before, n)) for n in CUE_NAMES}
