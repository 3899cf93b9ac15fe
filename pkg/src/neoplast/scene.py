"""Scene model: compositions, palette classification, concept signatures and relations.

Coordinates are unit-normalized: the canvas spans ``[0, 1] x [0, height_ratio]``
with y growing downwards (the SVG convention).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import OutsideCanvas

PALETTE = ("black", "white", "gray", "red", "blue", "yellow")
OTHER = "OTHER"
COLOR_CLASSES = PALETTE + (OTHER,)

ANCHORS = {
    "black": (0, 0, 0),
    "white": (255, 255, 255),
    "gray": (128, 128, 128),
    "red": (230, 0, 0),
    "blue": (0, 0, 200),
    "yellow": (255, 220, 0),
}

# unordered pairs of color classes that read as opposing
OPPOSING_PAIRS = frozenset(
    frozenset(p)
    for p in [("black", "white"), ("red", "blue"), ("red", "yellow"), ("blue", "yellow")]
)

LABELS = ("in_style", "off_style", "unknown")
ORIENTATION_CLASSES = ("H", "V", "D")
SIZE_CLASSES = ("small", "medium", "large")
CONTACTS = ("both_ends", "one_end", "interior")
RELATION_KINDS = ("adjacent", "separated_by_line", "color_opposition", "aligned", "contains")

ORIENTATION_TOL_DEG = 5.0
FALLBACK_TERCILES = (0.02, 0.15)
DEFAULT_EPSILON = 0.01
DEFAULT_PALETTE_TOL = 32
_GEOM_TOL = 1e-9


@dataclass(frozen=True)
class Color:
    """Either a named palette class or a raw RGB triple."""

    palette: Optional[str] = None
    rgb: Optional[tuple] = None

    def __post_init__(self):
        if (self.palette is None) == (self.rgb is None):
            raise ValueError("exactly one of palette or rgb must be set")
        if self.palette is not None and self.palette not in PALETTE:
            raise ValueError(f"unknown palette class {self.palette!r}")
        if self.rgb is not None:
            object.__setattr__(self, "rgb", tuple(int(v) for v in self.rgb))
            if len(self.rgb) != 3:
                raise ValueError("rgb needs three channels")

    @classmethod
    def of(cls, name: str) -> "Color":
        return cls(palette=name)

    def as_rgb(self) -> tuple:
        return ANCHORS[self.palette] if self.palette is not None else self.rgb


def _orientation_class(deg: float) -> str:
    if deg <= ORIENTATION_TOL_DEG or deg >= 180.0 - ORIENTATION_TOL_DEG:
        return "H"
    if abs(deg - 90.0) <= ORIENTATION_TOL_DEG:
        return "V"
    return "D"


@dataclass(frozen=True)
class Line:
    """A straight stroke.

    Lines with ``orientation_deg`` in [0, 45] or [135, 180) are parameterized
    along x: the centerline is ``y = axis_position + x * tan(theta)`` for x in
    ``span``. Steeper lines are parameterized along y:
    ``x = axis_position + y * cot(theta)`` for y in ``span``. So a horizontal
    line sits at ``y = axis_position`` and a vertical one at ``x = axis_position``.
    """

    orientation_deg: float
    axis_position: float
    span: tuple
    thickness: float
    color: Color = field(default_factory=lambda: Color.of("black"))

    kind = "line"

    @property
    def orientation_class(self) -> str:
        return _orientation_class(self.orientation_deg)

    @property
    def along_x(self) -> bool:
        return self.orientation_deg <= 45.0 or self.orientation_deg >= 135.0

    @property
    def endpoints(self):
        s, e = self.span
        a = self.axis_position
        theta = self.orientation_deg
        if self.along_x:
            slope = 0.0 if theta == 0.0 else math.tan(math.radians(theta))
            return (s, a + s * slope), (e, a + e * slope)
        inv = 0.0 if theta == 90.0 else 1.0 / math.tan(math.radians(theta))
        return (a + s * inv, s), (a + e * inv, e)

    @property
    def length(self) -> float:
        (x0, y0), (x1, y1) = self.endpoints
        return math.hypot(x1 - x0, y1 - y0)

    @property
    def area(self) -> float:
        return self.length * self.thickness

    @property
    def centroid(self):
        (x0, y0), (x1, y1) = self.endpoints
        return (x0 + x1) / 2.0, (y0 + y1) / 2.0

    @property
    def bbox(self):
        """Axis-aligned rect of the stroke with its thickness applied."""
        (x0, y0), (x1, y1) = self.endpoints
        half = self.thickness / 2.0
        cls = self.orientation_class
        dx = half if cls in ("V", "D") else 0.0
        dy = half if cls in ("H", "D") else 0.0
        return (min(x0, x1) - dx, min(y0, y1) - dy, max(x0, x1) + dx, max(y0, y1) + dy)


@dataclass(frozen=True)
class Region:
    rect: tuple
    color: Color

    kind = "region"

    @property
    def area(self) -> float:
        x0, y0, x1, y1 = self.rect
        return (x1 - x0) * (y1 - y0)

    @property
    def centroid(self):
        x0, y0, x1, y1 = self.rect
        return (x0 + x1) / 2.0, (y0 + y1) / 2.0

    @property
    def bbox(self):
        return tuple(self.rect)


Element = Union[Line, Region]


@dataclass(frozen=True)
class Composition:
    id: str
    ordinal: int
    height_ratio: float = 1.0
    elements: tuple = ()
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    @property
    def canvas(self):
        return (1.0, self.height_ratio)

    @property
    def area(self) -> float:
        return self.height_ratio


@dataclass(frozen=True, order=True)
class ConceptSignature:
    """Discretized description of one element. Regions use ``-`` for orientation."""

    kind: str
    orientation_class: str
    size_class: str
    position_cell: int
    color_class: str
    boundary_contact: str

    def token(self) -> str:
        return "|".join(
            [self.kind, self.orientation_class, self.size_class, str(self.position_cell),
             self.color_class, self.boundary_contact]
        )

    @classmethod
    def from_token(cls, token: str) -> "ConceptSignature":
        kind, orient, size, cell, color, contact = token.split("|")
        return cls(kind, orient, size, int(cell), color, contact)

    @property
    def row(self) -> int:
        return self.position_cell // 3

    @property
    def col(self) -> int:
        return self.position_cell % 3


@dataclass(frozen=True, order=True)
class RelationInstance:
    a: int
    b: int
    relkind: str

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("relation pairs must satisfy a < b")

    @property
    def pair(self):
        return (self.a, self.b)


@dataclass(frozen=True, order=True)
class Violation:
    kind: str
    element: Optional[int]
    detail: str = ""


@dataclass(frozen=True)
class CorpusFeatureStats:
    area_terciles: tuple = FALLBACK_TERCILES
    fallback: bool = True
    epsilon: float = DEFAULT_EPSILON
    palette_tol: int = DEFAULT_PALETTE_TOL

    def to_json(self) -> dict:
        return {"area_terciles": list(self.area_terciles), "fallback": self.fallback}


def palette_class(color: Color, tol: int = DEFAULT_PALETTE_TOL) -> str:
    """Nearest palette anchor in Chebyshev distance, or ``OTHER`` beyond ``tol``."""
    if color.palette is not None:
        return color.palette
    best, best_d = OTHER, None
    for name in PALETTE:
        anchor = ANCHORS[name]
        d = max(abs(c - a) for c, a in zip(color.rgb, anchor))
        if best_d is None or d < best_d:
            best, best_d = name, d
    return best if best_d <= tol else OTHER


def _inside(x, y, height):
    return -_GEOM_TOL <= x <= 1.0 + _GEOM_TOL and -_GEOM_TOL <= y <= height + _GEOM_TOL


def within_canvas(e: Element, height: float) -> bool:
    if e.kind == "line":
        return all(_inside(x, y, height) for x, y in e.endpoints)
    x0, y0, x1, y1 = e.rect
    return _inside(x0, y0, height) and _inside(x1, y1, height)


def validate_composition(c: Composition, strict_style: bool = False) -> list:
    """Return the list of violations; empty iff ``c`` is well formed.

    With ``strict_style`` any diagonal line or off-palette color is also flagged.
    """
    out = []
    h = c.height_ratio
    if not (isinstance(h, (int, float)) and math.isfinite(h) and h > 0):
        return [Violation("InvalidCanvas", None, "height_ratio must be > 0")]
    if not isinstance(c.ordinal, int) or c.ordinal < 0:
        out.append(Violation("InvalidValue", None, "ordinal must be a non-negative integer"))
    if c.label is not None and c.label not in LABELS:
        out.append(Violation("InvalidValue", None, f"unknown label {c.label!r}"))
    for i, e in enumerate(c.elements):
        if e.color.rgb is not None and not all(0 <= v <= 255 for v in e.color.rgb):
            out.append(Violation("InvalidValue", i, "rgb channel out of 0-255"))
            continue
        if e.kind == "line":
            if not 0.0 <= e.orientation_deg < 180.0:
                out.append(Violation("InvalidValue", i, "orientation_deg outside [0, 180)"))
                continue
            if not e.thickness > 0:
                out.append(Violation("DegenerateGeometry", i, "thickness must be > 0"))
                continue
            if not e.span[0] < e.span[1]:
                out.append(Violation("DegenerateGeometry", i, "span start must be < end"))
                continue
        else:
            x0, y0, x1, y1 = e.rect
            if not (x0 < x1 and y0 < y1):
                out.append(Violation("DegenerateGeometry", i, "rect has zero or negative area"))
                continue
        if not within_canvas(e, h):
            out.append(Violation("OutOfCanvas", i, "geometry leaves the canvas"))
            continue
        if strict_style:
            if e.kind == "line" and e.orientation_class == "D":
                out.append(Violation("OrientationViolation", i, f"{e.orientation_deg:g} deg"))
            if palette_class(e.color) == OTHER:
                out.append(Violation("PaletteViolation", i, f"rgb {e.color.rgb}"))
    return out


def corpus_feature_stats(corpus, epsilon: float = DEFAULT_EPSILON,
                         palette_tol: int = DEFAULT_PALETTE_TOL) -> CorpusFeatureStats:
    """Area tercile thresholds over every element in ``corpus``.

    The thresholds are the order statistics at indices n//3 and 2n//3 of the
    sorted areas; fewer than three elements fall back to fixed thresholds.
    """
    areas = sorted(e.area for c in corpus for e in c.elements)
    n = len(areas)
    if n < 3:
        return CorpusFeatureStats(FALLBACK_TERCILES, True, epsilon, palette_tol)
    return CorpusFeatureStats((areas[n // 3], areas[2 * n // 3]), False, epsilon, palette_tol)


def size_class(area: float, stats: CorpusFeatureStats) -> str:
    t1, t2 = stats.area_terciles
    if area < t1:
        return "small"
    if area < t2:
        return "medium"
    return "large"


def position_cell(x: float, y: float, height: float) -> int:
    col = min(max(int(x * 3.0), 0), 2)
    row = min(max(int(y / height * 3.0), 0), 2)
    return 3 * row + col


def _border_distance(x, y, height):
    return min(x, 1.0 - x, y, height - y)


def boundary_contact(e: Element, height: float, eps: float) -> str:
    if e.kind != "line":
        return "interior"
    touching = sum(_border_distance(x, y, height) <= eps for x, y in e.endpoints)
    return ("interior", "one_end", "both_ends")[touching]


def discretize(e: Element, stats: CorpusFeatureStats, height: float = 1.0) -> ConceptSignature:
    if not within_canvas(e, height):
        raise OutsideCanvas(f"{e.kind} lies outside the canvas")
    cx, cy = e.centroid
    return ConceptSignature(
        kind=e.kind,
        orientation_class=e.orientation_class if e.kind == "line" else "-",
        size_class=size_class(e.area, stats),
        position_cell=position_cell(cx, cy, height),
        color_class=palette_class(e.color, stats.palette_tol),
        boundary_contact=boundary_contact(e, height, stats.epsilon),
    )


def signatures(c: Composition, stats: CorpusFeatureStats) -> list:
    return [discretize(e, stats, c.height_ratio) for e in c.elements]


def _strictly_contains(outer, inner) -> bool:
    ox0, oy0, ox1, oy1 = outer
    ix0, iy0, ix1, iy1 = inner
    inside = ox0 <= ix0 and oy0 <= iy0 and ix1 <= ox1 and iy1 <= oy1
    return inside and tuple(outer) != tuple(inner)


def _line_between(lines, axis, lo, hi, cross_lo, cross_hi, eps):
    """Is there a line of the right orientation covering the band [lo, hi]?

    ``axis`` 0 means the band runs along x (needs a V line), 1 along y (H line).
    """
    want = "V" if axis == 0 else "H"
    for ln in lines:
        if ln.orientation_class != want:
            continue
        b = ln.bbox
        b_lo, b_hi = (b[0], b[2]) if axis == 0 else (b[1], b[3])
        c_lo, c_hi = (b[1], b[3]) if axis == 0 else (b[0], b[2])
        covers = b_lo <= lo + eps and b_hi >= hi - eps
        overlap = min(c_hi, cross_hi) - max(c_lo, cross_lo)
        if covers and overlap > eps:
            return True
    return False


def _region_pair_relations(ra, rb, lines, eps):
    """Adjacency / separation between two regions that do not contain each other."""
    a, b = ra.rect, rb.rect
    found = set()
    for axis in (0, 1):
        other = 1 - axis
        overlap_cross = min(a[other + 2], b[other + 2]) - max(a[other], b[other])
        if overlap_cross <= eps:
            continue
        gap_lo = min(a[axis + 2], b[axis + 2])
        gap_hi = max(a[axis], b[axis])
        gap = gap_hi - gap_lo
        cross_lo = max(a[other], b[other])
        cross_hi = min(a[other + 2], b[other + 2])
        lo, hi = min(gap_lo, gap_hi), max(gap_lo, gap_hi)
        line_there = _line_between(lines, axis, lo, hi, cross_lo, cross_hi, eps)
        if -eps <= gap <= eps or (gap > eps and line_there):
            found.add("adjacent")
            if line_there:
                found.add("separated_by_line")
    return found


def extract_relations(c: Composition, stats: CorpusFeatureStats) -> set:
    eps = stats.epsilon
    h = c.height_ratio
    elems = c.elements
    lines = [e for e in elems if e.kind == "line"]
    cells = [position_cell(*e.centroid, h) for e in elems]
    classes = [palette_class(e.color, stats.palette_tol) for e in elems]
    out = set()
    for i in range(len(elems)):
        for j in range(i + 1, len(elems)):
            ei, ej = elems[i], elems[j]
            if cells[i] // 3 == cells[j] // 3 or cells[i] % 3 == cells[j] % 3:
                out.add(RelationInstance(i, j, "aligned"))
            if ei.kind != "region" or ej.kind != "region":
                continue
            if frozenset((classes[i], classes[j])) in OPPOSING_PAIRS:
                out.add(RelationInstance(i, j, "color_opposition"))
            if _strictly_contains(ei.rect, ej.rect) or _strictly_contains(ej.rect, ei.rect):
                out.add(RelationInstance(i, j, "contains"))
                continue
            for kind in _region_pair_relations(ei, ej, lines, eps):
                out.add(RelationInstance(i, j, kind))
    return out
