"""Composition file format, manifest loading and SVG rendering."""
from __future__ import annotations

import json
import math
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace
from pathlib import Path

from . import canonical
from .errors import SchemaError
from .scene import LABELS, PALETTE, Color, Composition, Line, Region, palette_class

_TOP_FIELDS = {"id", "ordinal", "canvas", "label", "elements"}
_TOP_REQUIRED = {"id", "ordinal", "canvas", "elements"}
_LINE_FIELDS = {"kind", "orientation_deg", "axis_position", "span", "thickness", "color"}
_REGION_FIELDS = {"kind", "rect", "color"}


def _reject_duplicates(pairs):
    obj = {}
    for k, v in pairs:
        if k in obj:
            raise SchemaError("", f"duplicate key {k!r}")
        obj[k] = v
    return obj


def _reject_constant(name):
    raise SchemaError("", f"non-finite number {name}")


def _is_real(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _real(obj, key, path):
    if key not in obj:
        raise SchemaError(f"{path}/{key}", "missing required field")
    v = obj[key]
    if not _is_real(v):
        raise SchemaError(f"{path}/{key}", "expected a real number")
    return float(v)


def _reals(obj, key, path, n):
    if key not in obj:
        raise SchemaError(f"{path}/{key}", "missing required field")
    v = obj[key]
    if not isinstance(v, list) or len(v) != n:
        raise SchemaError(f"{path}/{key}", f"expected a list of {n} reals")
    for i, x in enumerate(v):
        if not _is_real(x):
            raise SchemaError(f"{path}/{key}/{i}", "expected a real number")
    return tuple(float(x) for x in v)


def _check_fields(obj, allowed, required, path):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    for k in sorted(obj):
        if k not in allowed:
            raise SchemaError(f"{path}/{k}", "unknown field")
    for k in sorted(required):
        if k not in obj:
            raise SchemaError(f"{path}/{k}", "missing required field")


def _parse_color(obj, path):
    if not isinstance(obj, dict) or len(obj) != 1 or next(iter(obj)) not in ("palette", "rgb"):
        raise SchemaError(path, "expected exactly one of 'palette' or 'rgb'")
    if "palette" in obj:
        name = obj["palette"]
        if name not in PALETTE:
            raise SchemaError(f"{path}/palette", "unknown palette class")
        return Color(palette=name)
    rgb = obj["rgb"]
    if not isinstance(rgb, list) or len(rgb) != 3:
        raise SchemaError(f"{path}/rgb", "expected three channels")
    for i, v in enumerate(rgb):
        if isinstance(v, bool) or not isinstance(v, int):
            raise SchemaError(f"{path}/rgb/{i}", "expected an integer")
        if not 0 <= v <= 255:
            raise SchemaError(f"{path}/rgb/{i}", "out of range")
    return Color(rgb=tuple(rgb))


def _parse_element(obj, path, height):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    kind = obj.get("kind")
    if kind == "line":
        _check_fields(obj, _LINE_FIELDS, _LINE_FIELDS, path)
        deg = _real(obj, "orientation_deg", path)
        if not 0.0 <= deg < 180.0:
            raise SchemaError(f"{path}/orientation_deg", "out of range")
        axis = _real(obj, "axis_position", path)
        span = _reals(obj, "span", path, 2)
        thickness = _real(obj, "thickness", path)
        if not thickness > 0:
            raise SchemaError(f"{path}/thickness", "out of range")
        color = _parse_color(obj["color"], f"{path}/color")
        return Line(deg, axis, span, thickness, color)
    if kind == "region":
        _check_fields(obj, _REGION_FIELDS, _REGION_FIELDS, path)
        rect = _reals(obj, "rect", path, 4)
        color = _parse_color(obj["color"], f"{path}/color")
        region = Region(rect, color)
        full = all(abs(a - b) <= 1e-9 for a, b in zip(rect, (0.0, 0.0, 1.0, height)))
        if full and palette_class(color) == "white":
            raise SchemaError(path, "full-canvas white region duplicates the implicit background")
        return region
    if "kind" not in obj:
        raise SchemaError(f"{path}/kind", "missing required field")
    raise SchemaError(f"{path}/kind", "expected 'line' or 'region'")


def composition_from_obj(doc) -> Composition:
    _check_fields(doc, _TOP_FIELDS, _TOP_REQUIRED, "")
    if not isinstance(doc["id"], str):
        raise SchemaError("/id", "expected a string")
    ordinal = doc["ordinal"]
    if isinstance(ordinal, bool) or not isinstance(ordinal, int):
        raise SchemaError("/ordinal", "expected an integer")
    if ordinal < 0:
        raise SchemaError("/ordinal", "out of range")
    _check_fields(doc["canvas"], {"height_ratio"}, {"height_ratio"}, "/canvas")
    height = _real(doc["canvas"], "height_ratio", "/canvas")
    if not height > 0:
        raise SchemaError("/canvas/height_ratio", "out of range")
    label = doc.get("label")
    if "label" in doc and label not in LABELS:
        raise SchemaError("/label", "expected one of in_style, off_style, unknown")
    if not isinstance(doc["elements"], list):
        raise SchemaError("/elements", "expected a list")
    elements = [_parse_element(e, f"/elements/{i}", height) for i, e in enumerate(doc["elements"])]
    return Composition(doc["id"], ordinal, height, tuple(elements), label)


def parse_composition(text) -> Composition:
    """Parse one composition document; raises :class:`SchemaError` on any violation."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError("", f"not UTF-8: {exc}") from None
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicates,
                         parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
    return composition_from_obj(doc)


def _color_obj(color: Color) -> dict:
    if color.palette is not None:
        return {"palette": color.palette}
    return {"rgb": list(color.rgb)}


def element_to_obj(e) -> dict:
    if e.kind == "line":
        return {
            "kind": "line",
            "orientation_deg": float(e.orientation_deg),
            "axis_position": float(e.axis_position),
            "span": [float(v) for v in e.span],
            "thickness": float(e.thickness),
            "color": _color_obj(e.color),
        }
    return {"kind": "region", "rect": [float(v) for v in e.rect], "color": _color_obj(e.color)}


def composition_to_obj(c: Composition) -> dict:
    doc = {
        "id": c.id,
        "ordinal": int(c.ordinal),
        "canvas": {"height_ratio": float(c.height_ratio)},
        "elements": [element_to_obj(e) for e in c.elements],
    }
    if c.label is not None:
        doc["label"] = c.label
    return doc


def serialize_composition(c: Composition) -> str:
    return canonical.dumps(composition_to_obj(c))


def quantize_composition(c: Composition) -> Composition:
    """The composition as it reads back after one canonical round trip."""
    return composition_from_obj(json.loads(serialize_composition(c)))


@dataclass(frozen=True)
class CorpusManifest:
    artist: str
    compositions: tuple
    base_dir: Path = Path(".")

    def paths(self):
        return [self.base_dir / p for p in self.compositions]


def parse_manifest(text, base_dir=".") -> CorpusManifest:
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicates,
                         parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc.msg}") from None
    _check_fields(doc, {"artist", "compositions"}, {"artist", "compositions"}, "")
    if not isinstance(doc["artist"], str):
        raise SchemaError("/artist", "expected a string")
    paths = doc["compositions"]
    if not isinstance(paths, list):
        raise SchemaError("/compositions", "expected a list")
    seen = set()
    for i, p in enumerate(paths):
        if not isinstance(p, str):
            raise SchemaError(f"/compositions/{i}", "expected a path string")
        key = os.path.normpath(p)
        if key in seen:
            raise SchemaError(f"/compositions/{i}", "duplicate path")
        seen.add(key)
    return CorpusManifest(doc["artist"], tuple(paths), Path(base_dir))


def load_composition(path) -> Composition:
    path = Path(path)
    try:
        return parse_composition(path.read_bytes())
    except SchemaError as exc:
        raise SchemaError(exc.path, exc.reason, source=str(path)) from None


def load_manifest(path):
    """Load a manifest and its compositions; ordinals follow list order."""
    path = Path(path)
    try:
        manifest = parse_manifest(path.read_text(encoding="utf-8"), path.parent)
    except SchemaError as exc:
        raise SchemaError(exc.path, exc.reason, source=str(path)) from None
    corpus = [replace(load_composition(p), ordinal=i) for i, p in enumerate(manifest.paths())]
    return manifest, corpus


def write_manifest(path, artist, filenames):
    Path(path).write_text(
        canonical.dumps({"artist": artist, "compositions": list(filenames)}), encoding="utf-8"
    )


def _hex(rgb):
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def render_svg(c: Composition, width_px: int = 600) -> str:
    """Render ``c`` as SVG: a white background rect, then one rect per element."""
    h = c.height_ratio
    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": str(width_px),
        "height": str(round(width_px * h)),
        "viewBox": f"0 0 1 {canonical.format_real(h)}",
    })
    ET.SubElement(svg, "rect", {"x": "0", "y": "0", "width": "1",
                                "height": canonical.format_real(h), "fill": "#ffffff"})
    fmt = canonical.format_real
    for e in c.elements:
        fill = _hex(e.color.as_rgb())
        if e.kind == "region":
            x0, y0, x1, y1 = e.rect
            ET.SubElement(svg, "rect", {"x": fmt(x0), "y": fmt(y0), "width": fmt(x1 - x0),
                                        "height": fmt(y1 - y0), "fill": fill})
            continue
        (ax, ay), (bx, by) = e.endpoints
        cx, cy = (ax + bx) / 2, (ay + by) / 2
        length = math.hypot(bx - ax, by - ay)
        attrs = {"x": fmt(cx - length / 2), "y": fmt(cy - e.thickness / 2),
                 "width": fmt(length), "height": fmt(e.thickness), "fill": fill}
        angle = math.degrees(math.atan2(by - ay, bx - ax))
        if abs(angle) > 1e-9:
            attrs["transform"] = f"rotate({fmt(angle)} {fmt(cx)} {fmt(cy)})"
        ET.SubElement(svg, "rect", attrs)
    return ET.tostring(svg, encoding="unicode") + "\n"
