"""Test fixtures: random compositions and naive reference implementations.

The references here deliberately avoid the package's own counting code so
they can serve as independent oracles.
"""
from __future__ import annotations

import random
from functools import lru_cache
from itertools import permutations

from neoplast.scene import PALETTE, Color, Composition, Line, Region

# a coarse lattice so signatures repeat across paintings
_LATTICE = [round(0.1 * k, 1) for k in range(11)]


def random_element(rng: random.Random):
    r = rng.random()
    color = Color.of(rng.choice(PALETTE))
    if r < 0.2:
        axis = rng.choice(_LATTICE[1:-1])
        s = rng.choice(_LATTICE[:5])
        e = rng.choice(_LATTICE[6:])
        return Line(0.0, axis, (s, e), 0.02, color)
    if r < 0.4:
        axis = rng.choice(_LATTICE[1:-1])
        s = rng.choice(_LATTICE[:5])
        e = rng.choice(_LATTICE[6:])
        return Line(90.0, axis, (s, e), 0.02, color)
    if r < 0.45:
        return Line(30.0, 0.2, (0.2, 0.6), 0.01, Color.of("black"))
    x0 = rng.choice(_LATTICE[:-1])
    y0 = rng.choice(_LATTICE[:-1])
    x1 = rng.choice([v for v in _LATTICE if v > x0])
    y1 = rng.choice([v for v in _LATTICE if v > y0])
    if (x0, y0, x1, y1) == (0.0, 0.0, 1.0, 1.0):
        x1 = 0.9
    return Region((x0, y0, x1, y1), color)


def random_composition(rng: random.Random, n_elements: int, ordinal: int = 0) -> Composition:
    elems = tuple(random_element(rng) for _ in range(n_elements))
    return Composition(f"rnd-{ordinal}", ordinal, 1.0, elems)


def random_corpus(seed: int, max_paintings: int = 20, max_elements: int = 30):
    rng = random.Random(seed)
    n = rng.randint(1, max_paintings)
    return [random_composition(rng, rng.randint(0, max_elements), t) for t in range(n)]


# -- naive references ---------------------------------------------------------

def naive_jaccard(a: list, b: list) -> float:
    items = []
    for x in a + b:
        if x not in items:
            items.append(x)
    lo = sum(min(a.count(x), b.count(x)) for x in items)
    hi = sum(max(a.count(x), b.count(x)) for x in items)
    return 1.0 if hi == 0 else lo / hi


def naive_tables(prefix_sigs):
    """Document frequencies of signatures and signature pairs by brute-force recount."""
    sig_freq, pair_freq = {}, {}
    for painting in prefix_sigs:
        distinct = sorted(set(painting))
        for i, a in enumerate(distinct):
            sig_freq[a] = sig_freq.get(a, 0) + 1
            for b in distinct[i + 1:]:
                pair_freq[(a, b)] = pair_freq.get((a, b), 0) + 1
    return sig_freq, pair_freq


def naive_diff(sigs, prefix_sigs, drop_threshold=0.5):
    n = len(prefix_sigs)
    sig_freq, pair_freq = naive_tables(prefix_sigs)
    present = sorted(set(sigs))
    pairs = [(present[i], present[j]) for i in range(len(present))
             for j in range(i + 1, len(present))]
    if n == 0:
        nearest = pool = 0.0
    else:
        nearest = max(naive_jaccard(list(sigs), list(p)) for p in prefix_sigs)
        pool = naive_jaccard(present, sorted(sig_freq))
    seen = {}
    for p in prefix_sigs:
        for s in p:
            for attr in ("kind", "orientation_class", "size_class", "position_cell",
                         "color_class", "boundary_contact"):
                v = getattr(s, attr)
                if attr == "orientation_class" and v == "-":
                    continue
                seen.setdefault(attr, set()).add(v)
    new_features = set()
    for s in present:
        for attr in ("kind", "orientation_class", "size_class", "position_cell",
                     "color_class", "boundary_contact"):
            v = getattr(s, attr)
            if attr == "orientation_class" and v == "-":
                continue
            if v not in seen.get(attr, set()):
                new_features.add((attr, v))
    return {
        "nearest_similarity": nearest,
        "pool_similarity": pool,
        "new_features": new_features,
        "new_concepts": {s for s in present if sig_freq.get(s, 0) == 0},
        "occurrence_freqs": {s: (sig_freq.get(s, 0) / n if n else 0.0) for s in present},
        "cooccurrence_freqs": {p: (pair_freq.get(p, 0) / n if n else 0.0) for p in pairs},
        "new_cooccurrences": {p for p in pairs if pair_freq.get(p, 0) == 0},
        "dropped_cooccurrences": {p for p, k in pair_freq.items()
                                  if n and k / n >= drop_threshold and p not in pairs},
    }


def naive_levenshtein(a, b) -> int:
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))


def exhaustive_matching(prev, curr, iou_fn, iou_min=0.5):
    """The lexicographically best matching among all valid ones.

    Each matching is scored by its pairs' ``(-iou, i, j)`` keys sorted
    ascending, padded to a common length with +inf so larger matchings are
    never beaten by their own subsets.
    """
    edges = {}
    for i, a in enumerate(prev.elements):
        for j, b in enumerate(curr.elements):
            if a.kind == b.kind:
                v = iou_fn(a.bbox, b.bbox)
                if v >= iou_min:
                    edges[(i, j)] = v
    best = None
    width = min(len(prev.elements), len(curr.elements))

    def key(m):
        ks = sorted((-edges[p], p[0], p[1]) for p in m)
        return ks + [(float("inf"), 0, 0)] * (width - len(ks))

    def search(i, used, chosen):
        nonlocal best
        if i == len(prev.elements):
            k = key(chosen)
            if best is None or k < best[0]:
                best = (k, sorted(chosen))
            return
        search(i + 1, used, chosen)
        for j in range(len(curr.elements)):
            if j not in used and (i, j) in edges:
                search(i + 1, used | {j}, chosen + [(i, j)])

    search(0, frozenset(), [])
    return best[1]


def all_orderings(seq, limit=6):
    out = []
    for n, p in enumerate(permutations(seq)):
        if n >= limit:
            break
        out.append(p)
    return out
