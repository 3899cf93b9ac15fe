"""Occurrence and co-occurrence statistics over a corpus prefix, and the per-painting diff."""
from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations

from .scene import signatures

ATTRIBUTES = ("kind", "orientation_class", "size_class", "position_cell", "color_class",
              "boundary_contact")


def multiset_jaccard(a, b) -> float:
    """Sum of per-item minimum counts over sum of maximum counts; 1.0 for two empty bags."""
    a = a if isinstance(a, Counter) else Counter(a)
    b = b if isinstance(b, Counter) else Counter(b)
    keys = a.keys() | b.keys()
    hi = sum(max(a[k], b[k]) for k in keys)
    if hi == 0:
        return 1.0
    return sum(min(a[k], b[k]) for k in keys) / hi


def signature_attributes(sig):
    """(attribute, value) pairs of one signature; regions carry no orientation."""
    for name in ATTRIBUTES:
        value = getattr(sig, name)
        if name == "orientation_class" and value == "-":
            continue
        yield name, value


def signature_pairs(sig_set):
    return set(combinations(sorted(sig_set), 2))


@dataclass
class OccurrenceTables:
    n_paintings: int = 0
    sig_freq: Counter = field(default_factory=Counter)
    pair_freq: Counter = field(default_factory=Counter)
    attr_values_seen: dict = field(default_factory=dict)

    @classmethod
    def of_painting(cls, sigs) -> "OccurrenceTables":
        distinct = set(sigs)
        seen = {}
        for s in distinct:
            for name, value in signature_attributes(s):
                seen.setdefault(name, set()).add(value)
        return cls(1, Counter(distinct), Counter(signature_pairs(distinct)), seen)

    def merge(self, other: "OccurrenceTables") -> "OccurrenceTables":
        seen = {k: set(v) for k, v in self.attr_values_seen.items()}
        for k, v in other.attr_values_seen.items():
            seen.setdefault(k, set()).update(v)
        return OccurrenceTables(self.n_paintings + other.n_paintings,
                                self.sig_freq + other.sig_freq,
                                self.pair_freq + other.pair_freq, seen)

    def add_painting(self, sigs) -> None:
        part = OccurrenceTables.of_painting(sigs)
        self.n_paintings += 1
        self.sig_freq.update(part.sig_freq)
        self.pair_freq.update(part.pair_freq)
        for k, v in part.attr_values_seen.items():
            self.attr_values_seen.setdefault(k, set()).update(v)

    def to_json(self) -> dict:
        return {
            "n_paintings": self.n_paintings,
            "sig_freq": {s.token(): n for s, n in self.sig_freq.items()},
            "pair_freq": [{"pair": [a.token(), b.token()], "count": n}
                          for (a, b), n in sorted(self.pair_freq.items())],
            "attr_values_seen": {k: sorted(v) for k, v in self.attr_values_seen.items()},
        }


def build_occurrence_tables(corpus_prefix, stats) -> OccurrenceTables:
    parts = [OccurrenceTables.of_painting(signatures(c, stats)) for c in corpus_prefix]
    return reduce(OccurrenceTables.merge, parts, OccurrenceTables())


@dataclass
class DiffReport:
    nearest_similarity: float
    pool_similarity: float
    new_features: set
    new_concepts: set
    occurrence_freqs: dict
    cooccurrence_freqs: dict
    new_cooccurrences: set
    dropped_cooccurrences: set
    empty_corpus: bool = False

    def to_json(self) -> dict:
        def pair(p):
            return [p[0].token(), p[1].token()]

        return {
            "nearest_similarity": self.nearest_similarity,
            "pool_similarity": self.pool_similarity,
            "new_features": [[a, v] for a, v in sorted(self.new_features, key=str)],
            "new_concepts": sorted(s.token() for s in self.new_concepts),
            "occurrence_freqs": {s.token(): f for s, f in self.occurrence_freqs.items()},
            "cooccurrence_freqs": [{"pair": pair(p), "freq": f}
                                   for p, f in sorted(self.cooccurrence_freqs.items())],
            "new_cooccurrences": [pair(p) for p in sorted(self.new_cooccurrences)],
            "dropped_cooccurrences": [pair(p) for p in sorted(self.dropped_cooccurrences)],
            "flags": ["EmptyCorpus"] if self.empty_corpus else [],
        }


def diff_from_signatures(sigs, tables: OccurrenceTables, prefix_sigs,
                         drop_threshold: float = 0.5) -> DiffReport:
    """:func:`diff_report` on precomputed signature lists."""
    n = tables.n_paintings
    bag = Counter(sigs)
    present = set(bag)
    pairs = signature_pairs(present)
    if n == 0:
        return DiffReport(0.0, 0.0,
                          {av for s in present for av in signature_attributes(s)},
                          present, {s: 0.0 for s in present}, {p: 0.0 for p in pairs},
                          pairs, set(), empty_corpus=True)
    nearest = max((multiset_jaccard(bag, Counter(p)) for p in prefix_sigs), default=0.0)
    pool = Counter(s for s, k in tables.sig_freq.items() if k > 0)
    seen = tables.attr_values_seen
    return DiffReport(
        nearest_similarity=nearest,
        pool_similarity=multiset_jaccard(Counter(present), pool),
        new_features={(a, v) for s in present for a, v in signature_attributes(s)
                      if v not in seen.get(a, ())},
        new_concepts={s for s in present if tables.sig_freq[s] == 0},
        occurrence_freqs={s: tables.sig_freq[s] / n for s in present},
        cooccurrence_freqs={p: tables.pair_freq[p] / n for p in pairs},
        new_cooccurrences={p for p in pairs if tables.pair_freq[p] == 0},
        dropped_cooccurrences={p for p, k in tables.pair_freq.items()
                               if k / n >= drop_threshold and p not in pairs},
    )


def diff_report(c, tables: OccurrenceTables, prefix, stats, drop_threshold: float = 0.5):
    """Compare painting ``c`` with the earlier paintings summarized by ``tables``.

    An empty prefix still yields a report (similarities 0, everything new)
    with ``empty_corpus`` set.
    """
    return diff_from_signatures(signatures(c, stats), tables,
                                [signatures(p, stats) for p in prefix], drop_threshold)


def occurrence_csv(report: DiffReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["signature", "frequency"])
    for s in sorted(report.occurrence_freqs):
        writer.writerow([s.token(), f"{report.occurrence_freqs[s]:.6f}"])
    return buf.getvalue()
