"""Change rules between consecutive paintings."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from .diff import multiset_jaccard
from .errors import OrdinalGap
from .scene import ConceptSignature, extract_relations, signatures

_OP_RANK = {"eliminate": 0, "modify": 1, "add": 2}


@dataclass(frozen=True)
class AtomicChange:
    op: str
    sig_before: Optional[ConceptSignature]
    sig_after: Optional[ConceptSignature]
    locus: int

    def __post_init__(self):
        if self.op == "add":
            ok = self.sig_before is None and self.sig_after is not None
        elif self.op == "eliminate":
            ok = self.sig_before is not None and self.sig_after is None
        elif self.op == "modify":
            ok = None not in (self.sig_before, self.sig_after) and self.sig_before != self.sig_after
        else:
            raise ValueError(f"unknown op {self.op!r}")
        if not ok:
            raise ValueError(f"malformed {self.op} atom")

    @property
    def subject(self) -> ConceptSignature:
        return self.sig_after if self.op == "add" else self.sig_before

    def sort_key(self):
        s = self.subject
        return (_OP_RANK[self.op], self.locus // 3, self.locus % 3, s.kind, s.color_class,
                self.sig_before.token() if self.sig_before else "",
                self.sig_after.token() if self.sig_after else "")

    def token(self) -> str:
        if self.op == "add":
            return "add:" + self.sig_after.token()
        if self.op == "eliminate":
            return "eliminate:" + self.sig_before.token()
        return f"modify:{self.sig_before.token()}>{self.sig_after.token()}"

    def to_json(self) -> dict:
        return {
            "op": self.op,
            "sig_before": self.sig_before.token() if self.sig_before else None,
            "sig_after": self.sig_after.token() if self.sig_after else None,
            "locus": self.locus,
        }


def canonical_changes(changes) -> tuple:
    """Eliminations, then modifications, then additions; each by locus row, column, kind, color."""
    return tuple(sorted(changes, key=AtomicChange.sort_key))


def context_token(item) -> str:
    return item.token() if isinstance(item, ConceptSignature) else "rel:" + item


@dataclass(frozen=True)
class ChangeRule:
    t_prev: int
    t_curr: int
    changes: tuple
    when_context: frozenset
    scope: str
    stochastic_flag: bool = False

    @property
    def is_empty(self) -> bool:
        return not self.changes

    def to_json(self) -> dict:
        return {
            "t_prev": self.t_prev,
            "t_curr": self.t_curr,
            "changes": [a.to_json() for a in self.changes],
            "when_context": sorted(context_token(x) for x in self.when_context),
            "scope": self.scope,
            "stochastic": self.stochastic_flag,
        }


def added_signatures(rule: ChangeRule) -> list:
    """Signatures in the added role; a modification contributes its new form."""
    return [a.sig_after for a in rule.changes if a.op in ("add", "modify")]


def eliminated_signatures(rule: ChangeRule) -> list:
    return [a.sig_before for a in rule.changes if a.op in ("eliminate", "modify")]


def iou(a, b) -> float:
    ix = min(a[2], b[2]) - max(a[0], b[0])
    iy = min(a[3], b[3]) - max(a[1], b[1])
    inter = max(ix, 0.0) * max(iy, 0.0)
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union if union > 0 else 0.0


def match_elements(prev, curr, stats=None, iou_min: float = 0.5):
    """Greedy one-to-one correspondence between same-kind elements by bounding-box IoU.

    Candidate pairs are taken in order of descending IoU, then ascending
    ``(i, j)``; pairs below ``iou_min`` are never matched.
    """
    cands = []
    for i, a in enumerate(prev.elements):
        for j, b in enumerate(curr.elements):
            if a.kind != b.kind:
                continue
            score = iou(a.bbox, b.bbox)
            if score >= iou_min:
                cands.append((-score, i, j))
    cands.sort()
    used_i, used_j, matches = set(), set(), []
    for _, i, j in cands:
        if i in used_i or j in used_j:
            continue
        used_i.add(i)
        used_j.add(j)
        matches.append((i, j))
    matches.sort()
    unmatched_prev = [i for i in range(len(prev.elements)) if i not in used_i]
    unmatched_curr = [j for j in range(len(curr.elements)) if j not in used_j]
    return matches, unmatched_prev, unmatched_curr


def induce_rule(prev, curr, stats, iou_min: float = 0.5, scope_tau: float = 0.30) -> ChangeRule:
    if curr.ordinal != prev.ordinal + 1:
        raise OrdinalGap(prev.ordinal, curr.ordinal)
    matches, gone, new = match_elements(prev, curr, stats, iou_min)
    sp, sc = signatures(prev, stats), signatures(curr, stats)
    changes, kept = [], set()
    affected = []
    for i in gone:
        changes.append(AtomicChange("eliminate", sp[i], None, sp[i].position_cell))
        affected.append(prev.elements[i].area)
    for j in new:
        changes.append(AtomicChange("add", None, sc[j], sc[j].position_cell))
        affected.append(curr.elements[j].area)
    for i, j in matches:
        if sp[i] == sc[j]:
            kept.add(sp[i])
        else:
            changes.append(AtomicChange("modify", sp[i], sc[j], sp[i].position_cell))
            affected.append(max(prev.elements[i].area, curr.elements[j].area))
    kept -= {sp[i] for i in gone}
    rel_prev = {r.relkind for r in extract_relations(prev, stats)}
    rel_curr = {r.relkind for r in extract_relations(curr, stats)}
    scope = "global" if math.fsum(affected) >= scope_tau * prev.area else "local"
    return ChangeRule(prev.ordinal, curr.ordinal, canonical_changes(changes),
                      frozenset(kept) | frozenset(rel_prev & rel_curr), scope)


def rule_relatedness(a: ChangeRule, b: ChangeRule) -> float:
    parts = (
        multiset_jaccard(Counter(added_signatures(a)), Counter(added_signatures(b))),
        multiset_jaccard(Counter(eliminated_signatures(a)), Counter(eliminated_signatures(b))),
        multiset_jaccard(Counter(a.when_context), Counter(b.when_context)),
    )
    return sum(parts) / 3.0


def rule_usage_timeline(rules, key: str = "add_signature") -> dict:
    """Map each signature to the ordinals of the rules that use it in the ``key`` role."""
    if key == "add_signature":
        pick = added_signatures
    elif key == "eliminate_signature":
        pick = eliminated_signatures
    else:
        raise ValueError(f"unknown timeline key {key!r}")
    timeline = {}
    for rule in sorted(rules, key=lambda r: r.t_curr):
        for sig in sorted(set(pick(rule))):
            stamps = timeline.setdefault(sig, [])
            if not stamps or stamps[-1] != rule.t_curr:
                stamps.append(rule.t_curr)
    return timeline


def apply_rule(rule: ChangeRule, prev_signatures) -> Counter:
    """Replay a rule's atoms on a signature multiset."""
    bag = Counter(prev_signatures)
    bag.subtract(eliminated_signatures(rule))
    bag.update(added_signatures(rule))
    if any(v < 0 for v in bag.values()):
        raise ValueError("rule removes signatures absent from the multiset")
    return +bag
