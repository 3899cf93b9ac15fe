"""Scoring candidate compositions against a mined invariant profile."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .diff import diff_from_signatures
from .errors import EmptyProfile, UnlabeledCandidate
from .invariants import flexibility, painting_facts, rule_components
from .rules import induce_rule
from .scene import signatures


@dataclass
class AttributionReport:
    candidate_id: str
    satisfied: list
    violated: list
    not_applicable: list
    score: float
    verdict: str
    nearest_similarity: Optional[float]
    new_concepts: int
    label: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "label": self.label,
            "satisfied": list(self.satisfied),
            "violated": list(self.violated),
            "not_applicable": list(self.not_applicable),
            "score": self.score,
            "verdict": self.verdict,
            "novelty": {"nearest_similarity": self.nearest_similarity,
                        "new_concepts": self.new_concepts},
        }


def _rule_items(c, predecessor, profile, stats, iou_min, scope_tau, flex_k):
    curr = replace(c, ordinal=predecessor.ordinal + 1)
    rc = rule_components(induce_rule(predecessor, curr, stats, iou_min, scope_tau))
    prior = [p for p in profile.history if p.t_curr <= predecessor.ordinal]
    return replace(rc, flexibility=flexibility(rc, prior, flex_k)).items()


def score_candidate(c, profile, tables, stats, verdict_threshold: float = 0.8, *,
                    prefix=None, predecessor=None, iou_min: float = 0.5,
                    scope_tau: float = 0.30, flex_k: int = 3) -> AttributionReport:
    """Evaluate every mined invariant on ``c``.

    Style invariants always apply. Rule and co-occurrence invariants need the
    painting that precedes ``c`` (``predecessor``); without it they are listed
    as not applicable and left out of the score.
    """
    if not profile.style_invariants:
        raise EmptyProfile("the profile has no style invariants")
    facts = painting_facts(c, stats)
    satisfied, violated, na = [], [], []
    for pred, _ in profile.style_invariants:
        (satisfied if pred.holds(facts) else violated).append(pred.text)

    rule_texts = [f"{comp}: {item}" for comp, item, _ in profile.rule_invariants]
    pair_texts = [f"{a[0]}: {a[1]} & {b[0]}: {b[1]}"
                  for a, b, _ in profile.cooccurrence_invariants]
    if predecessor is None:
        na = rule_texts + pair_texts
    else:
        items = _rule_items(c, predecessor, profile, stats, iou_min, scope_tau, flex_k)
        for (comp, item, _), text in zip(profile.rule_invariants, rule_texts):
            (satisfied if (comp, item) in items else violated).append(text)
        for (a, b, _), text in zip(profile.cooccurrence_invariants, pair_texts):
            (satisfied if a in items and b in items else violated).append(text)

    score = len(satisfied) / (len(satisfied) + len(violated))
    sigs = signatures(c, stats)
    prefix_sigs = [signatures(p, stats) for p in prefix] if prefix is not None else []
    novelty = diff_from_signatures(sigs, tables, prefix_sigs)
    return AttributionReport(
        candidate_id=c.id,
        satisfied=satisfied,
        violated=violated,
        not_applicable=na,
        score=score,
        verdict="in_style" if score >= verdict_threshold else "off_style",
        nearest_similarity=novelty.nearest_similarity if prefix is not None else None,
        new_concepts=len(novelty.new_concepts),
        label=c.label,
    )


@dataclass
class EvalSummary:
    accuracy: Optional[float]
    confusion: dict
    reports: list = field(default_factory=list)
    margin: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "confusion": self.confusion,
            "margin": self.margin,
            "reports": [r.to_json() for r in self.reports],
        }


def evaluate_labeled_corpus(candidates, profile, tables, stats,
                            verdict_threshold: float = 0.8, **score_kwargs) -> EvalSummary:
    """Accuracy, confusion counts (label -> verdict -> n) and the in/off score margin."""
    for c in candidates:
        if c.label not in ("in_style", "off_style"):
            raise UnlabeledCandidate(c.id)
    confusion = {lab: {v: 0 for v in ("in_style", "off_style")}
                 for lab in ("in_style", "off_style")}
    reports = [score_candidate(c, profile, tables, stats, verdict_threshold, **score_kwargs)
               for c in candidates]
    for r in reports:
        confusion[r.label][r.verdict] += 1
    correct = sum(1 for r in reports if r.label == r.verdict)
    ins = [r.score for r in reports if r.label == "in_style"]
    offs = [r.score for r in reports if r.label == "off_style"]
    return EvalSummary(
        accuracy=correct / len(reports) if reports else None,
        confusion=confusion,
        reports=reports,
        margin=min(ins) - max(offs) if ins and offs else None,
    )
