"""End-to-end analysis: validate, feature stats, cues, the three steps, optional scoring."""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

from . import canonical
from .attribution import evaluate_labeled_corpus, score_candidate
from .config import PipelineConfig
from .corpus_io import load_manifest
from .cues import compute_cues, cue_delta, rank_cues
from .diff import OccurrenceTables, diff_from_signatures
from .errors import InvalidComposition
from .invariants import mine_invariants, painting_facts
from .rules import induce_rule, rule_relatedness, rule_usage_timeline
from .scene import corpus_feature_stats, signatures, validate_composition


def _violations_json(vs):
    return [{"kind": v.kind, "element": v.element, "detail": v.detail} for v in vs]


def validation_section(corpus) -> list:
    """Structural and strict-style violations per painting; raises on structural ones."""
    out = []
    for c in corpus:
        structural = validate_composition(c)
        if structural:
            raise InvalidComposition(c.id, structural)
        style = validate_composition(c, strict_style=True)
        out.append({"id": c.id, "ordinal": c.ordinal, "violations": [],
                    "style_violations": _violations_json(style)})
    return out


def feature_stats(corpus, config: PipelineConfig):
    return corpus_feature_stats(corpus, config.epsilon, config.palette_tol)


def cues_section(corpus, stats, config):
    profiles = [compute_cues(c, stats) for c in corpus]
    section = [{"id": c.id, "ordinal": c.ordinal, "cues": p.to_json(),
                "ranking": rank_cues(p, config.norms())}
               for c, p in zip(corpus, profiles)]
    return section, profiles


def step1_section(corpus, stats, config, sigs=None):
    """Each painting diffed against the paintings before it."""
    sigs = sigs or [signatures(c, stats) for c in corpus]
    tables = OccurrenceTables()
    out = []
    for t, c in enumerate(corpus):
        report = diff_from_signatures(sigs[t], tables, sigs[:t], config.drop_threshold)
        out.append({"id": c.id, "ordinal": c.ordinal, **report.to_json()})
        tables.add_painting(sigs[t])
    return out, tables


def induce_rules(corpus, stats, config):
    return [induce_rule(a, b, stats, config.iou_min, config.scope_tau)
            for a, b in zip(corpus, corpus[1:])]


def step2_section(rules, cue_profiles):
    entries = []
    for n, rule in enumerate(rules):
        entry = rule.to_json()
        entry["relatedness_to_previous"] = rule_relatedness(rules[n - 1], rule) if n else None
        entry["cue_delta"] = cue_delta(cue_profiles[n], cue_profiles[n + 1])
        entries.append(entry)
    timelines = {}
    for key in ("add_signature", "eliminate_signature"):
        timelines[key] = {s.token(): stamps
                          for s, stamps in rule_usage_timeline(rules, key).items()}
    return {"rules": entries, "timelines": timelines}


def step3_section(profile):
    out = profile.to_json()
    out["components"] = [rc.to_json() for rc in profile.history]
    return out


def mine(corpus, stats, config, rules=None):
    rules = rules if rules is not None else induce_rules(corpus, stats, config)
    facts = [painting_facts(c, stats) for c in corpus]
    return mine_invariants(corpus, rules, config.support_theta, stats, config.flex_k, facts)


def attribution_section(candidates, corpus, profile, tables, stats, config):
    kwargs = dict(prefix=corpus, iou_min=config.iou_min, scope_tau=config.scope_tau,
                  flex_k=config.flex_k)
    if candidates and all(c.label in ("in_style", "off_style") for c in candidates):
        summary = evaluate_labeled_corpus(candidates, profile, tables, stats,
                                          config.verdict_threshold, **kwargs)
        return summary.to_json(), summary.reports
    reports = [score_candidate(c, profile, tables, stats, config.verdict_threshold, **kwargs)
               for c in candidates]
    return {"accuracy": None, "confusion": None, "margin": None,
            "reports": [r.to_json() for r in reports]}, reports


def analyze(corpus, config: PipelineConfig, candidates=None, artist=None) -> dict:
    """Run every stage over an ordinal-ordered corpus and return the report object."""
    corpus = sorted(corpus, key=lambda c: c.ordinal)
    validation = validation_section(corpus)
    if candidates:
        validation_section(candidates)
    stats = feature_stats(corpus, config)
    cue_json, cue_profiles = cues_section(corpus, stats, config)
    step1, tables = step1_section(corpus, stats, config)
    rules = induce_rules(corpus, stats, config)
    profile = mine(corpus, stats, config, rules)
    report = {
        "artist": artist,
        "config": config.to_json(),
        "stats": stats.to_json(),
        "validation": validation,
        "cues": cue_json,
        "step1": step1,
        "step2": step2_section(rules, cue_profiles),
        "step3": step3_section(profile),
    }
    if candidates is not None:
        report["attribution"], _ = attribution_section(candidates, corpus, profile, tables,
                                                       stats, config)
    return report


def run_pipeline(manifest_path, config: PipelineConfig, candidates_path=None) -> dict:
    manifest, corpus = load_manifest(manifest_path)
    candidates = None
    if candidates_path is not None:
        _, candidates = load_manifest(candidates_path)
    return analyze(corpus, config, candidates, manifest.artist)


def write_atomic(path, text: str) -> None:
    """Write ``text`` via a temp file in the target directory and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(report: dict, path) -> None:
    write_atomic(path, canonical.dumps(report))
