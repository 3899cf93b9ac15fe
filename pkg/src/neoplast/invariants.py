"""Rule components, flexibility and invariant mining over a rule trace."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from .cues import compute_cues
from .rules import added_signatures, context_token, eliminated_signatures
from .scene import PALETTE, signatures

COMPONENTS = ("what", "when", "how", "flexibility")


@dataclass(frozen=True)
class RuleComponents:
    t_curr: int
    what: frozenset
    when: frozenset
    how: tuple
    flexibility: Optional[float] = None

    def items(self) -> set:
        """Every (component, item) pair this rule exhibits."""
        out = {("what", f"{role}:{tok}") for role, tok in self.what}
        out |= {("when", tok) for tok in self.when}
        out |= {("how", tok) for tok in self.how}
        if self.flexibility is not None:
            out.add(("flexibility", flexibility_level(self.flexibility)))
        return out

    def to_json(self) -> dict:
        return {
            "t_curr": self.t_curr,
            "what": [f"{role}:{tok}" for role, tok in sorted(self.what)],
            "when": sorted(self.when),
            "how": list(self.how),
            "flexibility": self.flexibility,
        }


def rule_components(rule) -> RuleComponents:
    what = {("added", s.token()) for s in added_signatures(rule)}
    what |= {("eliminated", s.token()) for s in eliminated_signatures(rule)}
    return RuleComponents(
        t_curr=rule.t_curr,
        what=frozenset(what),
        when=frozenset(context_token(x) for x in rule.when_context),
        how=tuple(a.token() for a in rule.changes),
    )


def levenshtein(a, b) -> int:
    """Edit distance between two token sequences (unit insert/delete/substitute)."""
    if len(a) < len(b):
        a, b = b, a
    row = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        prev, row[0] = row[0], i
        for j, y in enumerate(b, 1):
            cur = min(row[j] + 1, row[j - 1] + 1, prev + (x != y))
            prev, row[j] = row[j], cur
    return row[-1]


def how_similarity(x, y) -> float:
    longest = max(len(x), len(y))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(x, y) / longest


def flexibility(r: RuleComponents, prior, k: int = 3) -> float:
    """One minus the mean how-similarity to the ``k`` most similar earlier rules.

    Ties in similarity prefer the earlier rule; no prior rules gives 0.
    """
    if not prior:
        return 0.0
    ranked = sorted((-how_similarity(r.how, p.how), p.t_curr) for p in prior)
    chosen = ranked[:min(k, len(ranked))]
    return 1.0 - sum(-s for s, _ in chosen) / len(chosen)


def flexibility_level(value: float) -> str:
    if value < 1.0 / 3.0:
        return "low"
    if value < 2.0 / 3.0:
        return "medium"
    return "high"


def with_flexibility(components, k: int = 3) -> list:
    """Attach flexibility to each rule, scored against the rules before it."""
    ordered = sorted(components, key=lambda rc: rc.t_curr)
    out = []
    for n, rc in enumerate(ordered):
        out.append(RuleComponents(rc.t_curr, rc.what, rc.when, rc.how,
                                  flexibility(rc, ordered[:n], k)))
    return out


# -- style predicates ---------------------------------------------------------

_ORIENT_ORDER = "HVD"


@dataclass(frozen=True)
class StylePredicate:
    name: str
    param: object = None

    @property
    def text(self) -> str:
        if self.name == "orientation_subset":
            inner = ",".join(c for c in _ORIENT_ORDER if c in self.param)
            return f"orientation_classes ⊆ {{{inner}}}"
        if self.name == "granularity_band":
            return f"granularity within [{self.param[0]}, {self.param[1]}]"
        return {
            "palette_colors": "color_classes ⊆ palette",
            "has_opposition": "opposition_count ≥ 1",
            "no_unfinished_lines": "unfinished_line_count = 0",
            "kinds": "element kinds ⊆ {line,region}",
        }[self.name]

    def holds(self, facts: dict) -> bool:
        if self.name == "orientation_subset":
            return facts["orientation_classes"] <= self.param
        if self.name == "palette_colors":
            return facts["color_classes"] <= set(PALETTE)
        if self.name == "has_opposition":
            return facts["opposition_count"] >= 1
        if self.name == "no_unfinished_lines":
            return facts["unfinished_line_count"] == 0
        if self.name == "granularity_band":
            return self.param[0] <= facts["granularity"] <= self.param[1]
        if self.name == "kinds":
            return facts["kinds"] <= {"line", "region"}
        raise ValueError(f"unknown predicate {self.name!r}")


def painting_facts(c, stats) -> dict:
    sigs = signatures(c, stats)
    cues = compute_cues(c, stats)
    return {
        "orientation_classes": {s.orientation_class for s in sigs if s.kind == "line"},
        "color_classes": {s.color_class for s in sigs},
        "opposition_count": cues.opposition_count,
        "unfinished_line_count": cues.unfinished_line_count,
        "granularity": cues.granularity,
        "kinds": {s.kind for s in sigs},
    }


def style_vocabulary(facts_list) -> list:
    """The closed predicate vocabulary; the granularity band comes from the observed range."""
    vocab = []
    for size in range(4):
        for combo in combinations(_ORIENT_ORDER, size):
            vocab.append(StylePredicate("orientation_subset", frozenset(combo)))
    vocab += [StylePredicate("palette_colors"), StylePredicate("has_opposition"),
              StylePredicate("no_unfinished_lines")]
    if facts_list:
        g = [f["granularity"] for f in facts_list]
        vocab.append(StylePredicate("granularity_band", (min(g), max(g))))
    vocab.append(StylePredicate("kinds"))
    return vocab


@dataclass
class InvariantProfile:
    style_invariants: list = field(default_factory=list)        # (StylePredicate, support)
    rule_invariants: list = field(default_factory=list)         # (component, item, support)
    cooccurrence_invariants: list = field(default_factory=list)  # ((c, item), (c, item), support)
    theta: float = 0.9
    n_paintings: int = 0
    n_rules: int = 0
    flags: list = field(default_factory=list)
    history: list = field(default_factory=list)                 # RuleComponents, ordinal order

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "n_paintings": self.n_paintings,
            "n_nonempty_rules": self.n_rules,
            "flags": list(self.flags),
            "style_invariants": [{"predicate": p.text, "support": s}
                                 for p, s in self.style_invariants],
            "rule_invariants": [{"component": c, "item": i, "support": s}
                                for c, i, s in self.rule_invariants],
            "cooccurrence_invariants": [
                {"items": [f"{a[0]}:{a[1]}", f"{b[0]}:{b[1]}"], "support": s}
                for a, b, s in self.cooccurrence_invariants
            ],
        }

    def summary(self) -> str:
        lines = [f"invariant profile (theta={self.theta:g}, {self.n_paintings} paintings, "
                 f"{self.n_rules} non-empty rules)"]
        if self.flags:
            lines.append("flags: " + ", ".join(self.flags))
        lines.append("style invariants:")
        lines += [f"  {s:.3f}  {p.text}" for p, s in self.style_invariants] or ["  (none)"]
        lines.append("rule invariants:")
        lines += [f"  {s:.3f}  {c}: {i}" for c, i, s in self.rule_invariants] or ["  (none)"]
        lines.append("co-occurrence invariants:")
        lines += [f"  {s:.3f}  {a[0]}: {a[1]}  &  {b[0]}: {b[1]}"
                  for a, b, s in self.cooccurrence_invariants] or ["  (none)"]
        return "\n".join(lines) + "\n"


def mine_invariants(corpus, rules, theta: float = 0.9, stats=None, flex_k: int = 3,
                    facts=None) -> InvariantProfile:
    """Style predicates holding on at least ``theta`` of the paintings, plus rule items
    and cross-component item pairs present in at least ``theta`` of the non-empty rules.
    """
    facts = facts if facts is not None else [painting_facts(c, stats) for c in corpus]
    n = len(facts)
    profile = InvariantProfile(theta=theta, n_paintings=n)
    for pred in style_vocabulary(facts):
        support = sum(pred.holds(f) for f in facts) / n if n else 0.0
        if n and support >= theta:
            profile.style_invariants.append((pred, support))
    if n < 2:
        profile.flags.append("InsufficientData")
        return profile

    history = with_flexibility([rule_components(r) for r in rules], flex_k)
    profile.history = history
    active = [rc.items() for rc, r in zip(history, sorted(rules, key=lambda r: r.t_curr))
              if not r.is_empty]
    profile.n_rules = m = len(active)
    if not m:
        return profile
    counts = {}
    for items in active:
        for it in items:
            counts[it] = counts.get(it, 0) + 1
    order = {c: k for k, c in enumerate(COMPONENTS)}
    kept = sorted((it for it, k in counts.items() if k / m >= theta),
                  key=lambda it: (order[it[0]], it[1]))
    profile.rule_invariants = [(c, i, counts[(c, i)] / m) for c, i in kept]
    for a, b in combinations(kept, 2):
        if a[0] == b[0]:
            continue
        joint = sum(1 for items in active if a in items and b in items)
        if joint / m >= theta:
            profile.cooccurrence_invariants.append((a, b, joint / m))
    return profile
