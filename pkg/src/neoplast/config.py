"""Pipeline configuration with documented defaults and range checks."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields

from .cues import DEFAULT_CUE_NORMS

SEED_ENV = "NEO_SEED"


def _default_norms():
    return {k: list(v) for k, v in DEFAULT_CUE_NORMS.items()}


@dataclass
class PipelineConfig:
    palette_tol: int = 32          # per-channel Chebyshev tolerance, 0..255
    epsilon: float = 0.01          # border contact and adjacency gap, canvas units
    drop_threshold: float = 0.5    # prior co-occurrence frequency that counts as "dropped"
    iou_min: float = 0.5           # minimum IoU for element correspondence
    scope_tau: float = 0.30        # affected canvas fraction for a global rule
    flex_k: int = 3                # prior rules compared for flexibility
    support_theta: float = 0.9     # invariant support threshold
    verdict_threshold: float = 0.8
    seed: int = 0
    cue_norms: dict = field(default_factory=_default_norms)

    def __post_init__(self):
        self.validate()

    def validate(self):
        def check(name, ok):
            if not ok:
                raise ValueError(f"config value {name}={getattr(self, name)!r} out of range")

        check("palette_tol", isinstance(self.palette_tol, int) and 0 <= self.palette_tol <= 255)
        check("epsilon", 0 < self.epsilon < 0.5)
        check("drop_threshold", 0 <= self.drop_threshold <= 1)
        check("iou_min", 0 < self.iou_min <= 1)
        check("scope_tau", 0 <= self.scope_tau <= 1)
        check("flex_k", isinstance(self.flex_k, int) and self.flex_k >= 1)
        check("support_theta", 0 < self.support_theta <= 1)
        check("verdict_threshold", 0 <= self.verdict_threshold <= 1)
        check("seed", isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64)
        unknown = set(self.cue_norms) - set(DEFAULT_CUE_NORMS)
        if unknown:
            raise ValueError(f"unknown cue names {sorted(unknown)}")
        norms = _default_norms()
        norms.update({k: list(v) for k, v in self.cue_norms.items()})
        for k, (lo, hi) in norms.items():
            if not lo < hi:
                raise ValueError(f"cue norm for {k} needs lo < hi")
        self.cue_norms = norms

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**data)

    @classmethod
    def load(cls, path=None, env=None) -> "PipelineConfig":
        """Read a JSON config (or defaults) and apply the seed environment override."""
        data = {}
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        env = os.environ if env is None else env
        if env.get(SEED_ENV):
            data["seed"] = int(env[SEED_ENV])
        return cls.from_dict(data)

    def norms(self) -> dict:
        return {k: tuple(v) for k, v in self.cue_norms.items()}

    def to_json(self) -> dict:
        out = asdict(self)
        out["epsilon"] = float(self.epsilon)
        for k in ("drop_threshold", "iou_min", "scope_tau", "support_theta", "verdict_threshold"):
            out[k] = float(out[k])
        out["cue_norms"] = {k: [float(a), float(b)] for k, (a, b) in self.cue_norms.items()}
        return out
