"""Command-line entry point.

Usage:
    neoplast gen --seed 7 --count 30 --out corpus/
    neoplast gen --seed 7 --count 20 --defect diagonal_line --out offstyle/
    neoplast validate corpus/manifest.json --strict
    neoplast mine corpus/manifest.json --summary
    neoplast run corpus/manifest.json --candidates held/manifest.json --out report.json \
        --figures figs/
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import canonical
from .config import PipelineConfig
from .corpus_io import (
    load_composition, load_manifest, render_svg, serialize_composition, write_manifest,
)
from .diff import build_occurrence_tables
from .errors import NeoplastError
from .pipeline import (
    analyze, attribution_section, cues_section, feature_stats, mine, step1_section,
    step3_section, write_atomic, write_report,
)
from .scene import validate_composition
from .synth import GenParams, gen_neoplastic, gen_offstyle, perturb, random_ops


def _is_manifest(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return False
    return isinstance(doc, dict) and "compositions" in doc and "artist" in doc


def _emit(obj, out=None):
    text = canonical.dumps(obj)
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def cmd_validate(args, config):
    if _is_manifest(args.target):
        manifest, corpus = load_manifest(args.target)
        paths = [str(p) for p in manifest.paths()]
    else:
        corpus, paths = [load_composition(args.target)], [args.target]
    files, ok = [], True
    for c, path in zip(corpus, paths):
        vs = validate_composition(c, strict_style=args.strict)
        ok = ok and not vs
        files.append({"path": path, "id": c.id, "ordinal": c.ordinal,
                      "violations": [{"kind": v.kind, "element": v.element, "detail": v.detail}
                                     for v in vs]})
    _emit({"ok": ok, "strict_style": args.strict, "files": files})
    return 0 if ok else 1


def _gen_params(args, config):
    data = {}
    if args.params:
        data = json.loads(Path(args.params).read_text(encoding="utf-8"))
    seed = args.seed if args.seed is not None else config.seed
    return GenParams(**{**data, "seed": seed})


def _op_json(op):
    payload = {}
    for k, v in op.payload.items():
        if hasattr(v, "palette"):
            v = {"palette": v.palette} if v.palette else {"rgb": list(v.rgb)}
        elif isinstance(v, tuple):
            v = [float(x) for x in v]
        payload[k] = v
    return {"op": op.op, "payload": payload}


def cmd_gen(args, config):
    base = _gen_params(args, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names, truth = [], []
    if args.sequence:
        c = replace(gen_neoplastic(base), id=f"seq-{base.seed}-000", ordinal=0)
        comps = [c]
        for t in range(1, args.count):
            ops = random_ops(c, seed=base.seed * 1000 + t, n_ops=args.ops)
            c, changes = perturb(c, ops, seed=base.seed * 1000 + t)
            c = replace(c, id=f"seq-{base.seed}-{t:03d}")
            comps.append(c)
            truth.append({"t_curr": t, "ops": [_op_json(op) for op in ops],
                          "changes": [a.to_json() for a in changes]})
    else:
        comps = []
        for i in range(args.count):
            p = base.with_seed(base.seed + i)
            c = gen_neoplastic(p) if args.defect == "none" else gen_offstyle(p, args.defect,
                                                                             config.palette_tol)
            comps.append(replace(c, ordinal=i))
    for c in comps:
        name = f"{c.id}.json"
        write_atomic(out / name, serialize_composition(c))
        names.append(name)
    write_manifest(out / "manifest.json", args.artist, names)
    if truth:
        write_atomic(out / "ground_truth.json", canonical.dumps({"rules": truth}))
    sys.stderr.write(f"wrote {len(names)} compositions to {out}\n")
    return 0


def _load(args, config):
    manifest, corpus = load_manifest(args.manifest)
    return manifest, corpus, feature_stats(corpus, config)


def cmd_cues(args, config):
    _, corpus, stats = _load(args, config)
    section, _ = cues_section(corpus, stats, config)
    _emit({"stats": stats.to_json(), "cues": section}, args.out)
    return 0


def cmd_diff(args, config):
    _, corpus, stats = _load(args, config)
    step1, _ = step1_section(corpus, stats, config)
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ordinal", "id", "signature", "frequency"])
        for entry in step1:
            for sig, f in sorted(entry["occurrence_freqs"].items()):
                w.writerow([entry["ordinal"], entry["id"], sig, canonical.format_real(f)])
        write_atomic(args.csv, buf.getvalue())
    _emit({"stats": stats.to_json(), "step1": step1}, args.out)
    return 0


def cmd_mine(args, config):
    _, corpus, stats = _load(args, config)
    profile = mine(corpus, stats, config)
    if args.summary:
        sys.stdout.write(profile.summary())
    else:
        _emit({"step3": step3_section(profile)}, args.out)
    return 0


def cmd_score(args, config):
    _, corpus, stats = _load(args, config)
    _, candidates = load_manifest(args.candidates)
    profile = mine(corpus, stats, config)
    tables = build_occurrence_tables(corpus, stats)
    section, reports = attribution_section(candidates, corpus, profile, tables, stats, config)
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["candidate_id", "label", "score", "verdict", "satisfied", "violated"])
        for r in reports:
            w.writerow([r.candidate_id, r.label or "", canonical.format_real(r.score), r.verdict,
                        len(r.satisfied), len(r.violated)])
        sys.stdout.write(buf.getvalue())
    else:
        _emit({"attribution": section}, args.out)
    return 0


def cmd_run(args, config):
    manifest, corpus = load_manifest(args.manifest)
    candidates = None
    if args.candidates:
        _, candidates = load_manifest(args.candidates)
    report = analyze(corpus, config, candidates, manifest.artist)
    write_report(report, args.out)
    if args.figures:
        from .plots import write_figures

        for path in write_figures(report, args.figures):
            sys.stderr.write(f"figure: {path}\n")
    return 0


def cmd_render(args, config):
    c = load_composition(args.file)
    write_atomic(args.svg, render_svg(c))
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="pipeline config JSON (defaults otherwise)")
    parser = argparse.ArgumentParser(prog="neoplast", description="Analyze geometric-abstract "
                                     "compositions.", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common],
                       help="check a composition file or every file of a manifest")
    p.add_argument("target")
    p.add_argument("--strict", action="store_true", help="also enforce the neo-plastic style")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen", parents=[common], help="generate compositions and a manifest")
    p.add_argument("--seed", type=int, help="base seed (default: config seed / NEO_SEED)")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--defect", default="none",
                   choices=["none", "diagonal_line", "offpalette_color", "both"])
    p.add_argument("--sequence", action="store_true",
                   help="emit a chronological chain of perturbations plus ground truth")
    p.add_argument("--ops", type=int, default=2, help="perturbations per step with --sequence")
    p.add_argument("--params", help="JSON file with GenParams overrides")
    p.add_argument("--artist", default="synthetic")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    for name, func, helptext in [("cues", cmd_cues, "cue profiles per painting"),
                                 ("diff", cmd_diff, "step 1 metrics per painting"),
                                 ("mine", cmd_mine, "mined invariant profile")]:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("manifest")
        p.add_argument("--out", help="write JSON here instead of stdout")
        if name == "diff":
            p.add_argument("--csv", help="also export occurrence frequencies as CSV")
        if name == "mine":
            p.add_argument("--summary", action="store_true", help="plain-text summary")
        p.set_defaults(func=func)

    p = sub.add_parser("score", parents=[common],
                       help="score candidates against the corpus profile")
    p.add_argument("manifest")
    p.add_argument("--candidates", required=True)
    p.add_argument("--csv", action="store_true", help="one CSV row per candidate")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("run", parents=[common], help="full pipeline into one report")
    p.add_argument("manifest")
    p.add_argument("--candidates")
    p.add_argument("--out", required=True)
    p.add_argument("--figures", help="directory for PNG figures")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("render", parents=[common], help="render a composition to SVG")
    p.add_argument("file")
    p.add_argument("--svg", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = PipelineConfig.load(getattr(args, "config", None))
        return args.func(args, config)
    except (NeoplastError, OSError, ValueError) as exc:
        sys.stderr.write(f"neoplast: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
