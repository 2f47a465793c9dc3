"""Command-line surface.

Subcommands: analyze, cover, join, short, replay, ball, gallery.
Exit codes: 0 success (or positive verdict), 1 negative verdict on a
yes/no question, 2 input validation problem, 3 certificate failure.
Reports are deterministic json (sorted keys, no timestamps).
"""

from __future__ import annotations

import argparse
import json
import sys

from .gallery import gallery as make_gallery
from .chains import (
    HomotopyCertificate,
    SearchBudget,
    certificate_from_file,
    is_short,
    validate_chain,
)
from .cover import build_cover_ball, uniform_cover_verdict
from .errors import CertificateError, RipscoverError, ValidationError
from .space import (
    FiniteSpace,
    ScaleLadder,
    SpaceMap,
    dump_space,
    entourage_at,
    load_space,
    space_from_json,
)
from .tower import build_tower, g_entourage, joinability_witness, uniform_joinability_audit

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INVALID = 2
EXIT_CERTIFICATE = 3


def _dump(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _budget(args) -> SearchBudget:
    return SearchBudget(
        states=args.budget_states,
        max_length=args.max_chain_length,
        class_norm=args.class_norm,
    )


def _load_input(args) -> tuple[FiniteSpace, ScaleLadder | None]:
    if getattr(args, "gallery", None):
        g = make_gallery(args.gallery)
        return g.space, g.ladder
    if getattr(args, "space", None):
        return load_space(args.space), None
    raise ValidationError("provide --gallery or --space")


def _resolve_ladder(args, space: FiniteSpace, recommended: ScaleLadder | None) -> ScaleLadder:
    """'auto', comma thresholds like '3,1', or count+range like '4@3:0.5'."""
    spec = getattr(args, "ladder", None)
    if spec in (None, "auto"):
        if recommended is None:
            raise ValidationError("no recommended ladder for this input; pass --ladder")
        return recommended
    try:
        if "@" in spec:
            count, rng = spec.split("@", 1)
            hi, lo = (float(v) for v in rng.split(":", 1))
            count = int(count)
            if count < 2 or hi <= lo:
                raise ValueError("count+range needs count >= 2 and hi > lo")
            step = (hi - lo) / (count - 1)
            thresholds = [hi - i * step for i in range(count)]
        else:
            thresholds = [float(v) for v in spec.split(",")]
    except ValueError as e:
        raise ValidationError(f"bad ladder spec {spec!r}: {e}") from e
    return ScaleLadder.from_thresholds(space, thresholds, strict=args.strict_thresholds)


def _config_block(args) -> dict:
    return {
        "seed": args.seed,
        "budget": {
            "states": args.budget_states,
            "max_chain_length": args.max_chain_length,
            "class_norm": args.class_norm,
        },
        "strict_thresholds": args.strict_thresholds,
    }


def cmd_analyze(args) -> int:
    space, recommended = _load_input(args)
    ladder = _resolve_ladder(args, space, recommended)
    basepoint = space.index_of(args.basepoint) if args.basepoint is not None else (
        space.distinguished[0][1] if space.distinguished else 0
    )
    tower = build_tower(space, ladder, basepoint)
    doc = tower.to_json()
    doc["skeletons"] = [
        {
            "scale": ladder.describe(i),
            "edges": len(sk.edges),
            "triangles": len(sk.triangles),
        }
        for i, sk in enumerate(tower.skeletons)
    ]
    if args.audit:
        doc["joinability_audit"] = uniform_joinability_audit(space, ladder, _budget(args))
    if args.certified_pairs is not None:
        target = entourage_at(space, float(args.certified_pairs), strict=args.strict_thresholds)
        _, rep = g_entourage(space, target, ladder, _budget(args))
        doc["certified_pairs"] = rep
    doc["config"] = _config_block(args)
    if args.format == "text":
        out = tower.text_table() + "\n"
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(out)
        else:
            sys.stdout.write(out)
    else:
        _dump(doc, args.output)
    return EXIT_OK


def _load_map(path: str) -> tuple[SpaceMap, list | None]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    try:
        source = space_from_json(doc["source"]) if isinstance(doc["source"], dict) else load_space(doc["source"])
        target = space_from_json(doc["target"]) if isinstance(doc["target"], dict) else load_space(doc["target"])
        assign = doc["assign"]
    except KeyError as e:
        raise ValidationError(f"map file is missing {e}") from e
    return SpaceMap(source, target, assign), doc.get("ladder")


def cmd_cover(args) -> int:
    f, ladder_doc = _load_map(args.map)
    if args.ladder and args.ladder != "auto":
        ladder = _resolve_ladder(args, f.source, None)
    elif ladder_doc is not None:
        ladder = ScaleLadder.from_json(f.source, ladder_doc)
    else:
        raise ValidationError("no ladder: add one to the map file or pass --ladder")
    report = uniform_cover_verdict(f, ladder, _budget(args), threads=args.threads)
    doc = report.to_json()
    doc["config"] = _config_block(args)
    _dump(doc, args.output)
    positive = report.verdicts["uniform_covering_map_at_ladder"]
    return EXIT_OK if positive else EXIT_NEGATIVE


def _write_certificate(cert: HomotopyCertificate, args) -> str:
    path = args.certificate_out or "certificate.json"
    with open(path, "w") as fh:
        json.dump(cert.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def cmd_join(args) -> int:
    space, recommended = _load_input(args)
    ladder = _resolve_ladder(args, space, recommended) if args.ladder else None
    names = args.pair.split(",")
    if len(names) != 2:
        raise ValidationError("--pair needs two comma-separated points")
    x, y = (space.index_of(s.strip()) for s in names)
    target = entourage_at(space, float(args.target), strict=args.strict_thresholds)
    if args.fine is not None:
        fine = entourage_at(space, float(args.fine), strict=args.strict_thresholds)
    elif ladder is not None:
        fine = ladder.finest()
    else:
        raise ValidationError("pass --fine or a ladder")
    verdict = joinability_witness(space, x, y, target, fine, _budget(args))
    doc = verdict.to_json()
    doc.update({"schema": 1, "kind": "joinability", "config": _config_block(args)})
    if verdict.verdict.is_yes() and verdict.verdict.certificate is not None:
        doc["certificate_file"] = _write_certificate(verdict.verdict.certificate, args)
    _dump(doc, args.output)
    return EXIT_OK if not verdict.verdict.is_no() else EXIT_NEGATIVE


def cmd_short(args) -> int:
    try:
        with open(args.chain) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{args.chain}:{e.lineno}:{e.colno}: {e.msg}") from e
    try:
        space = space_from_json(doc["space"]) if isinstance(doc["space"], dict) else load_space(doc["space"])
        seq = [int(v) for v in doc["seq"]]
    except KeyError as e:
        raise ValidationError(f"chain file is missing {e}") from e
    scale = entourage_at(space, float(args.scale), strict=args.strict_thresholds)
    chain_scale = entourage_at(space, float(doc.get("eps", args.scale)), strict=args.strict_thresholds)
    chain = validate_chain(space, chain_scale, seq)
    verdict = is_short(chain, scale, _budget(args))
    out = verdict.to_json()
    out.update({"schema": 1, "kind": "shortness", "config": _config_block(args)})
    if verdict.is_yes() and verdict.certificate is not None:
        out["certificate_file"] = _write_certificate(verdict.certificate, args)
    _dump(out, args.output)
    return EXIT_OK if not verdict.is_no() else EXIT_NEGATIVE


def cmd_replay(args) -> int:
    cert = certificate_from_file(args.certificate)
    final = cert.replay()
    _dump(
        {
            "schema": 1,
            "kind": "replay",
            "ok": True,
            "moves": len(cert.moves),
            "end": list(final.seq),
        },
        args.output,
    )
    return EXIT_OK


def cmd_ball(args) -> int:
    space, recommended = _load_input(args)
    scale = entourage_at(space, float(args.eps), strict=args.strict_thresholds)
    basepoint = space.index_of(args.basepoint) if args.basepoint is not None else (
        space.distinguished[0][1] if space.distinguished else 0
    )
    ball = build_cover_ball(space, scale, basepoint, args.radius, _budget(args))
    if args.format == "dot":
        text = ball.to_dot() + "\n"
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        doc = ball.to_json()
        doc["config"] = _config_block(args)
        _dump(doc, args.output)
    return EXIT_OK


def cmd_gallery(args) -> int:
    g = make_gallery(args.name)
    if args.output:
        dump_space(g.space, args.output, ladder=g.ladder)
    else:
        doc = g.space.to_json()
        doc["recommended_ladder"] = g.ladder.to_json()
        _dump(doc, None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ripscover",
        description="Rips skeletons, chain homotopy, covering checks and scale towers",
    )
    parser.add_argument("--budget-states", type=int, default=50_000, help="search state budget")
    parser.add_argument("--max-chain-length", type=int, default=None, help="hard chain length bound (default 4n)")
    parser.add_argument("--class-norm", type=int, default=8, help="class-vector norm bound for witness searches")
    parser.add_argument("--seed", type=int, default=0, help="seed recorded in reports")
    parser.add_argument("--threads", type=int, default=1, help="worker cap for per-scale checks")
    parser.add_argument("--strict-thresholds", action="store_true", help="use < instead of <= for eps scales")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_io(p, gallery_input=True):
        if gallery_input:
            p.add_argument("--gallery", help="gallery spec like hexagon_ex72 or solenoid:2")
            p.add_argument("--space", help="space file (json / csv-points / csv-matrix)")
        p.add_argument("--output", help="write the report here instead of stdout")

    p = sub.add_parser("analyze", help="tower, diagnostics and skeleton summary")
    common_io(p)
    p.add_argument("--ladder", default="auto", help="'auto', comma thresholds like 3,1, or count+range like 4@3:0.5")
    p.add_argument("--basepoint", help="basepoint label or index")
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("--audit", action="store_true", help="include the joinability audit")
    p.add_argument("--certified-pairs", metavar="EPS", default=None,
                   help="include the certified-pair relation at this scale")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cover", help="covering-map report for a map file")
    p.add_argument("--map", required=True, help="json file with source, target, assign, ladder")
    p.add_argument("--ladder", default=None, help="override ladder (comma thresholds)")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("join", help="joinability witness for a pair")
    common_io(p)
    p.add_argument("--pair", required=True, help="two points, e.g. a,b")
    p.add_argument("--target", required=True, help="target eps")
    p.add_argument("--fine", default=None, help="fine eps (default: ladder's finest)")
    p.add_argument("--ladder", default=None, help="'auto' or comma thresholds")
    p.add_argument("--certificate-out", help="where to write the Yes certificate")
    p.set_defaults(func=cmd_join)

    p = sub.add_parser("short", help="is a chain short at a scale")
    p.add_argument("--chain", required=True, help="json file with space, seq, eps")
    p.add_argument("--scale", required=True, help="scale eps to test shortness at")
    p.add_argument("--certificate-out", help="where to write the Yes certificate")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_short)

    p = sub.add_parser("replay", help="re-verify a certificate file")
    p.add_argument("certificate", help="certificate json file")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("ball", help="bounded chain-class ball over a basepoint")
    common_io(p)
    p.add_argument("--eps", required=True, help="scale eps")
    p.add_argument("--basepoint", help="basepoint label or index")
    p.add_argument("--radius", type=int, default=5)
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.set_defaults(func=cmd_ball)

    p = sub.add_parser("gallery", help="dump a gallery space with its ladder")
    p.add_argument("name", help="gallery spec like hexagon_ex72 or solenoid:2,64,4,1")
    p.add_argument("--output", help="write the space json here instead of stdout")
    p.set_defaults(func=cmd_gallery)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CertificateError as e:
        print(f"certificate error: {e}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except FileNotFoundError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except RipscoverError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
