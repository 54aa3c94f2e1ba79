"""Command-line front end.

Exit codes: 0 pass/Spectral, 1 fail/NotSpectral, 2 Unknown/Inconclusive,
3 input error. With --json a machine-readable report (schema 1) goes to
stdout; diagnostics always go to stderr. Reports are byte-identical for
identical inputs: timings are omitted unless --timings is given.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import __version__
from .analyzer import completeness_scan, verify_orthogonality
from .builder import (
    block_size_parameters,
    build_blocks,
    choose_block_size,
    normalize_first_level,
    spectrum_levels,
)
from .decider import admissibility_scan, decide
from .errors import MoranError, ValidationFailure
from .render import render, support_points
from .specfile import load_system

SCHEMA = 1


def _sanitize(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return obj.item()
    return obj


def _emit(args, payload, exit_code, start):
    payload = {"schema": SCHEMA, "command": args.command, **payload}
    payload["timings"] = {"seconds": round(time.monotonic() - start, 3)} if args.timings else None
    if args.json:
        print(json.dumps(_sanitize(payload), sort_keys=True, indent=2))
    else:
        _print_human(payload)
    return exit_code


def _print_human(payload):
    skip = {"schema", "command", "timings"}
    print(f"[{payload['command']}]")
    for key, value in payload.items():
        if key in skip or value is None:
            continue
        print(f"  {key}: {_sanitize(value)}")
    if payload.get("timings"):
        print(f"  timings: {payload['timings']}")


def _system_summary(system):
    return {
        "dimension": system.dimension,
        "prime": system.prime,
        "preamble_levels": len(system.preamble),
        "cycle_levels": len(system.cycle),
        "r": system.r,
        "delta": str(system.delta),
        "beta": str(system.beta),
        "c": system.c,
    }


def cmd_validate(args, start):
    system = load_system(args.file)
    payload = {
        "report": "valid",
        "params": _system_summary(system),
        "zero_directions": {
            str(k): [list(nu) for nu in lvl.zeros.directions] for k, lvl in system.distinct_levels()
        },
    }
    return _emit(args, payload, 0, start)


def cmd_zeros(args, start):
    system = load_system(args.file)
    table = {}
    for k, lvl in system.distinct_levels():
        table[str(k)] = [
            {"direction": list(nu), "model_compliant": ok}
            for nu, ok in zip(lvl.zeros.directions, lvl.zeros.model_compliant)
        ]
    return _emit(args, {"report": table, "params": _system_summary(system)}, 0, start)


def cmd_decide(args, start):
    system = load_system(args.file)
    verdict = decide(system, horizon=args.horizon)
    payload = {
        "verdict": verdict.outcome,
        "criterion": verdict.criterion,
        "witnesses": verdict.certificate.get("witness"),
        "certificate": verdict.certificate,
        "caveats": list(verdict.caveats),
        "params": _system_summary(system),
    }
    return _emit(args, payload, verdict.exit_code, start)


def _prepare_blocks(system, args, levels_needed):
    normalized, record = normalize_first_level(system)
    if args.block_size is not None:
        K = args.block_size
    else:
        K = choose_block_size(normalized)
        while args.cap and normalized.prime ** (K * (levels_needed + 1)) > args.cap and K > 1:
            K -= 1
    decomp = build_blocks(normalized, K=K, blocks=levels_needed + 1)
    return normalized, record, decomp


def cmd_spectrum(args, start):
    system = load_system(args.file)
    normalized, record, decomp = _prepare_blocks(system, args, args.levels)
    levels = spectrum_levels(decomp, args.levels, cap=args.cap or 10**6)
    info = block_size_parameters(normalized)
    payload = {
        "report": {
            "block_size": decomp.K,
            "certified_block_size": info.block,
            "meets_certified_bound": decomp.meets_certified_bound,
            "level_sizes": [lvl.size for lvl in levels],
            "containment_checked": [lvl.containment_checked for lvl in levels],
            "normalized_first_level": not record.is_identity,
            "spectrum_transform_back": [[str(v) for v in row] for row in record.back.rows],
            "top_level_sample": [list(v) for v in levels[-1].elements[:10]],
        },
        "params": _system_summary(system),
    }
    return _emit(args, payload, 0, start)


def cmd_verify_orth(args, start):
    system = load_system(args.file)
    normalized, _, decomp = _prepare_blocks(system, args, args.level)
    levels = spectrum_levels(decomp, args.level, cap=args.cap or 10**6, enforce_containment=False)
    report = verify_orthogonality(normalized, levels[args.level].elements)
    payload = {
        "report": {
            "passed": report.passed,
            "block_size": decomp.K,
            "level": args.level,
            "points": report.details["points"],
            "distinct_differences": report.details["distinct_differences"],
        },
        "witnesses": [list(map(list, w)) for w in report.witnesses[:10]],
        "params": _system_summary(system),
    }
    return _emit(args, payload, 0 if report.passed else 1, start)


def cmd_verify_complete(args, start):
    system = load_system(args.file)
    normalized, _, decomp = _prepare_blocks(system, args, args.levels)
    levels = spectrum_levels(decomp, args.levels, cap=args.cap or 10**6)
    report = completeness_scan(
        normalized,
        levels,
        grid=args.grid,
        depth=args.depth,
        extra_points=args.extra_points,
        seed=args.seed,
        gap_tol=args.gap_tol,
    )
    payload = {
        "report": {
            "passed": report.passed,
            "block_size": decomp.K,
            **report.details,
        },
        "witnesses": [list(map(str, w)) for w in report.witnesses[:10]],
        "params": _system_summary(system),
    }
    return _emit(args, payload, 0 if report.passed else 1, start)


def cmd_admissible(args, start):
    system = load_system(args.file)
    result = admissibility_scan(system, horizon=args.horizon)
    payload = {
        "report": {
            "status": result.status,
            "unconditional": result.unconditional,
            "horizon": result.horizon,
            "tail_start": result.tail_start,
            "start_level": result.start_level,
            "products_checked": result.products_checked,
        },
        "witnesses": result.witness,
        "caveats": list(result.caveats),
        "params": _system_summary(system),
    }
    return _emit(args, payload, result.exit_code, start)


def cmd_render(args, start):
    system = load_system(args.file)
    cloud = support_points(system, args.level, cap=args.cap or 200_000)
    out = render(cloud, args.format, args.out, size=args.size)
    lo, hi = cloud.bounding_box()
    payload = {
        "report": {
            "points": cloud.size,
            "depth": cloud.depth,
            "format": args.format,
            "out": str(out),
            "bounding_box": [[str(v) for v in lo], [str(v) for v in hi]],
        },
        "params": _system_summary(system),
    }
    return _emit(args, payload, 0, start)


def build_parser():
    parser = argparse.ArgumentParser(prog="moranspec", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="system description JSON")
        p.add_argument("--json", action="store_true", help="machine-readable report on stdout")
        p.add_argument("--timings", action="store_true", help="include wall-clock timings (breaks byte-for-byte reproducibility)")

    p = sub.add_parser("validate", help="structural checks of a system file")
    common(p)

    p = sub.add_parser("zeros", help="zero directions per level")
    common(p)

    p = sub.add_parser("decide", help="spectrality decision")
    common(p)
    p.add_argument("--horizon", type=int, default=None)

    p = sub.add_parser("spectrum", help="build candidate spectrum levels")
    common(p)
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--block-size", type=int, default=None)
    p.add_argument("--cap", type=int, default=None)

    p = sub.add_parser("verify-orth", help="exact orthogonality of a spectrum level")
    common(p)
    p.add_argument("--level", type=int, default=2)
    p.add_argument("--block-size", type=int, default=None)
    p.add_argument("--cap", type=int, default=10**4)

    p = sub.add_parser("verify-complete", help="sampled completeness scan")
    common(p)
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--block-size", type=int, default=None)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--gap-tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--extra-points", type=int, default=16)

    p = sub.add_parser("admissible", help="certify the padded-box condition")
    common(p)
    p.add_argument("--horizon", type=int, default=None)

    p = sub.add_parser("render", help="emit attractor point clouds")
    common(p)
    p.add_argument("--level", type=int, default=2)
    p.add_argument("--format", choices=("csv", "svg", "ppm"), default="csv")
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--cap", type=int, default=None)

    return parser


_HANDLERS = {
    "validate": cmd_validate,
    "zeros": cmd_zeros,
    "decide": cmd_decide,
    "spectrum": cmd_spectrum,
    "verify-orth": cmd_verify_orth,
    "verify-complete": cmd_verify_complete,
    "admissible": cmd_admissible,
    "render": cmd_render,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.monotonic()
    try:
        return _HANDLERS[args.command](args, start)
    except ValidationFailure as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        if args.json:
            doc = {"schema": SCHEMA, "command": args.command, "error": {"code": exc.code, "message": str(exc)}}
            print(json.dumps(_sanitize(doc), sort_keys=True, indent=2))
        return 3
    except MoranError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        if args.json:
            doc = {"schema": SCHEMA, "command": args.command, "error": {"code": type(exc).__name__, "message": str(exc)}}
            print(json.dumps(_sanitize(doc), sort_keys=True, indent=2))
        return 3


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
