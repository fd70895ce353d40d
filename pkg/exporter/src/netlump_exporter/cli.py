"""netlump-export: pull dense ReLU stacks out of torch/keras checkpoints.

Exit codes: 0 success, 1 round-trip deviation above tolerance, 2 the model
(or slice) cannot be exported or an input file is bad.
"""

from __future__ import annotations

import argparse
import sys

from .check import ROUNDTRIP_TOL, roundtrip_check
from .export import ExportRequest, export, manifest_path_for
from .extract import ExportError


def _cmd_export(args) -> int:
    req = ExportRequest(source=args.source, kind=args.kind,
                        out=args.out, layers=args.layers)
    manifest = export(req)
    print(f"wrote {len(manifest['layers'])} layers to {args.out}")
    print(f"manifest: {manifest_path_for(args.out)}")
    return 0


def _cmd_check(args) -> int:
    dev = roundtrip_check(args.source, args.kind, args.layers, args.doc,
                          samples=args.samples, seed=args.seed)
    print(f"max_deviation: {dev!r}")
    return 1 if dev > ROUNDTRIP_TOL else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="netlump-export",
        description="export dense ReLU stacks to network documents")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("export", help="write a network document + manifest")
    sp.add_argument("--source", required=True, help="model checkpoint file")
    sp.add_argument("--kind", required=True, choices=["torch", "keras"])
    sp.add_argument("--layers", default=None,
                    help="dense-layer range A..B, 1-based inclusive "
                         "(default: all)")
    sp.add_argument("--out", required=True, help="network document path")
    sp.set_defaults(func=_cmd_export)

    sp = sub.add_parser("check",
                        help="compare framework forward vs `netlump eval`")
    sp.add_argument("--source", required=True)
    sp.add_argument("--kind", required=True, choices=["torch", "keras"])
    sp.add_argument("--layers", default=None)
    sp.add_argument("--doc", required=True, help="exported network document")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, required=True)
    sp.set_defaults(func=_cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ExportError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
