"""Command line interface.

Subcommands: reduce, check, eval, verify, relax, ctmc reduce, ctmc check,
gen, bench fig3.  Exit codes: 0 success, 1 a verification ran and failed,
2 rejected input, 3 internal self-check failure.  Given identical arguments
and input files, every command writes byte-identical output files.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import bench, chains, formats
from .errors import ToolError
from .lumping import check_lumpability, max_lumpability
from .network import forward
from .quotient import reduce_network, reduction_report
from .relax import eliminate, find_linear_dependencies, sign_condition_rate


def _widths(text: str) -> tuple[int, ...]:
    try:
        widths = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad width list {text!r}")
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise argparse.ArgumentTypeError("need at least two positive widths")
    return widths


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}")


def _cmd_reduce(args) -> int:
    net = formats.load_network(args.input)
    t0 = time.perf_counter()
    lump = max_lumpability(net, args.mode, args.tol)
    t1 = time.perf_counter()
    reduced = reduce_network(net, lump, args.tol)
    t2 = time.perf_counter()
    formats.save_network(reduced, args.output)
    report = reduction_report(net, reduced, lump, t1 - t0, t2 - t1)
    if args.lumping:
        formats.save_lumping(lump, args.lumping)
    if args.report:
        formats.save_reduction_report(report, args.report)
    print(f"neurons: {report.neurons_before} -> {report.neurons_after} "
          f"(merged {report.neurons_merged})")
    return 0


def _cmd_check(args) -> int:
    net = formats.load_network(args.input)
    lump = formats.load_lumping(args.lumping)
    violations = check_lumpability(net, lump, args.tol,
                                   plain_sums=args.plain_sums)
    for v in violations:
        print(f"layer {v.layer} block {v.block} neurons "
              f"({v.neuron_a}, {v.neuron_b}) component {v.component}")
    if violations:
        print(f"FAIL: {len(violations)} violated equations")
        return 1
    print("OK")
    return 0


def _cmd_eval(args) -> int:
    net = formats.load_network(args.input)
    x = formats.load_valuation(args.x)
    y = forward(net, x)
    print(json.dumps(formats.valuation_document(y)))
    return 0


def _cmd_verify(args) -> int:
    a = formats.load_network(args.a)
    b = formats.load_network(args.b)
    if a.input_width != b.input_width or a.output_width != b.output_width:
        from .errors import InputError
        raise InputError("networks have different input or output widths")
    rng = np.random.default_rng(args.seed)
    x = rng.uniform(-1.0, 1.0, size=(args.samples, a.input_width))
    ya, yb = forward(a, x), forward(b, x)
    deviation = bench.max_deviation(ya, yb)
    agreement = bench.argmax_agreement(ya, yb)
    print(f"max_deviation: {deviation!r}")
    print(f"argmax_agreement: {agreement!r}")
    return 0 if deviation <= args.tol else 1


def _cmd_relax(args) -> int:
    net = formats.load_network(args.input)
    elims = find_linear_dependencies(net, args.layer, args.k_max, args.tol)
    relaxed = eliminate(net, elims)
    formats.save_network(relaxed, args.output)
    sign = sign_condition_rate(net, elims, args.sign_samples, args.seed)
    if args.report:
        formats.save_relax_report(args.layer, args.k_max, elims, sign,
                                  args.report)
    print(f"eliminated {len(elims)} neurons; "
          f"sign condition fraction {sign.fraction!r}")
    return 0


def _cmd_ctmc_reduce(args) -> int:
    chain = formats.load_chain(args.input)
    sp = chains.max_lumping(chain, args.mode, args.tol)
    quotient = chains.quotient_chain(chain, sp, args.tol)
    formats.save_chain(quotient, args.output)
    if args.partition:
        formats.save_state_partition(sp, args.partition)
    print(f"states: {chain.n} -> {quotient.n}")
    return 0


def _cmd_ctmc_check(args) -> int:
    chain = formats.load_chain(args.input)
    sp = formats.load_state_partition(args.partition)
    violations = chains.check_lumping(chain, sp, args.tol)
    for v in violations:
        print(f"block {v.block} states ({v.state_a}, {v.state_b}) "
              f"donor block {v.donor_block}")
    if violations:
        print(f"FAIL: {len(violations)} violated equations")
        return 1
    print("OK")
    return 0


def _cmd_gen(args) -> int:
    spec = bench.PlantSpec(args.kind, args.count, layer=args.layer, k=args.k,
                           coeff_lo=args.coeff_lo, coeff_hi=args.coeff_hi,
                           grid=args.grid)
    net, truth = bench.gen_planted(args.widths, spec, args.seed)
    formats.save_network(net, args.output)
    if args.truth:
        formats.save_relax_report(args.layer, args.k, truth, None, args.truth)
    print(f"planted {len(truth)} neurons in layer {args.layer}")
    return 0


def _cmd_bench_fig3(args) -> int:
    rows = bench.degradation_sweep(args.widths, args.ks, args.fractions,
                                   args.seeds, args.samples, args.seed)
    bench.write_sweep_csv(rows, args.output)
    print(f"wrote {len(rows)} rows to {args.output}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="netlump",
        description="Merge equivalent neurons of feed-forward ReLU networks; "
                    "also reduces continuous-time Markov chains the same way.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_tol(sp):
        sp.add_argument("--tol", type=float, default=1e-9,
                        help="relative tolerance (default 1e-9)")

    sp = sub.add_parser("reduce", help="detect merges and write the reduced network")
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", required=True)
    sp.add_argument("--mode", choices=["proportional", "exact"],
                    default="proportional")
    add_tol(sp)
    sp.add_argument("--lumping", help="also write the detected lumping document")
    sp.add_argument("--report", help="also write a reduction report")
    sp.set_defaults(func=_cmd_reduce)

    sp = sub.add_parser("check", help="verify a lumping document against a network")
    sp.add_argument("--input", required=True)
    sp.add_argument("--lumping", required=True)
    add_tol(sp)
    sp.add_argument("--plain-sums", action="store_true",
                    help="diagnostic: check literal unweighted input sums")
    sp.set_defaults(func=_cmd_check)

    sp = sub.add_parser("eval", help="run a forward pass, print the output")
    sp.add_argument("--input", required=True)
    sp.add_argument("--x", required=True, help="valuation document (JSON array)")
    sp.set_defaults(func=_cmd_eval)

    sp = sub.add_parser("verify", help="compare two networks on random inputs")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--tol", type=float, default=1e-6,
                    help="max allowed output deviation (default 1e-6)")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("relax", help="eliminate positive-combination neurons")
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", required=True)
    sp.add_argument("--layer", type=int, required=True,
                    help="hidden layer to scan (1 = first hidden layer)")
    sp.add_argument("--k-max", type=int, default=2,
                    help="maximum donors per eliminated neuron")
    add_tol(sp)
    sp.add_argument("--sign-samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--report", help="also write an elimination report")
    sp.set_defaults(func=_cmd_relax)

    ctmc = sub.add_parser("ctmc", help="Markov chain / labelled graph commands")
    csub = ctmc.add_subparsers(dest="ctmc_command", required=True)

    sp = csub.add_parser("reduce", help="lump states and write the quotient chain")
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", required=True)
    sp.add_argument("--mode", choices=["proportional", "exact"],
                    default="proportional")
    add_tol(sp)
    sp.add_argument("--partition", help="also write the state partition document")
    sp.set_defaults(func=_cmd_ctmc_reduce)

    sp = csub.add_parser("check", help="verify a state partition document")
    sp.add_argument("--input", required=True)
    sp.add_argument("--partition", required=True)
    add_tol(sp)
    sp.set_defaults(func=_cmd_ctmc_check)

    sp = sub.add_parser("gen", help="generate a network with planted redundancy")
    sp.add_argument("--output", required=True)
    sp.add_argument("--widths", type=_widths, default=(16, 128, 10),
                    help="comma separated layer widths (default 16,128,10)")
    sp.add_argument("--kind", choices=["proportional", "combo"],
                    default="proportional")
    sp.add_argument("--count", type=int, required=True,
                    help="how many neurons to plant")
    sp.add_argument("--layer", type=int, default=1)
    sp.add_argument("--k", type=int, default=2,
                    help="donors per planted neuron (combo kind)")
    sp.add_argument("--coeff-lo", type=float, default=0.5)
    sp.add_argument("--coeff-hi", type=float, default=1.5)
    sp.add_argument("--grid", action="store_true",
                    help="draw integer coefficients")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--truth", help="also write the ground-truth document")
    sp.set_defaults(func=_cmd_gen)

    bench_p = sub.add_parser("bench", help="benchmark experiments")
    bsub = bench_p.add_subparsers(dest="bench_command", required=True)

    sp = bsub.add_parser("fig3", help="argmax degradation sweep, written as CSV")
    sp.add_argument("--output", required=True)
    sp.add_argument("--widths", type=_widths, default=(16, 128, 10))
    sp.add_argument("--ks", type=_int_list, default=(2, 3, 4))
    sp.add_argument("--fractions", type=_float_list,
                    default=(0.0, 0.1, 0.25, 0.5))
    sp.add_argument("--seeds", type=int, default=10,
                    help="number of seed repetitions per cell")
    sp.add_argument("--samples", type=int, default=256)
    sp.add_argument("--seed", type=int, required=True)
    sp.set_defaults(func=_cmd_bench_fig3)

    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ToolError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
