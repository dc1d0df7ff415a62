"""lp2flow command line.

Exit codes: 0 success or pass, 1 failed verification or an infeasible
verdict, 2 bad usage or an unreadable document.
"""
import argparse
import sys
from fractions import Fraction

from . import io
from .mapback import map_back, map_back_chain
from .model import (FhfInstance, FphfInstance, KLenInstance, LenInstance,
                    LpInstance, NonnegVector, SffInstance, TwoCffInstance,
                    TwoCfrInstance)
from .oracle import (SizeGuardError, lp_feasible_exact, optimize_by_bisection,
                     twocf_solve_exact)
from .pipeline import compile as compile_lp
from .reduce import REDUCERS, SOURCE_CLASS, STAGES, TriviallyInfeasible, reduce_all
from .verify import CLASSES, check, class_of
from .witness import WitnessError, construct_witness, witness_all


class UsageError(Exception):
    pass


def _eps(text):
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("eps must be nonnegative")
    return v


def _load(path, *types):
    v = io.read(path)
    if types and not isinstance(v, types):
        raise UsageError(f"{path}: expected {' or '.join(t.__name__ for t in types)}, "
                         f"got {type(v).__name__}")
    return v


def _emit(path, value):
    if path is None or path == "-":
        sys.stdout.write(io.serialize(value))
    else:
        io.write(path, value)


def _stage_arg(args):
    if args.all == (args.stage is not None):
        raise UsageError("give exactly one of --stage NAME or --all")


_TYPES = {"lp": LpInstance, "len": LenInstance, "klen": KLenInstance, "fhf": FhfInstance,
          "fphf": FphfInstance, "sff": SffInstance, "2cff": TwoCffInstance,
          "2cfr": TwoCfrInstance}


def _check_source(stage, inst):
    want = _TYPES[SOURCE_CLASS[stage]]
    if not isinstance(inst, want):
        raise UsageError(f"stage {stage} reads {want.__name__}, got {type(inst).__name__}")


# ------------------------------------------------------------ subcommands

def cmd_reduce(args):
    _stage_arg(args)
    inst = io.read(args.input)
    if args.all:
        if not isinstance(inst, LpInstance):
            raise UsageError("--all starts from an LP document")
        instances, traces = reduce_all(inst)
        out, tr = instances[-1], traces
    else:
        _check_source(args.stage, inst)
        out, tr = REDUCERS[args.stage](inst)
    _emit(args.output, out)
    if args.trace:
        io.write(args.trace, tr)
    return 0


def cmd_witness(args):
    _stage_arg(args)
    inst = io.read(args.input)
    sol = io.read(args.solution)
    if args.all:
        if not isinstance(inst, LpInstance):
            raise UsageError("--all starts from an LP document")
        instances, traces = reduce_all(inst)
        out = witness_all(inst, sol, traces, instances)[-1]
    else:
        _check_source(args.stage, inst)
        _, tr = REDUCERS[args.stage](inst)
        out = construct_witness(args.stage, inst, sol, tr)
    _emit(args.output, out)
    return 0


def cmd_mapback(args):
    """IN is the source instance of the stage (the LP for --all); the mapped
    solution is checked against it and the report goes to stdout."""
    _stage_arg(args)
    inst = io.read(args.input)
    sol = io.read(args.solution)
    if args.all:
        if not isinstance(inst, LpInstance):
            raise UsageError("--all maps back to an LP document")
        traces = io.read(args.trace) if args.trace else reduce_all(inst)[1]
        if not isinstance(traces, list) or len(traces) != len(STAGES):
            raise UsageError("--all needs a trace chain with one trace per stage")
        out, _ = map_back_chain(sol, traces)
    else:
        _check_source(args.stage, inst)
        tr = io.read(args.trace) if args.trace else REDUCERS[args.stage](inst)[1]
        out = map_back(args.stage, sol, tr)
    _emit(args.output, out)
    _, rep = check(class_of(inst), inst, out, args.eps)
    print(rep.summary(), file=sys.stdout if args.output else sys.stderr)
    return 0


def cmd_verify(args):
    inst = io.read(args.input)
    sol = io.read(args.solution)
    ok, rep = check(args.cls, inst, sol, args.eps)
    print(rep.summary())
    return 0 if ok else 1


def cmd_oracle(args):
    inst = io.read(args.input)
    if args.kind == "lp":
        if not isinstance(inst, LpInstance):
            raise UsageError("oracle lp reads an LP document")
        feasible, x = lp_feasible_exact(inst)
        print("feasible" if feasible else "infeasible")
        if feasible and args.output:
            io.write(args.output, NonnegVector(x))
        return 0 if feasible else 1
    if args.kind == "2cf":
        if class_of(inst) != "2cfa":
            raise UsageError("oracle 2cf reads a 2CF document")
        feasible, flow = twocf_solve_exact(inst, max_edges=args.max_edges)
        print("feasible" if feasible else "infeasible")
        if feasible and args.output:
            io.write(args.output, flow)
        return 0 if feasible else 1
    # optimize: the K of the document is ignored
    if not isinstance(inst, LpInstance):
        raise UsageError("oracle optimize reads an LP document")
    if args.lo is None or args.hi is None:
        raise UsageError("oracle optimize needs --lo and --hi")
    best = optimize_by_bisection(inst.A, inst.b, inst.c, inst.R, args.lo, args.hi)
    if best is None:
        print("infeasible")
        return 1
    print(f"K = {best}")
    return 0


def cmd_pipeline(args):
    lp = _load(args.input, LpInstance)
    try:
        comp = compile_lp(lp, args.eps_lp)
    except TriviallyInfeasible as exc:
        print(f"infeasible: {exc}")
        return 1
    _emit(args.output, comp.cf)
    if args.report:
        io.write(args.report, comp.report)
    if args.trace:
        io.write(args.trace, list(comp.traces))
    if args.budget:
        io.write(args.budget, comp.budget)
    for a in comp.report.failed():
        print(a.line(), file=sys.stderr)
    return 0 if comp.report.ok else 1


def cmd_stats(args):
    lp = _load(args.input, LpInstance)
    try:
        comp = compile_lp(lp, args.eps_lp)
    except TriviallyInfeasible as exc:
        print(f"infeasible: {exc}")
        return 1
    for line in comp.report.lines():
        print(line)
    return 0 if comp.report.ok else 1


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="lp2flow",
                                description="Compile LPs into 2-commodity flow instances and back.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def staged(name, helptext):
        sp = sub.add_parser(name, help=helptext)
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--stage", choices=STAGES)
        g.add_argument("--all", action="store_true")
        return sp

    sp = staged("reduce", "apply one stage or the whole chain")
    sp.add_argument("input")
    sp.add_argument("-o", "--output")
    sp.add_argument("--trace")
    sp.set_defaults(func=cmd_reduce)

    sp = staged("witness", "build an exact target solution")
    sp.add_argument("input")
    sp.add_argument("solution")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_witness)

    sp = staged("mapback", "map a target solution back to the source")
    sp.add_argument("input", help="source instance (the LP for --all)")
    sp.add_argument("solution")
    sp.add_argument("--trace")
    sp.add_argument("--eps", type=_eps, default=Fraction(0))
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_mapback)

    sp = sub.add_parser("verify", help="check a solution against an instance")
    sp.add_argument("--class", dest="cls", choices=CLASSES, required=True)
    sp.add_argument("--eps", type=_eps, default=Fraction(0))
    sp.add_argument("input")
    sp.add_argument("solution")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("oracle", help="exact reference solvers")
    sp.add_argument("kind", choices=("lp", "2cf", "optimize"))
    sp.add_argument("input")
    sp.add_argument("-o", "--output")
    sp.add_argument("--max-edges", type=int)
    sp.add_argument("--lo", type=int)
    sp.add_argument("--hi", type=int)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("pipeline", help="compile an LP to 2CF")
    sp.add_argument("--eps-lp", type=_eps, default=Fraction(0))
    sp.add_argument("input")
    sp.add_argument("-o", "--output")
    sp.add_argument("--report")
    sp.add_argument("--trace")
    sp.add_argument("--budget")
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("stats", help="print the compile report of an LP")
    sp.add_argument("--eps-lp", type=_eps, default=Fraction(0))
    sp.add_argument("input")
    sp.set_defaults(func=cmd_stats)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.func(args)
    except (io.ParseError, UsageError, SizeGuardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (WitnessError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if isinstance(exc, WitnessError) else 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())
