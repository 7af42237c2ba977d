"""Command line entry point: ``erknwave {run,check,converge,compose-verify,resonance}``."""
import argparse
import sys

from . import __version__, _backend
from .harness import (
    EXIT_USAGE,
    FULL_HORIZON,
    ConfigError,
    ExperimentConfig,
    cmd_check,
    cmd_compose_verify,
    cmd_converge,
    cmd_resonance,
    cmd_run,
)


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment configuration")
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("--seed", type=int, default=None, help="reserved; all components are deterministic")
    common.add_argument("--g", dest="g_name", help="override the nonlinearity (minus_u2, minus_u3, zero)")
    common.add_argument("--h", type=float, help="override the stepsize")
    common.add_argument("--T", type=float, help="override the horizon")

    ap = argparse.ArgumentParser(prog="erknwave", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({_backend.DEFAULT} kernels)")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="long-time conservation experiment")
    run.add_argument("--method", action="append", help="restrict to this method (repeatable)")
    run.add_argument("--full", action="store_true", help=f"use the horizon T={FULL_HORIZON:g}")

    check = sub.add_parser("check", help="symmetry / symplecticity of a method")
    check.add_argument("name", nargs="?", help="ERKN1..ERKN4 or 'c1=..;b1=..;bbar1=..'")
    check.add_argument("--method", dest="method_opt")
    check.add_argument("--xi-max", type=float, default=4.0)

    conv = sub.add_parser("converge", parents=[common], help="observed order of convergence")
    conv.add_argument("--h-list", default="0.1,0.05,0.025", help="comma separated halving stepsizes")
    conv.add_argument("--method", action="append")

    comp = sub.add_parser("compose-verify", parents=[common], help="ERKN / trigonometric integrator conjugacy")
    comp.add_argument("--method", default="ERKN4")
    comp.add_argument("--n", type=int, default=100)

    res = sub.add_parser("resonance", parents=[common], help="non-resonance indicators")
    res.add_argument("--N", type=int, default=1)
    res.add_argument("--eps", type=float, default=None, help="override the measured data size")
    res.add_argument("--exhaustive", action="store_true", help="enumerate k over all modes")
    return ap


def _config(args, methods=None) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    data = cfg.to_dict()
    for key in ("g_name", "h", "T"):
        if getattr(args, key, None) is not None:
            data[key] = getattr(args, key)
    if getattr(args, "full", False):
        data["T"] = FULL_HORIZON
    if methods:
        data["methods"] = methods
    if args.out:
        data["output_dir"] = args.out
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "check":
        name = args.name or args.method_opt
        if not name:
            print("error: check needs a method name or coefficient spec", file=sys.stderr)
            return EXIT_USAGE
        return cmd_check(name, xi_max=args.xi_max)
    try:
        cfg = _config(args, getattr(args, "method", None) if args.command in ("run", "converge") else None)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "run":
        return cmd_run(cfg)
    if args.command == "converge":
        try:
            h_list = [float(x) for x in args.h_list.split(",") if x.strip()]
        except ValueError:
            print(f"error: cannot parse --h-list {args.h_list!r}", file=sys.stderr)
            return EXIT_USAGE
        return cmd_converge(cfg, h_list)
    if args.command == "compose-verify":
        return cmd_compose_verify(cfg, args.method, args.n)
    return cmd_resonance(cfg, args.N, eps=args.eps, exhaustive=args.exhaustive)


if __name__ == "__main__":
    sys.exit(main())
