"""Command-line front end.

Machine-readable output (JSON or CSV) goes to stdout or ``--out``;
human-readable summaries go to stderr. Exit codes: 0 success, 1 an
identity or tolerance check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass

from . import dist as dc
from . import estimation as est
from . import identities as ids
from . import metrics as mt
from . import models as mdl

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    log_base: float = 2.0
    tolerance: float = 1e-9
    seed: int = 0
    state_cap: int = dc.DEFAULT_STATE_CAP
    verbose: bool = False

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.log_base not in (2.0, math.e):
            raise ValueError("log base must be 2 or e")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    @property
    def units(self) -> str:
        return mt.units_for(self.log_base)


class InputError(Exception):
    pass


def _ints(text: str) -> list[int]:
    try:
        out = [int(float(t)) if "e" in t.lower() else int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _bits_to(cfg: RunConfig, value_in_bits: float) -> float:
    return value_in_bits * math.log(2) / math.log(cfg.log_base) if cfg.log_base != 2 else value_in_bits


# --------------------------------------------------------------------- #
# gen
# --------------------------------------------------------------------- #


def _generate(args, cfg: RunConfig) -> tuple[dc.JointDistribution, dict[str, float]]:
    system = args.system
    if system in ("copy", "xor", "parity"):
        if args.n is None or args.n < 2:
            raise InputError(f"{system} needs --n >= 2")
        n_vars = args.n + int(system == "parity" or (system == "copy" and args.target))
        if 2**n_vars > cfg.state_cap:
            raise InputError(f"n = {args.n} exceeds the state cap of {cfg.state_cap}")
    if system == "copy":
        d = mdl.gen_copy(args.n, with_target=args.target)
        analytic = {"o_info": _bits_to(cfg, args.n - 2)}
        if args.target:
            analytic["rsi"] = _bits_to(cfg, args.n - 1)
        return d, analytic
    if system == "xor":
        return mdl.gen_xor(args.n), {"o_info": _bits_to(cfg, -(args.n - 2))}
    if system == "parity":
        return mdl.gen_parity_target(args.n), {"rsi": _bits_to(cfg, -1.0)}
    if not args.shape:
        raise InputError(f"{system} needs --shape")
    if system == "random":
        shape = dc.SystemShape.from_cards(args.shape, target=args.target, state_cap=cfg.state_cap)
        return mdl.gen_random(shape, cfg.seed), {}
    # class-member
    if not args.model_class:
        raise InputError("class-member needs --class")
    needs_target = args.model_class in (mdl.TAIL_TO_TAIL, mdl.HEAD_TO_HEAD)
    shape = dc.SystemShape.from_cards(args.shape, target=needs_target or args.target, state_cap=cfg.state_cap)
    cls = mdl.ModelClass.parse(args.model_class, shape)
    return mdl.gen_random_in_class(cls, cfg.seed), {}


def cmd_gen(args, cfg: RunConfig) -> int:
    d, analytic = _generate(args, cfg)
    _emit(dc.dumps(d), args.out)
    if analytic:
        parts = ", ".join(f"{k} = {v:g} {cfg.units}" for k, v in analytic.items())
        _info(f"analytic: {parts}")
    return EXIT_OK


# --------------------------------------------------------------------- #
# metrics
# --------------------------------------------------------------------- #


def cmd_metrics(args, cfg: RunConfig) -> int:
    d = dc.load(args.file, state_cap=cfg.state_cap)
    target = d.shape.index_of(args.target) if args.target else d.shape.target_index
    sources = [d.shape.index_of(s) for s in _names(args.sources)] if args.sources else None
    report = mt.metric_report(d, sources, target, base=cfg.log_base)
    sys.stdout.write(_dump_json(report.to_dict()))
    if cfg.verbose:
        for k, v in report.to_dict().items():
            if k != "residuals":
                _info(f"{k:>18}  {v}")
        for k, v in report.residuals.items():
            _info(f"{k:>36}  {v:.3e}")
    return EXIT_OK if report.max_residual() < cfg.tolerance else EXIT_FAIL


# --------------------------------------------------------------------- #
# identities
# --------------------------------------------------------------------- #


def cmd_identities(args, cfg: RunConfig) -> int:
    if args.file and args.random_corpus:
        raise InputError("give either a distribution file or --random-corpus, not both")
    if args.file:
        dists = [dc.load(args.file, state_cap=cfg.state_cap)]
        source = args.file
    elif args.random_corpus:
        dists = ids.random_corpus(args.random_corpus, cfg.seed, members=not args.no_members)
        source = f"random-corpus:{args.random_corpus}"
    else:
        raise InputError("need a distribution file or --random-corpus K")
    rows = ids.run_suite(dists, cfg.log_base, cfg.tolerance)
    ok = ids.all_pass(rows, cfg.tolerance)
    out = {
        "source": source,
        "distributions": len(dists),
        "units": cfg.units,
        "tolerance": cfg.tolerance,
        "all_pass": ok,
        "identities": [r.to_dict(cfg.tolerance) for r in rows],
    }
    sys.stdout.write(_dump_json(out))
    if cfg.verbose:
        _info(f"{'identity':<36} {'max residual':>13} {'count':>6}  status")
        for r in rows:
            res = f"{r.max_residual:.3e}" if r.count else "-"
            _info(f"{r.name:<36} {res:>13} {r.count:>6}  {r.status(cfg.tolerance)}")
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------- #
# estimate / sample / sweep
# --------------------------------------------------------------------- #


def cmd_estimate(args, cfg: RunConfig) -> int:
    with open(args.samples, newline="") as fh:
        samples = est.read_samples_csv(fh, args.shape, args.target)
    res = est.glrt(samples, base=cfg.log_base)
    sys.stdout.write(_dump_json(res.to_dict()))
    if cfg.verbose:
        _info(f"{res.metric}: GLRT/m = {res.glrt_per_m:.6g}, plug-in = {res.plugin_metric:.6g} {res.units}")
    return EXIT_OK


def cmd_sample(args, cfg: RunConfig) -> int:
    d = dc.load(args.file, state_cap=cfg.state_cap)
    _emit(est.samples_to_csv(est.sample(d, args.m, cfg.seed)), args.out)
    return EXIT_OK


def _sweep_distribution(args, cfg: RunConfig) -> dc.JointDistribution:
    if args.file:
        return dc.load(args.file, state_cap=cfg.state_cap)
    if args.system is None or args.n is None:
        raise InputError("sweep needs --system and --n, or --file")
    if args.system == "copy":
        return mdl.gen_copy(args.n, with_target=args.mode != "o_info")
    if args.system == "parity":
        return mdl.gen_parity_target(args.n)
    return mdl.gen_xor(args.n)


def cmd_sweep(args, cfg: RunConfig) -> int:
    d = _sweep_distribution(args, cfg)
    if args.mode == "o_info" and d.shape.target_index is not None:
        d = dc.make_distribution(d.shape.with_target(None), d.probs)
    if args.trials < 1:
        raise InputError("--trials must be >= 1")
    rows = est.convergence_sweep(d, args.m_grid, args.trials, cfg.seed, base=cfg.log_base)
    buf = io.StringIO()
    est.write_sweep_csv(rows, buf)
    _emit(buf.getvalue(), args.out)
    for m, med in est.median_errors(rows).items():
        _info(f"m = {m:>8}  median |GLRT/m - analytic| = {med:.3e} {cfg.units}")
    return EXIT_OK


# --------------------------------------------------------------------- #
# argument parsing
# --------------------------------------------------------------------- #


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # Shared by the top-level parser and every subcommand so the flags work
    # on either side of the subcommand name.
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--base", choices=["2", "e"], default=default("2"), help="logarithm base (default 2)")
    p.add_argument("--tol", type=float, default=default(1e-9), help="residual tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=default(0), help="random seed (default 0)")
    p.add_argument("--state-cap", type=int, default=default(dc.DEFAULT_STATE_CAP),
                   help="maximum number of joint states")
    p.add_argument("--verbose", action="store_true", default=default(False),
                   help="human-readable table on stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hoinfo",
        description="High-order information metrics, identity checks and GLRT estimation "
                    "for discrete multivariate distributions.",
        parents=[_global_flags(False)],
    )
    flags = _global_flags(True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[flags], help="write a distribution file")
    p.add_argument("system", choices=["copy", "xor", "parity", "random", "class-member"])
    p.add_argument("--n", type=int, help="number of source variables (copy/xor/parity)")
    p.add_argument("--shape", type=_ints, help="comma-separated cardinalities (random/class-member)")
    p.add_argument("--target", action="store_true", help="append / designate a target variable Y")
    p.add_argument("--class", dest="model_class",
                   help="tail-to-tail, head-to-head, k-tail:<j> or k-head:<j>")
    p.add_argument("-o", "--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("metrics", parents=[flags], help="metric report for a distribution file")
    p.add_argument("file")
    p.add_argument("--sources", help="comma-separated variable names (default: all but the target)")
    p.add_argument("--target", help="target variable name (default: the file's target)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("identities", parents=[flags], help="check every identity and bound")
    p.add_argument("file", nargs="?")
    p.add_argument("--random-corpus", type=int, metavar="K", help="check K seeded random distributions")
    p.add_argument("--no-members", action="store_true",
                   help="skip the random tail-to-tail / head-to-head members added per corpus entry")
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("estimate", parents=[flags], help="GLRT statistics from a samples CSV")
    p.add_argument("samples")
    p.add_argument("--shape", type=_ints, help="cardinalities in column order (default: max symbol + 1)")
    p.add_argument("--target", help="target column name; selects the RSI test")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sample", parents=[flags], help="draw i.i.d. samples from a distribution file")
    p.add_argument("file")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("sweep", parents=[flags], help="GLRT convergence sweep")
    p.add_argument("--system", choices=["copy", "xor", "parity"])
    p.add_argument("--n", type=int)
    p.add_argument("--file", help="distribution file instead of --system")
    p.add_argument("--mode", choices=["rsi", "o_info"],
                   help="copy: rsi (with target, default) or o_info; ignored for xor/parity")
    p.add_argument("--m-grid", type=_ints, default=[100, 1000, 10000, 100000])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            log_base=2.0 if args.base == "2" else math.e,
            tolerance=args.tol,
            seed=args.seed,
            state_cap=args.state_cap,
            verbose=args.verbose,
        )
        return args.func(args, cfg)
    except (InputError, dc.DistributionError, OSError, ValueError) as exc:
        print(f"hoinfo {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
