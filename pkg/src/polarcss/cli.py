"""Command-line interface: ``polarcss <command> [options]``.

Exit status is 0 on success, 2 for configuration errors and 3 for I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import polar, sim
from .channels import ChannelModel
from .css_ldpc import DEFAULT_MAX_ITERS
from .sim import ConfigError, InnerSpec, SimConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _channel(text: str) -> ChannelModel:
    try:
        return ChannelModel.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _inner(text: str) -> InnerSpec:
    try:
        return InnerSpec.parse(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _grid(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


def _common(p: argparse.ArgumentParser, scheme_default: str = "concat") -> None:
    p.add_argument("--scheme", default=scheme_default, choices=sim.SCHEMES)
    p.add_argument("--channel", type=_channel, default=ChannelModel("erasure", 0.3), help="kind:param, e.g. erasure:0.3")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--inner", type=_inner, default=InnerSpec(), help="half_len,row_weight,rows_kept,code_seed | steane | identity[:n]")
    p.add_argument("--blocks", type=int, default=1)
    p.add_argument("--outer-k-fraction", type=float, default=0.5)
    p.add_argument("--design-eps", type=float, default=None, help="outer construction eps (default: channel crossover)")
    p.add_argument("--max-bp-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--polar-n", type=int, default=None, help="polar-only length (default: matched to the concatenation)")
    p.add_argument("--polar-k", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="polarcss", description="Polar outer / quantum LDPC CSS inner code simulator")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="emit a polar code spec file")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--out", default=None)

    s = sub.add_parser("simulate", help="run one configuration, print one CSV row")
    _common(s)

    w = sub.add_parser("sweep", help="sweep the channel parameter for one scheme")
    _common(w)
    w.add_argument("--grid", type=_grid, required=True, help="comma-separated channel parameters")

    cmp_ = sub.add_parser("compare", help="two schemes on one grid, merged CSV")
    _common(cmp_)
    cmp_.add_argument("--grid", type=_grid, required=True)
    cmp_.add_argument("--schemes", default="concat,polar-only", help="two comma-separated scheme names")

    f = sub.add_parser("floor-scan", help="sweep plus error-floor report")
    _common(f, scheme_default="ldpc-only")
    f.add_argument("--grid", type=_grid, required=True)
    f.add_argument("--report", default=None, help="path for the JSON floor report (default: stderr)")

    x = sub.add_parser("complexity", help="fit the decoder operation-count exponent")
    _common(x, scheme_default="polar-only")
    x.add_argument("--n-values", type=_ints, default=[2**8, 2**10, 2**12, 2**14], help="lengths (outer length for concat)")
    x.add_argument("--rate", type=float, default=0.25, help="polar-only rate")
    return ap


def _config(args) -> SimConfig:
    return SimConfig(
        scheme=args.scheme,
        channel=args.channel,
        trials=args.trials,
        seed=args.seed,
        inner=args.inner,
        blocks=args.blocks,
        outer_k_fraction=args.outer_k_fraction,
        design_eps=args.design_eps,
        max_bp_iters=args.max_bp_iters,
        workers=args.workers,
        polar_n=args.polar_n,
        polar_k=args.polar_k,
    )


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _cmd_construct(args) -> None:
    try:
        spec = polar.construct(args.n, args.k, args.eps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _emit(spec.to_text(), args.out)


def _cmd_simulate(args) -> None:
    cfg = _config(args)
    sim.build_scheme(cfg)
    _emit(sim.results_to_csv([sim.run(cfg)]), args.out)


def _cmd_sweep(args, schemes=None):
    curves = sim.sweep(_config(args), args.grid, schemes)
    _emit(sim.curves_to_csv(curves), args.out)
    return curves


def _cmd_compare(args) -> None:
    names = [s.strip() for s in args.schemes.split(",") if s.strip()]
    if len(names) != 2 or len(set(names)) != 2:
        raise ConfigError("--schemes needs two distinct scheme names")
    for n in names:
        if n not in sim.SCHEMES:
            raise ConfigError(f"unknown scheme {n!r}")
    _cmd_sweep(args, names)


def _cmd_floor_scan(args) -> None:
    if len(args.grid) < 4:
        raise ConfigError("floor-scan needs at least 4 grid points")
    (curve,) = _cmd_sweep(args)
    try:
        rep = sim.error_floor_metric(curve)
        payload = {
            "scheme": curve.scheme,
            "params": rep.params,
            "slopes": rep.slopes,
            "floor_detected": rep.floor_detected,
            "excluded": rep.excluded,
        }
    except ValueError as exc:
        payload = {"scheme": curve.scheme, "error": str(exc)}
    text = json.dumps(payload, indent=2) + "\n"
    if args.report is None:
        sys.stderr.write(text)
    else:
        _emit(text, args.report)


def _cmd_complexity(args) -> None:
    cfg = _config(args)
    try:
        if cfg.scheme == "polar-only":
            family = sim.polar_family(args.rate, cfg.resolved_design_eps())
        elif cfg.scheme == "concat":
            family = sim.concat_family(cfg.inner.build(), cfg.outer_k_fraction, cfg.resolved_design_eps())
        else:
            raise ConfigError("complexity supports the polar-only and concat schemes")
        rep = sim.complexity_probe(family, args.n_values, cfg.channel, seed=cfg.seed, trials=min(cfg.trials, 16))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = {
        "scheme": cfg.scheme,
        "n_values": rep.n_values,
        "ops_per_decode": rep.ops_per_decode,
        "exponent": rep.exponent,
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)


COMMANDS = {
    "construct": _cmd_construct,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "floor-scan": _cmd_floor_scan,
    "complexity": _cmd_complexity,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"polarcss: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"polarcss: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
