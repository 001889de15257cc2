"""Command-line surface: run, sweep, spectral, check, compare."""

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import harness, netgraph
from .config import load_config
from .errors import ConfigError


class _Parser(argparse.ArgumentParser):
    # Usage errors exit 1 (argparse defaults to 2, which we reserve for
    # runtime failures).
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser():
    parser = _Parser(prog="docosim",
                     description="Distributed online constrained optimization simulator")
    sub = parser.add_subparsers(dest="command", metavar="command")

    run_p = sub.add_parser("run", parents=[], help="run all configured horizons",
                           add_help=True)
    run_p.add_argument("--config", required=True, help="experiment config path")
    run_p.add_argument("--out", default=None, help="output directory (overrides config)")

    sweep_p = sub.add_parser("sweep", help="run with an overridden horizon grid")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--horizons", required=True,
                         help="comma-separated horizons, strictly increasing")
    sweep_p.add_argument("--out", default=None)

    spec_p = sub.add_parser("spectral", help="print mixing spectrum for a topology")
    spec_p.add_argument("--topology", required=True, choices=netgraph.TOPOLOGIES)
    spec_p.add_argument("--n", required=True, type=int)
    spec_p.add_argument("--scheme", default="auto",
                        choices=("auto",) + netgraph.MIXING_SCHEMES,
                        help="auto: uniform-average on complete graphs, else lazy-metropolis")
    spec_p.add_argument("--radius", type=float, default=None)
    spec_p.add_argument("--seed", type=int, default=None)
    spec_p.add_argument("--matrix-out", default=None,
                        help="write the mixing matrix as CSV (17 significant digits)")

    check_p = sub.add_parser("check", help="validate the configured instance")
    check_p.add_argument("--config", required=True)

    cmp_p = sub.add_parser("compare", help="dopbc vs decision-sharing baseline")
    cmp_p.add_argument("--config", required=True)
    return parser


def _cmd_run(args):
    cfg = load_config(args.config)
    result = harness.run_experiment(cfg, out_dir=args.out)
    for row in result.rows:
        print(f"T={row.T} alpha={row.alpha:.6g} regret_a={row.regret_action:.6g} "
              f"ccv_1={row.ccv_action[0]:.6g} delta_sum={row.delta_sum:.6g}")
    for name, fit in result.fits.items():
        print(f"slope {name}: exponent={fit.exponent:.4f} r2={fit.r_squared:.4f}"
              + (" (degenerate)" if fit.degenerate else ""))
    print(f"wrote {len(result.trace_paths)} trace files, summary.csv and slopes.csv "
          f"to {result.out_dir}")
    return 0


def _cmd_sweep(args):
    cfg = load_config(args.config)
    try:
        horizons = tuple(int(tok) for tok in args.horizons.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"bad horizon list {args.horizons!r}", field="horizons") from None
    cfg = replace(cfg, horizons=horizons)
    from .config import validate_config
    validate_config(cfg)
    if len(horizons) < 4:
        raise ConfigError("sweep mode needs at least 4 horizons", field="horizons")
    args_ns = argparse.Namespace(config=args.config, out=args.out)
    result = harness.run_experiment(cfg, out_dir=args.out)
    for name, fit in result.fits.items():
        print(f"slope {name}: exponent={fit.exponent:.4f} r2={fit.r_squared:.4f}"
              + (" (degenerate)" if fit.degenerate else ""))
    print(f"wrote outputs to {result.out_dir}")
    return 0


def _cmd_spectral(args):
    g = netgraph.build_graph(args.topology, args.n, radius=args.radius, seed=args.seed)
    scheme = args.scheme
    if scheme == "auto":
        scheme = "uniform-average" if g.is_complete() else "lazy-metropolis"
    mix = netgraph.build_mixing(g, scheme)
    eigs = np.linalg.eigvalsh(mix.w)
    print(f"topology={args.topology} n={g.n} edges={len(g.edges)} scheme={scheme}")
    if g.geo_radius is not None:
        print(f"final_radius={g.geo_radius:.6g}")
    print(f"sigma={mix.sigma:.17g}")
    print(f"spectral_gap={1.0 - mix.sigma:.17g}")
    print(f"eig_min={eigs[0]:.17g} eig_max={eigs[-1]:.17g}")
    if args.matrix_out:
        netgraph.save_matrix_csv(mix, args.matrix_out)
        print(f"wrote matrix to {args.matrix_out}")
    return 0


def _cmd_check(args):
    cfg = load_config(args.config)
    results = harness.run_checks(cfg)
    ok = True
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        ok &= passed
    return 0 if ok else 2


def _cmd_compare(args):
    cfg = load_config(args.config)
    out = harness.compare_algorithms(cfg)
    for algo in ("dopbc", "baseline-dspd"):
        fits = out[algo]["fits"]
        ccv_fit = fits.get("ccv_a_1")
        reg_fit = fits.get("regret_a")
        if ccv_fit is None:
            print(f"algo={algo} (fewer than 4 horizons; no slope fit)")
            continue
        print(f"algo={algo} ccv_exponent={ccv_fit.exponent:.4f} "
              f"ccv_r2={ccv_fit.r_squared:.4f} regret_exponent={reg_fit.exponent:.4f} "
              f"regret_r2={reg_fit.r_squared:.4f}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "spectral": _cmd_spectral,
    "check": _cmd_check,
    "compare": _cmd_compare,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # runtime failures
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
