"""Command line entry point: ``relayqkd {run,sweep,enumerate,check}``."""
from __future__ import annotations

import argparse
import logging
import sys

from .analytics import enumerate_patterns, naive_end_to_end_fraction, useful_fraction
from .harness import ConfigError, parse_config, run, sweep


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file ([run] and optional [sweep] sections)")
    p.add_argument("--nodes", dest="n_nodes", help="chain length including Alice and Bob")
    p.add_argument("--slots", help="source timeslots")
    p.add_argument("--transmittance", help="per-hop survival probability, or a comma list per hop")
    p.add_argument("--mode", help="naive | padding | delay:<batch>")
    p.add_argument("--batch-size", type=int, help="shorthand for --mode delay:<batch>")
    p.add_argument("--threshold", help="receiver minimum detection rate")
    p.add_argument("--eve-link", dest="eve_link", help="put an intercept/resend attacker on link i")
    p.add_argument("--seed")
    p.add_argument("--qber-sample", dest="qber_sample")
    p.add_argument("--out", dest="output_dir", help="output directory")
    p.add_argument("--trace", action="store_const", const=True, default=None, help="write trace.csv")


def _overrides(args: argparse.Namespace) -> dict:
    keys = ("n_nodes", "slots", "transmittance", "mode", "threshold", "eve_link",
            "seed", "qber_sample", "output_dir", "trace")
    out = {k: getattr(args, k) for k in keys}
    if args.batch_size is not None:
        out["mode"] = f"delay:{args.batch_size}"
    for axis in ("n_nodes", "transmittance", "mode"):
        value = getattr(args, f"sweep_{axis}", None)
        if value is not None:
            out[f"sweep_{axis}"] = value
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="relayqkd", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one configuration and print its summary")
    _add_run_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="run every combination of the sweep axes")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--sweep-nodes", dest="sweep_n_nodes", help="comma list of node counts")
    p_sweep.add_argument("--sweep-transmittance", dest="sweep_transmittance", help="comma list")
    p_sweep.add_argument("--sweep-mode", dest="sweep_mode", help="comma list of modes")
    p_sweep.add_argument("--workers", type=int, default=1)

    p_enum = sub.add_parser("enumerate", help="classify every basis pattern of an n-node chain")
    p_enum.add_argument("--nodes", type=int, required=True)
    p_enum.add_argument("--list", action="store_true", help="print every pattern")

    p_check = sub.add_parser("check", help="run the acceptance criteria")
    p_check.add_argument("criteria", nargs="*", type=int, help="criterion numbers (default: all)")

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command in ("run", "sweep"):
        try:
            config = parse_config(args.config, _overrides(args))
        except (ConfigError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        if args.command == "run":
            sys.stdout.write(run(config).to_text())
        else:
            for cid, summary in sweep(config, args.workers).items():
                print(f"{cid}\tseed={summary.seed}\tnaive={summary.naive_fraction}\tbridged={summary.bridged_fraction}")
        return 0

    if args.command == "enumerate":
        try:
            result = enumerate_patterns(args.nodes)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        if args.list:
            for o in result.outcomes:
                pairs = " ".join(f"{a}-{b}" for a, b in o.opportunities) or "no key"
                print(f"{o.label}\t{pairs}")
        print(f"useful_fraction = {result.useful_fraction} (closed form {useful_fraction(args.nodes)})")
        print(f"end_to_end_fraction = {result.end_to_end_fraction} (closed form {naive_end_to_end_fraction(args.nodes)})")
        print(f"link_match_fraction = {result.link_match_fraction}")
        print("no_key_patterns = " + ", ".join("".join(b.name for b in p) for p in result.no_key_patterns))
        return 0

    from .acceptance import run_all

    results = run_all(args.criteria)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
