"""Command line interface.

Exit status: 0 on success, 1 on usage errors, 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .errors import CapAttachError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _write(data: bytes | str, path):
    if isinstance(data, str):
        data = data.encode()
    if path in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def _dump(doc, path=None):
    _write(json.dumps(doc, indent=1) + "\n", path)


def _load_graph(path):
    from .graph_core import import_graph

    with open(path, "rb") as fh:
        return import_graph(fh.read())


def _load_sentences(path):
    from .logic.syntax import parse_sentences

    with open(path, encoding="utf-8") as fh:
        return parse_sentences(fh.read())


# -- command handlers ----------------------------------------------------

def cmd_grow(args):
    from .graph_core import GrowthParams, export_graph, grow_to

    g = grow_to(GrowthParams(args.m, args.seed), args.n)
    _write(export_graph(g, args.format), args.out)


def cmd_chain_enumerate(args):
    from .config_chain import certificate, enumerate_chain, save_chain, stationary_distribution

    chain = enumerate_chain(args.m, max_states=args.max_states)
    if args.solve:
        stationary_distribution(chain)
    save_chain(chain, args.out)
    cert = certificate(chain)
    print(f"m={args.m}: {cert['states']} states ({cert['recurrent_states']} recurrent) -> {args.out}")


def cmd_chain_stationary(args):
    from .config_chain import load_chain, save_chain, stationary_distribution, stationary_residual

    chain = load_chain(args.chain)
    pi = stationary_distribution(chain)
    if any(stationary_residual(chain, pi)):
        raise CapAttachError("nonzero stationary residual")
    for i, p in enumerate(pi):
        if p:
            state = chain.states[i]
            desc = json.dumps(state.describe()) if hasattr(state, "describe") else str(state)
            print(f"{i}\t{p.numerator}/{p.denominator}\t{float(p):.12f}\t{desc}")
    total = sum(pi)
    print(f"sum\t{total.numerator}/{total.denominator}")
    if args.out:
        save_chain(chain, args.out)


def cmd_chain_certify(args):
    from .config_chain import certificate, load_chain

    chain = load_chain(args.chain)
    cert = certificate(chain)
    print(json.dumps(cert, indent=1))
    bound = (chain.m or 0) + 1
    if not (cert["aperiodic"] and cert["forest_reachable_from_initial"]
            and cert["max_steps_to_forest"] <= bound and cert["every_recurrent_state_on_cycle"]):
        raise CapAttachError("chain certification failed")


def cmd_census(args):
    from .graph_core import GrowthParams, grow_to
    from .neighborhood import complete_census

    g = grow_to(GrowthParams(args.m, args.seed), args.n)
    census = complete_census(g, args.a)
    _dump({"m": args.m, "n": args.n, "seed": args.seed, **census.to_json(),
           "types": len(census.counts), "total": sum(census.counts.values())}, args.out)


def cmd_classify(args):
    from .neighborhood import classify

    g = _load_graph(args.graph)
    _dump({"graph": args.graph, "n": g.n, "m": g.m, **classify(g, args.rounds).to_json()}, args.out)


def cmd_ef(args):
    from .logic.game import duplicator_wins

    ga, gb = _load_graph(args.graph_a), _load_graph(args.graph_b)
    won = duplicator_wins(ga, gb, args.pebbles, args.rounds)
    _dump({"pebbles": args.pebbles, "rounds": args.rounds,
           "winner": "duplicator" if won else "spoiler"}, args.out)


def cmd_eval(args):
    from .logic.evaluate import fo_eval

    g = _load_graph(args.graph)
    for s in _load_sentences(args.formula):
        print(f"{str(fo_eval(s, g)).lower()}\t{s.text}")


def _experiment_config(args, **extra):
    from .experiments import ExperimentConfig

    return ExperimentConfig(m=args.m, checkpoints=args.checkpoints, replicates=args.replicates,
                            seed=args.seed, out_dir=args.out_dir, workers=args.workers, **extra)


def _finish(report, args):
    paths = report.write(args.out_dir, figures=not args.no_figures)
    for p in paths:
        print(p)


def cmd_simulate_configs(args):
    from .config_chain import enumerate_chain, load_chain, stationary_distribution
    from .experiments import sim_config_distribution, tv_threshold

    cfg = _experiment_config(args, open_radii=args.radii)
    chain = load_chain(args.chain) if args.chain else enumerate_chain(args.m)
    if chain.stationary is None:
        stationary_distribution(chain)
    report = sim_config_distribution(cfg, chain)
    if args.calibrate:
        report.summary["calibration"] = cal = tv_threshold(cfg, chain)
        report.summary["tv_below_threshold"] = report.summary["tv_by_checkpoint"][cfg.checkpoints[-1]] < cal["threshold"]
    _finish(report, args)


def cmd_simulate_sentences(args):
    from .experiments import sim_sentence_probability
    from .logic.sampling import catalog_within

    sentences = _load_sentences(args.formula) if args.formula else catalog_within(2, 2)
    report = sim_sentence_probability(_experiment_config(args, sentences=sentences))
    _finish(report, args)


def cmd_report(args):
    from .experiments import convergence_report

    report = convergence_report(_experiment_config(args, R=args.rounds, a=args.a))
    _finish(report, args)


def build_parser():
    p = _Parser(prog="capattach", description="Degree-capped uniform attachment graphs.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("grow", help="grow one graph and export it")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=["json", "dot"], default="json")
    s.add_argument("--out")
    s.set_defaults(func=cmd_grow)

    chain = sub.add_parser("chain", help="exact configuration chain")
    csub = chain.add_subparsers(dest="chain_command", required=True, parser_class=_Parser)
    s = csub.add_parser("enumerate")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--max-states", type=int, default=10**6)
    s.add_argument("--solve", action="store_true", help="also store the stationary law")
    s.set_defaults(func=cmd_chain_enumerate)
    s = csub.add_parser("stationary")
    s.add_argument("--chain", required=True)
    s.add_argument("--out", help="write the chain back with its stationary law")
    s.set_defaults(func=cmd_chain_stationary)
    s = csub.add_parser("certify")
    s.add_argument("--chain", required=True)
    s.set_defaults(func=cmd_chain_certify)

    s = sub.add_parser("census", help="complete-neighbourhood census of a grown graph")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_census)

    s = sub.add_parser("classify", help="class key of a graph file")
    s.add_argument("--graph", required=True)
    s.add_argument("--rounds", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("ef", help="decide a pebble game between two graph files")
    s.add_argument("--graph-a", required=True)
    s.add_argument("--graph-b", required=True)
    s.add_argument("--pebbles", type=int, required=True)
    s.add_argument("--rounds", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_ef)

    s = sub.add_parser("eval", help="evaluate sentences on a graph file")
    s.add_argument("--formula", required=True)
    s.add_argument("--graph", required=True)
    s.set_defaults(func=cmd_eval)

    def experiment_args(s, checkpoints):
        s.add_argument("--m", type=int, default=2)
        s.add_argument("--checkpoints", type=_int_list, default=checkpoints)
        s.add_argument("--replicates", type=int, default=1000)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--workers", type=int, default=1)
        s.add_argument("--out-dir", required=True)
        s.add_argument("--no-figures", action="store_true")

    sim = sub.add_parser("simulate", help="replicate studies")
    ssub = sim.add_subparsers(dest="sim_command", required=True, parser_class=_Parser)
    s = ssub.add_parser("configs")
    experiment_args(s, (100, 500, 2000))
    s.add_argument("--radii", type=_int_list, default=())
    s.add_argument("--chain", help="chain file (enumerated on the fly otherwise)")
    s.add_argument("--calibrate", action="store_true",
                   help="pilot run with 4x replicates pins a TV threshold")
    s.set_defaults(func=cmd_simulate_configs)
    s = ssub.add_parser("sentences")
    experiment_args(s, (50, 100, 200))
    s.add_argument("--formula", help="sentence file (default: catalog of depth <= 2)")
    s.set_defaults(func=cmd_simulate_sentences)

    s = sub.add_parser("report", help="convergence report: class keys, closed trend, census audit")
    experiment_args(s, (50, 100, 200, 500))
    s.add_argument("--rounds", type=int, default=1)
    s.add_argument("--a", type=int, default=1, help="census radius")
    s.set_defaults(func=cmd_report)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (CapAttachError, OSError, ValueError, KeyError) as exc:
        print(f"capattach: error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
