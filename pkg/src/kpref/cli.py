"""Command line interface.

Subcommands: run, duel, opt, sweep, gen, validate.  Exit codes: 0 success,
1 schema or contract violations, 2 resource caps exceeded.  Flags can also be
supplied through a TOML file via --config (one table per subcommand).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .adversary import ADVERSARIES
from .engine import AdversaryError, ContractViolation, StepBudgetExceeded
from .harness import (
    ALGORITHMS, Instance, InstanceError, fraction_str, gen_random,
    report_to_json, run_duel, run_instance, run_report, sweep, sweep_csv,
)
from .metric import MetricError, location_to_json
from .offline import BudgetExceeded, StateCapExceeded, opt_cost


def _load_config(path, section):
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return data.get(section, {})


def _peek_config(argv):
    """Find the subcommand and --config path before real parsing."""
    command = None
    config = None
    for i, tok in enumerate(argv):
        if command is None and not tok.startswith("-"):
            command = tok
        if tok == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
        elif tok.startswith("--config="):
            config = tok.split("=", 1)[1]
    return command, config


def build_parser():
    parser = argparse.ArgumentParser(prog="kpref",
                                     description="k-server with preferences laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.sub_parsers = {}

    p_run = sub.add_parser("run", help="run one algorithm on an instance file")
    p_run.add_argument("instance")
    p_run.add_argument("--algo", required=True,
                       help=f"one of {sorted(ALGORITHMS)} or conf+def:L")
    p_run.add_argument("--audit", action="store_true", help="check invariants every step")
    p_run.add_argument("--wf-cap", type=int, default=None, help="work-function state cap")
    p_run.add_argument("--config", default=None)

    p_duel = sub.add_parser("duel", help="adaptive adversary vs algorithm")
    p_duel.add_argument("--adversary", required=True,
                        help=f"one of {sorted(ADVERSARIES)} (adaptive-lb:s, strict-confident-lb:L)")
    p_duel.add_argument("--algo", required=True)
    p_duel.add_argument("--k", type=int, required=True)
    p_duel.add_argument("--cycles", type=int, default=1)
    p_duel.add_argument("--audit", action="store_true")
    p_duel.add_argument("--wf-cap", type=int, default=None)
    p_duel.add_argument("--step-budget", type=int, default=None)
    p_duel.add_argument("--config", default=None)

    p_opt = sub.add_parser("opt", help="exact offline optimum of an instance")
    p_opt.add_argument("instance")
    p_opt.add_argument("--schedule", action="store_true", help="emit the full schedule")
    p_opt.add_argument("--state-cap", type=int, default=None)
    p_opt.add_argument("--config", default=None)

    p_sweep = sub.add_parser("sweep", help="ratio and bound curves over a share grid")
    p_sweep.add_argument("--k", type=int, required=True)
    p_sweep.add_argument("--grid", required=True,
                         help="comma separated shares, e.g. 0,1/5,2/5,1/2,3/5,9/10,1")
    p_sweep.add_argument("--algos", default="conf,def")
    p_sweep.add_argument("--cycles", type=int, default=2)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--config", default=None)

    p_gen = sub.add_parser("gen", help="write a seeded random instance")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--k", type=int, required=True)
    p_gen.add_argument("--metric", default="uniform", help="uniform | line | explicit")
    p_gen.add_argument("--locations", type=int, default=None)
    p_gen.add_argument("--requests", type=int, default=20)
    p_gen.add_argument("--s-target", default="0.3")
    p_gen.add_argument("--out", default=None, help="output path (default: stdout)")
    p_gen.add_argument("--config", default=None)

    p_val = sub.add_parser("validate", help="check an instance file and its metric")
    p_val.add_argument("instance")

    parser.sub_parsers = {"run": p_run, "duel": p_duel, "opt": p_opt,
                          "sweep": p_sweep, "gen": p_gen, "validate": p_val}
    return parser


def cmd_run(args):
    instance = Instance.load(args.instance)
    alg = run_instance(args.algo, instance, audit=args.audit, wf_cap=args.wf_cap)
    print(json.dumps(run_report(alg), indent=2))
    return 0


def cmd_duel(args):
    report = run_duel(args.algo, args.adversary, args.k, args.cycles,
                      audit=args.audit, wf_cap=args.wf_cap,
                      step_budget=args.step_budget)
    print(json.dumps(report_to_json(report), indent=2))
    return 0


def cmd_opt(args):
    instance = Instance.load(args.instance)
    solution = opt_cost(instance.metric, instance.initial, instance.requests,
                        state_cap=args.state_cap, want_schedule=args.schedule)
    out = {"cost": solution.cost if not isinstance(solution.cost, Fraction)
           else fraction_str(solution.cost)}
    if args.schedule:
        out["schedule"] = [
            None if step is None else
            {"server": step[0], "from": location_to_json(step[1]),
             "to": location_to_json(step[2])}
            for step in solution.schedule
        ]
        out["final"] = {str(j): location_to_json(p)
                        for j, p in sorted(solution.final_config.items())}
    print(json.dumps(out, indent=2))
    return 0


def cmd_sweep(args):
    grid = [Fraction(tok) for tok in args.grid.split(",") if tok.strip()]
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    rows = sweep(args.k, grid, algos, cycles=args.cycles, workers=args.workers)
    sys.stdout.write(sweep_csv(rows))
    return 0


def cmd_gen(args):
    instance = gen_random(args.seed, args.k, metric_kind=args.metric,
                          n_locations=args.locations, n_requests=args.requests,
                          s_target=Fraction(args.s_target))
    text = json.dumps(instance.to_json(), indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_validate(args):
    instance = Instance.load(args.instance)
    violation = instance.metric.validate()
    if violation is not None:
        print(f"metric violation: {violation}", file=sys.stderr)
        return 1
    for j, loc in instance.initial.items():
        instance.metric.check_location(loc)
    for r in instance.requests:
        instance.metric.check_location(r.loc)
    print("ok")
    return 0


COMMANDS = {
    "run": cmd_run,
    "duel": cmd_duel,
    "opt": cmd_opt,
    "sweep": cmd_sweep,
    "gen": cmd_gen,
    "validate": cmd_validate,
}


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    command, config = _peek_config(list(argv))
    if config and command in parser.sub_parsers:
        overrides = _load_config(config, command)
        parser.sub_parsers[command].set_defaults(
            **{k.replace("-", "_"): v for k, v in overrides.items()})
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (StateCapExceeded, BudgetExceeded, StepBudgetExceeded) as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return 2
    except (InstanceError, MetricError, ContractViolation, AdversaryError,
            ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
