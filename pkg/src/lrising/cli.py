"""Command-line entry points.

One subcommand per experiment kind plus `report`, `compile`, and
`simulate`.  Exit codes: 0 success, 1 job failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import KINDS, ConfigError, ExperimentConfig, apply_overrides, load_config
from .quench import QuenchProtocol, load_checkpoint, save_checkpoint


def _add_run_flags(p):
    p.add_argument("--config", default=None, help="YAML config (or a run manifest.json)")
    p.add_argument("--out", default=None, help="output directory (overrides config.out)")
    p.add_argument("--workers", type=int, default=None, help="worker pool size")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="config override, e.g. model.alpha=2.5 (repeatable)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lrising",
        description="Long-range transverse-field Ising chains: exact spectra, "
                    "Kibble-Zurek quenches, scaling fits, ion-circuit compilation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        _add_run_flags(p)

    p = sub.add_parser("report", help="summarize a completed run directory")
    p.add_argument("run_dir")
    p.add_argument("--json-out", default=None, help="also write summary JSON here")

    p = sub.add_parser("compile", help="compile a quench into a gate-plan JSON")
    _add_run_flags(p)
    p.add_argument("--plan-out", required=True, help="where to write the plan JSON")
    p.add_argument("--dt", type=float, default=None, help="Trotter step (defaults to circuit.dt_list[0])")

    p = sub.add_parser("simulate", help="apply a gate-plan JSON to a state checkpoint")
    p.add_argument("--plan", required=True)
    p.add_argument("--state-in", required=True, help="binary state checkpoint (input)")
    p.add_argument("--state-out", required=True, help="binary state checkpoint (output)")
    return parser


def _load_cfg(args) -> ExperimentConfig:
    if args.config:
        if args.config.endswith(".json"):
            from .runner import config_from_manifest

            cfg = config_from_manifest(args.config)
        else:
            cfg = load_config(args.config)
    else:
        cfg = ExperimentConfig()
    if args.override:
        cfg = apply_overrides(cfg, args.override)
    if getattr(args, "workers", None):
        cfg.workers = args.workers
    if getattr(args, "out", None):
        cfg.out = args.out
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in KINDS:
            cfg = _load_cfg(args)
            cfg.kind = args.command
            cfg.validate()
            from .runner import run

            result = run(cfg)
            print(f"run finished: {result.out_dir} ({'ok' if result.ok else 'FAILED'})")
            return 0 if result.ok else 1
        if args.command == "report":
            from .runner import RunError, report

            try:
                summary, text = report(args.run_dir)
            except RunError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 1
            print(text, end="")
            if args.json_out:
                with open(args.json_out, "w") as fh:
                    json.dump(summary, fh, indent=2, sort_keys=True)
                    fh.write("\n")
            return 0
        if args.command == "compile":
            cfg = _load_cfg(args)
            from .circuit import compile_evolution
            from .model import CouplingSpec, build_couplings

            circ, model = cfg.circuit, cfg.model
            dt = args.dt if args.dt is not None else circ.dt_list[0]
            J = build_couplings(CouplingSpec(
                N=circ.N, J0=model.J0,
                alpha=model.alpha if model.mode == "algebraic" else None,
                mode=model.mode))
            proto = QuenchProtocol(g0=circ.g0, tau_q=circ.tau_q, g_c=circ.g_c)
            plan = compile_evolution(J.entries, proto.g, circ.tau_q, dt,
                                     meta={"alpha": model.alpha, "J0": model.J0})
            with open(args.plan_out, "w") as fh:
                fh.write(plan.to_json())
                fh.write("\n")
            print(f"wrote plan: {args.plan_out} ({plan.n_steps} steps)")
            return 0
        if args.command == "simulate":
            from .circuit import CircuitPlan, simulate_plan

            with open(args.plan) as fh:
                plan = CircuitPlan.from_json(fh.read())
            state = load_checkpoint(args.state_in)
            out = simulate_plan(plan, state)
            save_checkpoint(args.state_out, out)
            print(f"wrote state: {args.state_out}")
            return 0
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
