"""Command-line entry point.

    phonon-qst simulate   --config configs/fig4.conf [--scenario NAME]
                          [--v V ...] [--jobs N] [--out DIR]
    phonon-qst validate   --config configs/fig4.conf
    phonon-qst convergence --config configs/fig4.conf

Exit codes: 0 success, 2 configuration invalid, 3 runtime invariant breach.
"""

import argparse
import sys

from .errors import ConfigValidationError, SimulationError
from .scenarios import SCENARIO_NAMES, config_from_file, convergence_report, run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonon-qst",
        description="Phonon-mediated photon-to-qubit state transfer simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="run a scenario and write CSV/JSON outputs")
    simulate.add_argument("--config", required=True, help="path to a key=value config file")
    simulate.add_argument("--scenario", choices=SCENARIO_NAMES,
                          help="override the scenario named in the config")
    simulate.add_argument("--v", type=float, nargs="+", metavar="V",
                          help="override the list of rapidity values")
    simulate.add_argument("--jobs", type=int, default=1,
                          help="worker processes for independent runs (default 1)")
    simulate.add_argument("--out", help="override the output directory")

    validate = sub.add_parser("validate", help="check a config file and exit")
    validate.add_argument("--config", required=True)

    convergence = sub.add_parser("convergence",
                                 help="dt-halving convergence report for the first v")
    convergence.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            config = config_from_file(args.config, scenario=args.scenario,
                                      v_list=args.v, out_dir=args.out)
            summary = run_scenario(config, jobs=args.jobs)
            for name in summary["files"]:
                print(f"wrote {config.out_dir}/{name}")
        elif args.command == "validate":
            config = config_from_file(args.config)
            print(f"configuration OK: scenario={config.scenario}, "
                  f"v={list(config.v_list)}, engine={config.engine}")
        else:
            config = config_from_file(args.config)
            report = convergence_report(config)
            print(f"convergence at v={report['v']:g}, dt={report['dt']:g}:")
            print(f"  |final(dt)   - final(dt/2)| = {report['diff_dt_vs_half']:.3e}")
            print(f"  |final(dt/2) - final(dt/4)| = {report['diff_half_vs_quarter']:.3e}")
            print(f"  observed ratio = {report['observed_ratio']:.2f} (~16 expected for RK4)")
    except ConfigValidationError as exc:
        for violation in exc.violations:
            print(f"config error: {violation}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
