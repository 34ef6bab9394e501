#!/usr/bin/env python3
"""
halfcav: write a photon into an atom in front of a moving mirror, store it, read it out.

    halfcav store  --config scenario.json --out DIR
    halfcav sweep  --config scenario.json --out DIR
    halfcav oracle --config scenario.json
    halfcav mirror --config scenario.json --out DIR
"""
import argparse
import json
import logging
import sys

from pydantic import ValidationError

from halfcav import scenario_service
from halfcav.errors import HalfCavityError
from halfcav.runtime_env import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ORACLE_FAILED = 1
EXIT_BAD_INPUT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='halfcav', description='Half-cavity quantum memory simulator')
    parser.add_argument('--log-level', help='DEBUG, INFO, WARNING or ERROR (default: HALFCAV_LOG_LEVEL or INFO)')
    commands = parser.add_subparsers(dest='command', required=True)

    def add_common(sub, with_out=True):
        sub.add_argument('--config', help='scenario JSON (default: packaged scenario_config.json)')
        sub.add_argument('--seed', type=int, default=0, help='seed for randomized checks')
        sub.add_argument('--no-phase-compensation', action='store_true',
                         help='keep the mirror-induced chirp on input and output')
        if with_out:
            sub.add_argument('--out', default='results', help='output directory')

    add_common(commands.add_parser('store', help='one write-hold-read cycle; timeseries.csv and run.json'))
    add_common(commands.add_parser('sweep', help='efficiency and fidelity against pulse bandwidth; sweep.csv'))
    oracle = commands.add_parser('oracle', help='quadrature against the RK4 Bloch integrator; JSON on stdout')
    add_common(oracle, with_out=False)
    oracle.add_argument('--random-pairs', type=int, default=20, help='number of random profile/input pairs')
    oracle.add_argument('--tolerance', type=float, default=1e-6, help='largest allowed |dP|')
    add_common(commands.add_parser('mirror', help='mirror trajectory and feasibility; mirror.csv and feasibility.json'))
    return parser


def _run(args) -> int:
    config = scenario_service.load_config(args.config)
    if args.no_phase_compensation:
        config = config.model_copy(update={'phase_compensation': False})

    if args.command == 'store':
        record = scenario_service.run_store(config, args.out, seed=args.seed)
        print(f"eta_w={record.eta_w:.9f} eta_r={record.eta_r:.9f} eta={record.eta:.9f} F={record.F:.9f}")
        return EXIT_OK

    if args.command == 'sweep':
        frame = scenario_service.sweep_bandwidth(config, args.out)
        print(f"{len(frame)} bandwidths written to {args.out}")
        return EXIT_OK

    if args.command == 'oracle':
        report = scenario_service.oracle_check(
            config, random_pairs=args.random_pairs, seed=args.seed, tolerance=args.tolerance
        )
        print(json.dumps(report, indent=2, sort_keys=True))
        return EXIT_OK if report['passed'] else EXIT_ORACLE_FAILED

    report = scenario_service.export_mirror(config, args.out)
    print(f"v_max={report.v_max:.6g} lambda*gamma0 ({report.v_max_si:.4g} m/s), demanding={report.demanding}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
        return _run(args)
    except (HalfCavityError, ValidationError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
