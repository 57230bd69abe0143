"""Command-line entry point.

Subcommands: validate-dag, test-implications, estimate, refute, cate,
evalue, report. Exit codes: 0 success, 1 validation error, 2
computation error, 64 unknown subcommand.
"""

from __future__ import annotations

import argparse
import json
import sys

from .dag import load_dag
from .errors import CausalPipeError, StageError, ValidationError
from .pipeline import PipelineConfig, run, run_section, serialize_report, write_report
from .sensitivity import e_value

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_COMPUTATION = 2
EXIT_USAGE = 64

SUBCOMMANDS = (
    "validate-dag",
    "test-implications",
    "estimate",
    "refute",
    "cate",
    "evalue",
    "report",
)

_SECTION_FOR = {
    "test-implications": "dag_tests",
    "estimate": "ace",
    "refute": "refutation",
    "cate": "cate",
}


def _build_parser(command):
    parser = argparse.ArgumentParser(prog=f"causalpipe {command}")
    if command != "evalue":
        parser.add_argument("--config", required=True, help="pipeline config JSON")
    else:
        parser.add_argument("--config", help="pipeline config JSON (table mode)")
        parser.add_argument("--rr", type=float, help="risk ratio (formula mode)")
    parser.add_argument("--out", default="out", help="output directory (report command)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument(
        "--missing", choices=("impute", "complete-case"), help="override missing-data mode"
    )
    return parser


def _load_config(args):
    config = PipelineConfig.from_file(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = int(args.seed)
    if args.missing is not None:
        overrides["missing"] = args.missing
    if overrides:
        payload = config.to_dict()
        payload.update(overrides)
        config = PipelineConfig.from_dict(payload)
    return config


def _emit(payload):
    print(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False))


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print("usage: causalpipe {" + ",".join(SUBCOMMANDS) + "} [--config PATH ...]")
        print("run 'causalpipe <subcommand> --help' for subcommand flags")
        return EXIT_OK
    command = argv[0]
    if command not in SUBCOMMANDS:
        print(f"causalpipe: unknown subcommand {command!r}", file=sys.stderr)
        return EXIT_USAGE
    parser = _build_parser(command)
    args = parser.parse_args(argv[1:])

    try:
        if command == "evalue" and args.rr is not None:
            print(f"{e_value(args.rr):.4f}")
            return EXIT_OK
        if command == "evalue" and args.config is None:
            parser.error("evalue needs --rr or --config")
        config = _load_config(args)
        if command == "validate-dag":
            dag = load_dag(config.dag)
            from .effects import validate_spec

            validate_spec(dag, config.model)
            _emit(
                {
                    "dag": config.dag,
                    "n_nodes": len(dag.nodes),
                    "n_edges": len(dag.edges),
                    "backdoor_valid": True,
                    "adjustment": list(config.model.adjustment),
                }
            )
            return EXIT_OK
        if command == "report":
            report = run(config)
            path = write_report(report, args.out)
            print(path)
            return EXIT_OK
        if command == "evalue":
            _emit(run_section(config, "sensitivity"))
            return EXIT_OK
        _emit(run_section(config, _SECTION_FOR[command]))
        return EXIT_OK
    except StageError as exc:
        print(f"causalpipe: {exc}", file=sys.stderr)
        if isinstance(exc.cause, ValidationError):
            return EXIT_VALIDATION
        return EXIT_COMPUTATION
    except ValidationError as exc:
        print(f"causalpipe: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CausalPipeError as exc:
        print(f"causalpipe: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
