"""Command-line front end: ``ssh-revival run|validate|list-experiments``."""

from __future__ import annotations

import argparse
import logging
import sys

from .fock import ResourceError
from .runner import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    OracleMismatch,
    parse_config_text,
    run,
    validate,
    write_table,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_ORACLE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssh-revival", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "validate"):
        p = sub.add_parser(name)
        p.add_argument("experiment", nargs="?", help="shorthand for --set experiment=NAME")
        p.add_argument("--config", help="flat 'key = value' config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one key (repeatable)")
        p.add_argument("--output", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--threads", type=int)
    sub.add_parser("list-experiments")
    return parser


def _resolve(args) -> ExperimentConfig:
    values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    if args.experiment:
        values["experiment"] = args.experiment
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        values[key.strip()] = value.strip()
    if args.output:
        values["output.path"] = args.output
    if args.format:
        values["output.format"] = args.format
    if args.threads:
        values["runner.threads"] = str(args.threads)
    return ExperimentConfig.from_mapping(values)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "list-experiments":
        for name in EXPERIMENTS:
            print(name)
        return EXIT_OK
    try:
        cfg = _resolve(args)
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(cfg.echo())
        issues = validate(cfg)
        for kind, msg in issues:
            print(f"{kind} error: {msg}", file=sys.stderr)
        if any(k == "config" for k, _ in issues):
            return EXIT_CONFIG
        return EXIT_RESOURCE if issues else EXIT_OK

    try:
        table = run(cfg)
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"resource refusal: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OracleMismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    text = write_table(table, cfg)
    if not cfg.output:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
