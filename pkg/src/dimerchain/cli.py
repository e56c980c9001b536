"""Command-line entry point: ``simulate <experiment> --config file.json``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, ExperimentKind, build_config
from .experiments import run_experiment, write_outputs

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_POINT_FAILED = 2

SUBCOMMANDS = {k.value.replace("_", "-"): k for k in ExperimentKind}


def _parse_override(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep:
        raise ConfigError(f"--set expects KEY=VALUE, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Entanglement generation in dimerized XX/XXZ chains by local rotations.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kind in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {kind.value} experiment")
        p.add_argument("--config", help="JSON config file (defaults apply when omitted)")
        p.add_argument("--out", help="output path prefix (overrides 'output')")
        p.add_argument("--threads", type=int, help="worker threads (overrides 'threads')")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config scalar; VALUE is parsed as JSON when possible")
        p.add_argument("--dry-run", action="store_true", help="validate the config and exit")
        p.set_defaults(kind=kind)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    kind: ExperimentKind = args.kind
    try:
        data: dict = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"{args.config}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
                ) from exc
            except OSError as exc:
                raise ConfigError(f"{args.config}: {exc.strerror}") from exc
            if not isinstance(data, dict):
                raise ConfigError("config must be a JSON object")
        for item in args.set:
            key, value = _parse_override(item)
            data[key] = value
        if args.out is not None:
            data["output"] = args.out
        if args.threads is not None:
            data["threads"] = args.threads
        cfg = build_config(data, kind.value)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.dry_run:
        print(json.dumps(cfg.to_json(), indent=2, sort_keys=True))
        return EXIT_OK

    result = run_experiment(cfg, echo=True)
    paths = write_outputs(result, cfg, cfg.output)
    print(f"wrote {paths['csv']} ({len(result.rows)} rows, {len(result.failures)} failed)")
    return EXIT_OK if result.ok else EXIT_POINT_FAILED


if __name__ == "__main__":
    sys.exit(main())
