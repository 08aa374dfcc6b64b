"""``sampler`` command line.

Exit codes: 0 success, 1 failed study check, 2 invalid configuration,
3 density failure, 4 divergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import fileio
from .refinable import CascadeError
from .reconstruction import DivergenceError
from .spaces import QuadratureError, SingularGramianError
from .studies import COMMANDS, ConfigError, DensityError, StudyCheckError, make_config, run

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_DENSITY, EXIT_DIVERGENCE = 0, 1, 2, 3, 4

FLAGS = ("n", "h", "level", "domain", "nodes", "seed", "tau", "nmax", "tol", "out")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sampler", description="Reconstruction and quadrature from nonuniform samples in GP spline spaces.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value file; flags override its entries")
    for name in FLAGS:
        p.add_argument(f"--{name}")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any other config key (repeatable)")
    p.add_argument("-q", "--quiet", action="store_true", help="only print errors")
    return p


def _values(args) -> dict:
    values = fileio.read_config(args.config) if args.config else {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    for name in FLAGS:
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    return values


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is not None:
            try:
                values = _values(args)
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
        else:
            values = _values(args)
        cfg = make_config(args.command, values)
        report = run(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"sampler: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DensityError as exc:
        print(f"sampler: density failure: {exc}", file=sys.stderr)
        if exc.certificate:
            print(json.dumps(exc.certificate), file=sys.stderr)
        return EXIT_DENSITY
    except (DivergenceError, CascadeError) as exc:
        print(f"sampler: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except StudyCheckError as exc:
        print(f"sampler: check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (QuadratureError, SingularGramianError) as exc:
        print(f"sampler: numerical failure: {exc}", file=sys.stderr)
        return EXIT_CHECK
    if not args.quiet:
        print(report.to_json())
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
