"""``kirchnorm`` command line.

Exit status: 0 success, 1 solver non-convergence, 2 configuration error,
3 violated assumption or threshold.  Failures print one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .artifacts import export_scan
from .config import load
from .errors import ConfigError
from .runner import EXIT_CONFIG, run, with_overrides

COMMANDS = {
    "solve-min": ("min", "global minimizer (p < 2 + 4/N, h >= 0)"),
    "solve-mp": ("mp", "mountain-pass solution (p > 2 + 8/N, h >= 0)"),
    "linking": ("link", "linking-surface bracket and bound state (p > 2 + 8/N, h <= 0)"),
    "limit": ("limit", "ground state of the h = 0 problem"),
    "gn": ("gn", "Gagliardo-Nirenberg constant and, for p > 2 + 8/N, the landscape profile"),
    "verify": ("verify", "replay every checkable inequality as a pass/fail report"),
}


def _u64(text: str) -> int:
    val = int(text)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return val


def _positive(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kirchnorm", description="Normalized solutions of the Kirchhoff equation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--out", help="run directory (default: [output] directory)")
    common.add_argument("--seed", type=_u64, help="PRNG seed for multi-start and random fields")
    common.add_argument("--threads", type=_positive, help="worker pool size for independent runs")
    common.add_argument("--set", action="append", default=[], metavar="BLOCK.KEY=VALUE",
                        help="override one configuration key (repeatable)")
    for name, (_, text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        if name == "gn":
            p.add_argument("--scan", action="store_true", help="also write the phi/psi scan")
    exp = sub.add_parser("export", help="convert a stored scan to CSV or JSON")
    exp.add_argument("artifact", help="stored scan (*.scan.json) or scan CSV")
    exp.add_argument("--format", choices=("csv", "json"), default="csv")
    exp.add_argument("--out", help="output file (default: next to the artifact)")
    return parser


def _fail(payload: dict, code: int) -> int:
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "export":
        try:
            path = export_scan(args.artifact, args.format, args.out)
        except FileNotFoundError as exc:
            return _fail({"error": "missing-artifact", "message": str(exc), "path": args.artifact}, EXIT_CONFIG)
        except ValueError as exc:
            return _fail({"error": "unknown-artifact", "message": str(exc), "path": args.artifact}, EXIT_CONFIG)
        print(json.dumps({"status": "ok", "output": str(path)}))
        return 0

    mode = COMMANDS[args.command][0]
    try:
        cfg = load(args.config, args.set).with_mode(mode)
    except ConfigError as exc:
        return _fail(exc.to_dict(), exc.exit_code)
    cfg = with_overrides(cfg, seed=args.seed, threads=args.threads)
    out = Path(args.out) if args.out else Path(cfg.output.directory)
    code, summary = run(cfg, out, command=args.command, scan=getattr(args, "scan", False))
    if summary["error"] is not None:
        return _fail({**summary["error"], "out": summary["out"]}, code)
    if mode == "gn" and code == 0:
        print((out / "gn_profile.json").read_text(), end="")
    else:
        print(json.dumps({"status": summary["status"], "exit": code, "out": summary["out"]}))
    return code


if __name__ == "__main__":
    sys.exit(main())
