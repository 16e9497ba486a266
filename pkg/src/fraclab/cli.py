"""Command-line interface.

fraclab run <config> [--out DIR] [--threads N]   solve and verify
fraclab report <dirs...>                         summary table + figures
fraclab validate <config>                        schema check only

Exit codes: 0 success, 1 check failure, 2 config/schema violation,
3 solver non-convergence, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

__all__ = ["main"]


def _apply_threads(n):
    if n is None:
        n = os.environ.get("FRACLAB_THREADS")
    if n is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(n)


def _cmd_run(args) -> int:
    from .config import ConfigError, load_config
    from .runner import EXIT_CONFIG, RunnerError, run

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or os.path.splitext(os.path.basename(args.config))[0]
    try:
        manifest, code = run(cfg, out)
    except RunnerError as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4
    for name, rec in manifest.get("checks", {}).items():
        print(f"{name}: {'pass' if rec['pass'] else 'FAIL'}")
    if manifest.get("error"):
        print(manifest["error"], file=sys.stderr)
    print(f"manifest: {os.path.join(out, 'manifest.json')}")
    return code


def _cmd_report(args) -> int:
    from .plots import render_run_figures
    from .runner import collect_report

    rows, ok = collect_report(args.dirs)
    header = ("run", "check", "threshold", "observed", "verdict")
    widths = [max(len(str(r[i])) for r in rows + [header])
              for i in range(5)] if rows else [len(h) for h in header]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    print(fmt.format(*header))
    for r in rows:
        print(fmt.format(*(str(c) for c in r)))

    csv_path = args.csv or "report.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {csv_path}")

    for d in args.dirs:
        if os.path.isdir(d):
            for png in render_run_figures(d):
                print(f"wrote {png}")
    return 0 if ok else 1


def _cmd_validate(args) -> int:
    from .config import ConfigError, load_config

    try:
        load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print("config ok")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fraclab",
        description="extension-problem laboratory for fractional "
                    "gradient systems")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="solve a config and verify its checks")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="run directory")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("report", help="summarize run directories")
    p.add_argument("dirs", nargs="*")
    p.add_argument("--csv", default=None, help="summary CSV path")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("validate", help="schema-check a config")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    if args.command == "run":
        _apply_threads(args.threads)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
