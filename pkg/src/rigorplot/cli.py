"""Command-line front end.

    rigorplot EXPR X1 X2 [Y1 Y2] [options]

Bounds are exact rationals written as integers, decimals or fractions
(``-1/32``, ``0.1``).  Exit codes: 0 success, 1 usage or parse error,
2 plotting failure, 3 violations found by ``--check``.
"""

from __future__ import annotations

import argparse
import os
import re
import shlex
import subprocess
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import __version__
from .checker import DEFAULT_ORACLE_PREC, check_plot2
from .expr import ParseError, parse
from .plotter import Plot2, PlotConfig, PlotError, plot
from .render import emit_gnuplot, emit_json, emit_runs, emit_svg

EXIT_OK, EXIT_USAGE, EXIT_PLOT, EXIT_CHECK = 0, 1, 2, 3
GNUPLOT_ENV = "RIGORPLOT_GNUPLOT"

# argparse treats "-1" or "-.5" as an option unless it looks like a number it
# knows about; fractions like "-1/32" need help
_NEGATIVE = re.compile(r"^-(\d|\.\d)")


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def size(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)[xX](\d+)", text.strip())
    if not m or int(m[1]) < 1 or int(m[2]) < 1:
        raise argparse.ArgumentTypeError(f"size must be WxH with W, H >= 1, got {text!r}")
    return int(m[1]), int(m[2])


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rigorplot", description="Plot a univariate function with a guaranteed-correct pixel band.")
    p.add_argument("expr", help="expression in x, e.g. 'sin(x + exp(x))'")
    p.add_argument("bounds", nargs="+", type=rational, metavar="BOUND", help="X1 X2 [Y1 Y2]")
    p.add_argument("--prec", "--i_prec", type=int, default=53, help="working precision in bits (default 53)")
    p.add_argument("--degree", "--i_degree", type=int, default=10, help="Taylor model degree (default 10)")
    p.add_argument("--size", "--i_size", type=size, default=(512, 384), help="WxH in pixels (default 512x384)")
    p.add_argument("--slack", type=int, default=2, help="pixels of excess tolerated before subdividing")
    p.add_argument("--max-depth", type=int, default=None, help="bisection depth limit")
    p.add_argument("--naive", action="store_true", help="plain interval arithmetic per column")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.add_argument("--format", choices=("runs", "json", "gnuplot", "svg"), default="svg")
    p.add_argument("-o", "--output", type=Path, help="output file (gnuplot: the script; data goes next to it)")
    p.add_argument("--svg-size", type=size, default=(640, 480), help="SVG canvas in pixels")
    p.add_argument("--check", action="store_true", help="verify the plot by sampling")
    p.add_argument("--samples", type=int, default=1000, help="check samples per column")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle-prec", type=int, default=None, help="check precision (default max(200, 3*prec))")
    p.add_argument("--show", action="store_true", help="open the plot in gnuplot")
    p.add_argument("--version", action="version", version=f"rigorplot {__version__}")
    return p


def fix_negatives(argv: list[str]) -> list[str]:
    """Keep negative bounds such as ``-1/32`` from being read as options."""
    return [" " + a if _NEGATIVE.match(a) else a for a in argv]


def config_from(args) -> PlotConfig:
    w, h = args.size
    kw = dict(
        prec=args.prec,
        degree=args.degree,
        slack=args.slack,
        width=w,
        height=h,
        method="naive" if args.naive else "taylor",
        workers=args.jobs,
    )
    if args.max_depth is not None:
        kw["max_depth"] = args.max_depth
    return PlotConfig(**kw)


def render(p2: Plot2, fmt: str, data_name: str = "rigorplot.dat", svg_size=(640, 480)):
    """Text of the requested format; gnuplot gives a (script, data) pair."""
    if fmt == "runs":
        return emit_runs(p2)
    if fmt == "json":
        return emit_json(p2)
    if fmt == "gnuplot":
        return emit_gnuplot(p2, data_name)
    return emit_svg(p2, *svg_size)


def gnuplot_command() -> list[str]:
    return shlex.split(os.environ.get(GNUPLOT_ENV, "gnuplot"))


def show(p2: Plot2, directory: str | None = None) -> subprocess.CompletedProcess:
    """Write a gnuplot script and data file, then run ``gnuplot -persist`` on them.

    Raises `PlotError` with the attempted command if the program is missing.
    """
    directory = directory or tempfile.mkdtemp(prefix="rigorplot-")
    data = Path(directory) / "plot.dat"
    script_path = Path(directory) / "plot.gp"
    script, text = emit_gnuplot(p2, str(data))
    data.write_text(text)
    script_path.write_text(script)
    cmd = gnuplot_command() + ["-persist", str(script_path)]
    try:
        return subprocess.run(cmd, check=False, capture_output=True, text=True)
    except OSError as err:
        raise PlotError(f"cannot run {shlex.join(cmd)}: {err.strerror or err}") from None


def run(argv: list[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(fix_negatives(argv))
        if len(args.bounds) not in (2, 4):
            raise UsageError("expected X1 X2 or X1 X2 Y1 Y2")
        if args.format == "gnuplot" and args.output is None:
            raise UsageError("--format gnuplot needs --output")
        cfg = config_from(args)
        e = parse(args.expr)
    except ParseError as err:
        print(f"rigorplot: parse error: {err}", file=stderr)
        print(f"  {args.expr}\n  {' ' * err.position}^", file=stderr)
        return EXIT_USAGE
    except (UsageError, ValueError) as err:
        print(f"rigorplot: {err}", file=stderr)
        return EXIT_USAGE

    x1, x2, *ys = args.bounds
    y1, y2 = ys if ys else (None, None)
    try:
        p2 = plot(e, x1, x2, y1, y2, cfg)
    except PlotError as err:
        print(f"rigorplot: {err}", file=stderr)
        return EXIT_PLOT

    if args.format == "gnuplot":
        data_path = args.output.with_suffix(".dat")
        script, data = emit_gnuplot(p2, data_path.name)
        args.output.write_text(script)
        data_path.write_text(data)
    else:
        text = render(p2, args.format, svg_size=args.svg_size)
        if args.output is not None:
            args.output.write_text(text)
        else:
            stdout.write(text)

    status = EXIT_OK
    if args.check:
        oracle = args.oracle_prec or max(DEFAULT_ORACLE_PREC, 3 * cfg.prec)
        report = check_plot2(e, p2, args.samples, oracle, args.seed)
        stderr.write(report.to_text())
        if not report.ok:
            status = EXIT_CHECK

    if args.show:
        try:
            res = show(p2)
        except PlotError as err:
            print(f"rigorplot: {err}", file=stderr)
            return EXIT_PLOT
        if res.returncode != 0:
            print(f"rigorplot: gnuplot exited with {res.returncode}: {res.stderr.strip()}", file=stderr)
            return EXIT_PLOT
    return status


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else list(argv))


if __name__ == "__main__":
    sys.exit(main())
