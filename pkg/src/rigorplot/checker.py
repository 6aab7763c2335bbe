"""Sampling-based validation of pixel-run plots.

`check_plot2` looks for counterexamples to correctness: a sample abscissa
whose high-precision value lies inside the y-window but outside the pixel
run of its column.  `measure_completeness` estimates how much wider each run
is than the range that sampling actually witnesses.

Sampling is stratified (one jittered point per sub-cell, plus both column
endpoints) and seeded, so a report is reproducible from its seed.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import gmpy2
from gmpy2 import mpq

from . import interval as ia
from .expr import Expr, eval_point
from .plotter import Plot2

DEFAULT_ORACLE_PREC = 200


@dataclass(frozen=True)
class Violation:
    x: Fraction
    column: int
    enclosure: tuple  # exact (lo, hi) of the oracle value
    run: tuple

    def describe(self) -> str:
        lo, hi = self.enclosure
        return (
            f"column {self.column}: f({self.x}) in [{float(lo):.17g}, {float(hi):.17g}]"
            f" outside run {self.run}"
        )


@dataclass
class CheckReport:
    seed: int
    samples: int = 0
    violations: list = field(default_factory=list)
    # samples whose oracle enclosure straddled a run or window edge
    inconclusive: int = 0
    skipped_columns: list = field(default_factory=list)
    excess: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def max_excess(self) -> int:
        return max(self.excess, default=0)

    @property
    def mean_excess(self) -> float:
        return sum(self.excess) / len(self.excess) if self.excess else 0.0

    def to_text(self) -> str:
        lines = [
            f"seed {self.seed}",
            f"samples {self.samples}",
            f"violations {len(self.violations)}",
            f"inconclusive {self.inconclusive}",
            f"skipped columns {len(self.skipped_columns)}",
        ]
        if self.excess:
            lines.append(f"excess max {self.max_excess} mean {self.mean_excess:.3f}")
        lines += ["  " + v.describe() for v in self.violations[:20]]
        if len(self.violations) > 20:
            lines.append(f"  ... {len(self.violations) - 20} more")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = asdict(self)
        doc["violations"] = [
            {
                "x": str(v.x),
                "column": v.column,
                "enclosure": [str(v.enclosure[0]), str(v.enclosure[1])],
                "run": list(v.run),
            }
            for v in self.violations
        ]
        doc["max_excess"] = self.max_excess
        doc["mean_excess"] = self.mean_excess
        return json.dumps(doc, sort_keys=True) + "\n"


def column_samples(a, b, n: int, rng: random.Random) -> list:
    """Both endpoints plus one jittered point in each of ``n`` equal cells.

    Values are exact ``gmpy2.mpq`` rationals.
    """
    a, b = _q(a), _q(b)
    xs = [a, b]
    cell = (b - a) / n
    for k in range(n):
        xs.append(a + cell * (k + mpq(rng.getrandbits(32), 1 << 32)))
    return xs


def _q(v):
    v = Fraction(v)
    return mpq(v.numerator, v.denominator)


def _fr(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def _oracle(e: Expr, x, prec: int):
    v = eval_point(e, x, prec)
    if v is ia.NAI:
        return None
    return mpq(v.lo), mpq(v.hi)


def check_plot2(
    e: Expr,
    p2: Plot2,
    n_samples: int = 1000,
    oracle_prec: int = DEFAULT_ORACLE_PREC,
    seed: int = 0,
) -> CheckReport:
    """Search for sample points contradicting the plot.

    The oracle is a thin interval at ``oracle_prec`` bits, which should be
    at least three times the precision the plot was built with.  A sample
    is a violation only when that enclosure lies entirely inside the
    window and entirely off the column's run.
    """
    ia.check_prec(oracle_prec)
    rng = random.Random(seed)
    xf, yf = p2.xframe, p2.yframe
    y1, y2 = _q(yf.y1), _q(yf.y2)
    report = CheckReport(seed=seed)
    for i in range(xf.w):
        z1, z2 = p2.run(i)
        r1, r2 = _q(yf.row(z1)), _q(yf.row(z2))
        defined = False
        for x in column_samples(xf.boundary(i), xf.boundary(i + 1), n_samples, rng):
            report.samples += 1
            v = _oracle(e, x, oracle_prec)
            if v is None:
                continue
            defined = True
            lo, hi = v
            if hi < y1 or lo > y2:
                continue  # outside the window, nothing to check
            if r1 <= lo and hi <= r2:
                continue
            if y1 <= lo and hi <= y2 and (hi < r1 or lo > r2):
                report.violations.append(Violation(_fr(x), i, (_fr(lo), _fr(hi)), (z1, z2)))
            else:
                report.inconclusive += 1
        if not defined:
            report.skipped_columns.append(i)
    return report


def measure_completeness(
    e: Expr,
    p2: Plot2,
    n_samples: int = 200,
    oracle_prec: int = DEFAULT_ORACLE_PREC,
    seed: int = 0,
) -> CheckReport:
    """Per-column excess: run height minus the quantized sampled range, in pixels.

    The sampled range under-approximates the true one, so the excess is an
    upper estimate of how many filled pixels nothing lands in.  Columns
    where no sample is defined are skipped.
    """
    ia.check_prec(oracle_prec)
    rng = random.Random(seed)
    xf, yf = p2.xframe, p2.yframe
    h = yf.h
    oy, dy = _q(yf.oy), _q(yf.dy)
    report = CheckReport(seed=seed)
    for i in range(xf.w):
        z1, z2 = p2.run(i)
        lo = hi = None
        for x in column_samples(xf.boundary(i), xf.boundary(i + 1), n_samples, rng):
            report.samples += 1
            v = _oracle(e, x, oracle_prec)
            if v is None:
                continue
            mid = (v[0] + v[1]) / 2
            lo = mid if lo is None else min(lo, mid)
            hi = mid if hi is None else max(hi, mid)
        if lo is None:
            report.skipped_columns.append(i)
            continue
        s1 = min(max(int(gmpy2.floor((lo - oy) / dy)), 0), h)
        s2 = min(max(int(gmpy2.ceil((hi - oy) / dy)), 0), h)
        report.excess.append(max((z2 - z1) - (s2 - s1), 0))
    return report
