"""Output formats for pixel-run plots.

All emitters are pure: the same `Plot2` always gives the same bytes.  Frame
parameters are written as hexadecimal floating-point strings (``0x1.8p-3``)
so that no decimal rounding happens between tools; a frame value that is
not dyadic cannot be written that way and is written as an exact ``p/q``
fraction instead.

Runs format::

    # rigorplot runs
    ox dx oy dy w h
    0 z1 z2
    1 z1 z2
    ...
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .plotter import Plot2, XFrame, YFrame

RUNS_MAGIC = "# rigorplot runs"


class FormatError(ValueError):
    """Malformed input to one of the parsers."""


# -- hex floats ----------------------------------------------------------------

_HEX = re.compile(r"^(-)?0x([0-9a-f]+)(?:\.([0-9a-f]*))?p([+-]?\d+)$", re.IGNORECASE)


def is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def hexfloat(q) -> str:
    """Exact hexadecimal float for a dyadic rational, any number of bits.

    Same shape as `float.hex` without trailing zeros, so ``hexfloat(0.75)``
    is ``0x1.8p-1``.
    """
    q = Fraction(q)
    if not is_dyadic(q):
        raise ValueError(f"{q} is not dyadic")
    if q == 0:
        return "0x0p+0"
    sign = "-" if q < 0 else ""
    n, k = abs(q.numerator), q.denominator.bit_length() - 1
    while n % 2 == 0:
        n //= 2
        k -= 1
    frac_bits = n.bit_length() - 1
    exp = frac_bits - k
    pad = -frac_bits % 4
    frac = (n - (1 << frac_bits)) << pad
    digits = (frac_bits + pad) // 4
    body = "1" if digits == 0 else f"1.{frac:0{digits}x}".rstrip("0").rstrip(".")
    return f"{sign}0x{body}p{exp:+d}"


def parse_hexfloat(text: str) -> Fraction:
    m = _HEX.match(text.strip())
    if not m:
        raise FormatError(f"not a hex float: {text!r}")
    sign, whole, frac, exp = m.groups()
    frac = frac or ""
    mant = int(whole + frac, 16)
    e = int(exp) - 4 * len(frac)
    v = Fraction(mant) * Fraction(2) ** e
    return -v if sign else v


def format_number(q) -> str:
    """Hex float when dyadic, ``p/q`` otherwise."""
    q = Fraction(q)
    if is_dyadic(q):
        return hexfloat(q)
    return f"{q.numerator}/{q.denominator}"


def parse_number(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        try:
            return Fraction(text)
        except ValueError:
            raise FormatError(f"not a fraction: {text!r}") from None
    return parse_hexfloat(text)


# -- envelope ------------------------------------------------------------------


@dataclass(frozen=True)
class Envelope:
    """Two polylines over the column boundaries ``x[0..w]``."""

    xs: tuple
    low: tuple
    high: tuple


def envelope(p2: Plot2) -> Envelope:
    """Piecewise-affine band containing every filled pixel.

    At an interior boundary the ordinates are the min of the two adjacent
    lower run ends and the max of the upper ones; the outer boundaries use
    their single column.
    """
    xf, yf = p2.xframe, p2.yframe
    w = xf.w
    xs, low, high = [], [], []
    if w == 0:
        return Envelope((), (), ())
    for i in range(w + 1):
        adjacent = [p2.run(j) for j in (i - 1, i) if 0 <= j < w]
        xs.append(xf.boundary(i))
        low.append(yf.row(min(z1 for z1, _ in adjacent)))
        high.append(yf.row(max(z2 for _, z2 in adjacent)))
    return Envelope(tuple(xs), tuple(low), tuple(high))


# -- runs ------------------------------------------------------------------------


def emit_runs(p2: Plot2) -> str:
    xf, yf = p2.xframe, p2.yframe
    head = " ".join(format_number(v) for v in (xf.ox, xf.dx, yf.oy, yf.dy))
    lines = [RUNS_MAGIC, f"{head} {xf.w} {yf.h}"]
    lines += [f"{i} {z1} {z2}" for i, (z1, z2) in enumerate(p2.cols)]
    return "\n".join(lines) + "\n"


def parse_runs(text: str) -> Plot2:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != RUNS_MAGIC:
        raise FormatError("missing runs header")
    try:
        fields = lines[1].split()
        ox, dx, oy, dy = (parse_number(f) for f in fields[:4])
        w, h = int(fields[4]), int(fields[5])
        cols = []
        for k, ln in enumerate(lines[2:]):
            i, z1, z2 = (int(t) for t in ln.split())
            if i != k:
                raise FormatError(f"column {i} out of order")
            cols.append((z1, z2))
    except (IndexError, ValueError) as err:
        raise FormatError(f"bad runs data: {err}") from None
    return Plot2(XFrame(ox, dx, w), YFrame(oy, dy, h), tuple(cols))


# -- json ------------------------------------------------------------------------


def emit_json(p2: Plot2) -> str:
    xf, yf = p2.xframe, p2.yframe
    doc = {
        "ox": format_number(xf.ox),
        "dx": format_number(xf.dx),
        "oy": format_number(yf.oy),
        "dy": format_number(yf.dy),
        "w": format_number(xf.w),
        "h": format_number(yf.h),
        "columns": [[z1, z2] for z1, z2 in p2.cols],
    }
    return json.dumps(doc, indent=None, separators=(", ", ": ")) + "\n"


def _count(v) -> int:
    # w and h are written as hex floats like the frame values; plain ints are accepted too
    q = v if isinstance(v, int) else parse_number(str(v))
    if q != int(q):
        raise FormatError(f"not an integer: {v!r}")
    return int(q)


def parse_json(text: str) -> Plot2:
    try:
        doc = json.loads(text)
        xf = XFrame(parse_number(doc["ox"]), parse_number(doc["dx"]), _count(doc["w"]))
        yf = YFrame(parse_number(doc["oy"]), parse_number(doc["dy"]), _count(doc["h"]))
        cols = tuple((int(a), int(b)) for a, b in doc["columns"])
    except (KeyError, TypeError, ValueError) as err:
        raise FormatError(f"bad plot json: {err}") from None
    return Plot2(xf, yf, cols)


# -- gnuplot ---------------------------------------------------------------------


def _down(q: Fraction) -> float:
    f = float(q)
    return math.nextafter(f, -math.inf) if Fraction(f) > q else f


def _up(q: Fraction) -> float:
    f = float(q)
    return math.nextafter(f, math.inf) if Fraction(f) < q else f


def _g(v: float) -> str:
    return repr(float(v))


def emit_gnuplot(p2: Plot2, data_name: str = "rigorplot.dat") -> tuple[str, str]:
    """Gnuplot script and its data file (``x low high`` per boundary).

    Ordinates are rounded outward to binary64 so the drawn band still
    contains the exact one.
    """
    env = envelope(p2)
    xf, yf = p2.xframe, p2.yframe
    data = "".join(
        f"{_g(float(x))} {_g(_down(lo))} {_g(_up(hi))}\n"
        for x, lo, hi in zip(env.xs, env.low, env.high)
    )
    quoted = data_name.replace("\\", "\\\\").replace('"', '\\"')
    script = "\n".join(
        [
            "# generated by rigorplot",
            "unset key",
            f"set xrange [{_g(_down(xf.x1))}:{_g(_up(xf.x2))}]",
            f"set yrange [{_g(_down(yf.y1))}:{_g(_up(yf.y2))}]",
            "set style fill solid 1.0 noborder",
            f'plot "{quoted}" using 1:2:3 with filledcurves lc rgb "#1f4e9a"',
            "",
        ]
    )
    return script, data


# -- svg -------------------------------------------------------------------------

_MARGIN = (64, 16, 16, 40)  # left, top, right, bottom in pixels


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick values (1, 2 or 5 times a power of ten) inside ``[lo, hi]``."""
    span = hi - lo
    if not span > 0 or not math.isfinite(span):
        return [lo]
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step)
    ticks = []
    k = first
    while k * step <= hi + step * 1e-9 and len(ticks) <= 4 * target:
        ticks.append(k * step)
        k += 1
    return ticks


def _num(v: float) -> str:
    return f"{v:.17g}"


def emit_svg(p2: Plot2, width_px: int = 640, height_px: int = 480) -> str:
    """Standalone SVG with the band and labelled axes.

    The plot area is a nested ``<svg>`` whose viewBox is in plot coordinates
    (y negated); the polygon carries a ``scale(1,-1)`` transform so its
    point list holds the true (x, y) values.
    """
    if width_px < 1 or height_px < 1:
        raise ValueError("SVG size must be positive")
    xf, yf = p2.xframe, p2.yframe
    ml, mt, mr, mb = _MARGIN
    pw, ph = max(width_px - ml - mr, 1), max(height_px - mt - mb, 1)
    x1, x2 = float(xf.x1), float(xf.x2)
    y1, y2 = float(yf.y1), float(yf.y2)
    env = envelope(p2)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" height="{height_px}" '
        f'viewBox="0 0 {width_px} {height_px}">',
        f'<rect x="0" y="0" width="{width_px}" height="{height_px}" fill="white"/>',
        f'<svg x="{ml}" y="{mt}" width="{pw}" height="{ph}" '
        f'viewBox="{_num(x1)} {_num(-y2)} {_num(x2 - x1)} {_num(y2 - y1)}" '
        'preserveAspectRatio="none">',
    ]
    if env.xs:
        pts = [(x, hi) for x, hi in zip(env.xs, env.high)]
        pts += [(x, lo) for x, lo in reversed(list(zip(env.xs, env.low)))]
        points = " ".join(f"{_num(float(x))},{_num(float(y))}" for x, y in pts)
        out.append(f'<polygon transform="scale(1,-1)" fill="#1f4e9a" points="{points}"/>')
    out.append("</svg>")

    def px(x):
        # an empty plot (w = 0) has no x extent
        return ml + (x - x1) / (x2 - x1) * pw if x2 > x1 else ml

    def py(y):
        return mt + (y2 - y) / (y2 - y1) * ph

    out.append(
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>'
    )
    out.append('<g font-family="sans-serif" font-size="10" fill="black" stroke="black">')
    for t in nice_ticks(x1, x2) if x2 > x1 else []:
        u = px(t)
        out.append(f'<line x1="{u:.2f}" y1="{mt + ph}" x2="{u:.2f}" y2="{mt + ph + 4}"/>')
        out.append(
            f'<text x="{u:.2f}" y="{mt + ph + 16}" text-anchor="middle" stroke="none">{t:.6g}</text>'
        )
    for t in nice_ticks(y1, y2):
        v = py(t)
        out.append(f'<line x1="{ml - 4}" y1="{v:.2f}" x2="{ml}" y2="{v:.2f}"/>')
        out.append(
            f'<text x="{ml - 6}" y="{v + 3:.2f}" text-anchor="end" stroke="none">{t:.6g}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
