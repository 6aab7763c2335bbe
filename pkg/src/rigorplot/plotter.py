"""Adaptive enclosure of a function graph, one interval per pixel column.

The pipeline is: sample the function to guess the pixel height, enclose
every column with Taylor models built over adaptively bisected pieces of
the x-range (`enclose_columns`, giving a `Plot1`), choose the y-frame, and
quantize to integer pixel runs (`quantize`, giving a `Plot2`).

Frames use exact rationals.  A `Plot1` satisfies: for every column ``i``
and every real ``x`` in ``[ox + dx*i, ox + dx*(i+1)]`` where f is defined,
``f(x)`` lies in ``cols[i]``.  A `Plot2` satisfies the same statement for
the pixel run ``[oy + dy*z1, oy + dy*z2]``, restricted to values inside
``[oy, oy + dy*h]``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import interval as ia
from .expr import Expr, eval_interval, eval_point
from .interval import NAI, Interval
from .rpa import ModelError, TaylorModel, tm_build, tm_eval, tm_eval_tight

log = logging.getLogger(__name__)

# frame parameters chosen by auto_yframe are dyadic with this many significant bits
FRAME_BITS = 10
# an automatic frame is at least 2**RESOLUTION_BITS ulps (at the working
# precision) per pixel tall
RESOLUTION_BITS = 6


class PlotError(Exception):
    """The plot cannot be produced (bad ranges, no finite value to frame)."""


@dataclass(frozen=True)
class XFrame:
    ox: Fraction
    dx: Fraction
    w: int

    def __post_init__(self):
        if self.dx <= 0:
            raise PlotError(f"dx must be positive, got {self.dx}")
        if self.w < 0:
            raise PlotError(f"w must be >= 0, got {self.w}")

    def boundary(self, i) -> Fraction:
        return self.ox + self.dx * i

    @property
    def x1(self) -> Fraction:
        return self.ox

    @property
    def x2(self) -> Fraction:
        return self.ox + self.dx * self.w


@dataclass(frozen=True)
class YFrame:
    oy: Fraction
    dy: Fraction
    h: int

    def __post_init__(self):
        if self.dy <= 0:
            raise PlotError(f"dy must be positive, got {self.dy}")
        if self.h < 1:
            raise PlotError(f"h must be >= 1, got {self.h}")

    def row(self, z) -> Fraction:
        return self.oy + self.dy * z

    @property
    def y1(self) -> Fraction:
        return self.oy

    @property
    def y2(self) -> Fraction:
        return self.oy + self.dy * self.h


@dataclass(frozen=True)
class Plot1:
    frame: XFrame
    cols: tuple
    stats: dict = field(default_factory=dict, compare=False, repr=False)

    def column(self, i: int) -> Interval:
        """Enclosure for column ``i``; NAI past the end of the list."""
        if 0 <= i < len(self.cols):
            return self.cols[i]
        return NAI


@dataclass(frozen=True)
class Plot2:
    xframe: XFrame
    yframe: YFrame
    cols: tuple

    def __post_init__(self):
        h = self.yframe.h
        for z1, z2 in self.cols:
            if not 0 <= z1 <= z2 <= h:
                raise PlotError(f"invalid pixel run ({z1}, {z2}) for h={h}")

    def run(self, i: int) -> tuple[int, int]:
        """Pixel run for column ``i``; ``(0, h)`` past the end of the list."""
        if 0 <= i < len(self.cols):
            return self.cols[i]
        return (0, self.yframe.h)


@dataclass(frozen=True)
class PlotConfig:
    prec: int = 53
    degree: int = 10
    slack: int = 2  # "a few pixels" for the completeness test
    samples: int = 50  # abscissas used to estimate the y-range
    max_depth: int = 48
    width: int = 512
    height: int = 384
    # bisections of a column reusing the current model before giving up on it
    refine: int = 4
    # model builds allowed per plot before falling back to naive evaluation;
    # None means 16 per column (typical plots need fewer than 6)
    max_builds: int | None = None
    method: str = "taylor"  # or "naive"
    workers: int = 1

    def __post_init__(self):
        ia.check_prec(self.prec)
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        if self.slack < 1:
            raise ValueError("slack must be >= 1")
        if self.samples < 2:
            raise ValueError("at least two samples are needed")
        if self.max_depth < 0 or self.refine < 0 or (self.max_builds or 0) < 0:
            raise ValueError("depth limits must be >= 0")
        if self.width < 1 or self.height < 1:
            raise ValueError("plot size must be at least 1x1")
        if self.method not in ("taylor", "naive"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if hasattr(v, "as_integer_ratio"):
        n, d = v.as_integer_ratio()
        return Fraction(int(n), int(d))
    return Fraction(v)


# -- y-range estimation ------------------------------------------------------


def estimate_yframe(e: Expr, xf: XFrame, cfg: PlotConfig = PlotConfig()):
    """Under-estimate of the range of f from evenly spaced samples.

    Both endpoints are sampled.  Returns ``(ylo, yhi)`` as mpfr values.
    """
    n = cfg.samples
    lo = hi = None
    for k in range(n):
        x = xf.x1 + (xf.x2 - xf.x1) * Fraction(k, n - 1)
        y = eval_point(e, x, cfg.prec)
        if y is NAI:
            continue
        lo = y.lo if lo is None else min(lo, y.lo)
        hi = y.hi if hi is None else max(hi, y.hi)
    if lo is None:
        raise PlotError("cannot estimate range: the function is undefined at every sample")
    return lo, hi


def _degenerate_pad(v: Fraction) -> Fraction:
    return max(abs(v) * Fraction(1, 2**20), Fraction(1, 2**20))


def dy_from_range(ylo, yhi, h: int, prec: int | None = None) -> Fraction:
    """Pixel height for an estimated range.

    With ``prec`` the height is kept well above the rounding error of
    values of that magnitude; otherwise a function that is constant up to
    rounding would ask for pixels no enclosure can resolve.
    """
    lo, hi = _as_fraction(ylo), _as_fraction(yhi)
    if hi == lo:
        pad = _degenerate_pad(lo)
        lo, hi = lo - pad, hi + pad
    if prec is not None:
        floor = h * max(abs(lo), abs(hi)) / Fraction(2) ** (prec - RESOLUTION_BITS)
        if hi - lo < floor:
            mid = (lo + hi) / 2
            lo, hi = mid - floor / 2, mid + floor / 2
    return (hi - lo) / h


# -- completeness test -------------------------------------------------------


def completeness_check(
    m: TaylorModel, xi: Interval, yi: Interval, dy, t: int, prec: int | None = None
) -> bool:
    """Endpoint test: is ``yi`` within ``t`` pixels of values f actually takes?

    ``Z`` and ``Z'`` enclose f at the two ends of ``xi``.  The lower bound
    of ``yi`` is accepted when one of ``upper(Z)``, ``upper(Z')`` is at most
    ``t*dy`` above it; the upper bound symmetrically.
    """
    if yi is NAI:
        return False
    prec = m.prec if prec is None else prec
    d, u, _ = ia.contexts(prec)
    thr = d.mul(ia.to_mpfr(_as_fraction(dy), d), t)
    return _check(m, xi, yi, thr, prec)


def _check(m, xi, yi, thr, prec) -> bool:
    u = ia.contexts(prec)[1]
    z = tm_eval(m, Interval(xi.lo, xi.lo), prec)
    if z is NAI:
        return False
    lo_ok = u.sub(z.hi, yi.lo) <= thr
    hi_ok = u.sub(yi.hi, z.lo) <= thr
    if lo_ok and hi_ok:
        return True
    z2 = tm_eval(m, Interval(xi.hi, xi.hi), prec)
    if z2 is NAI:
        return False
    lo_ok = lo_ok or u.sub(z2.hi, yi.lo) <= thr
    hi_ok = hi_ok or u.sub(yi.hi, z2.lo) <= thr
    return lo_ok and hi_ok


# -- column enclosure --------------------------------------------------------


@dataclass(frozen=True)
class _Piece:
    lo: Fraction
    hi: Fraction
    first: int  # first column index covered
    last: int  # one past the last column covered
    pending: tuple  # columns still needing an enclosure
    depth: int

    @property
    def sub_column(self) -> bool:
        return self.last - self.first == 1


class _Encloser:
    def __init__(self, e: Expr, xf: XFrame, dy_hint: Fraction, cfg: PlotConfig):
        self.e = e
        self.xf = xf
        self.cfg = cfg
        self.prec = cfg.prec
        d = ia.contexts(cfg.prec)[0]
        self.thr = d.mul(ia.to_mpfr(dy_hint, d), cfg.slack)

    def col_bounds(self, i: int, piece: _Piece) -> tuple[Fraction, Fraction]:
        if piece.sub_column:
            return piece.lo, piece.hi
        return self.xf.boundary(i), self.xf.boundary(i + 1)

    def naive(self, i: int, piece: _Piece) -> Interval:
        a, b = self.col_bounds(i, piece)
        return eval_interval(self.e, ia.interval(a, b, self.prec), self.prec)

    def refined(self, m: TaylorModel, a: Fraction, b: Fraction, levels: int):
        """Enclose f over [a, b] with ``m``, bisecting up to ``levels`` times."""
        t = ia.interval(a, b, self.prec)
        y = tm_eval_tight(m, t, self.prec)
        if _check(m, t, y, self.thr, self.prec):
            return y, True
        if levels == 0:
            return y, False
        mid = (a + b) / 2
        y1, ok = self.refined(m, a, mid, levels - 1)
        if not ok:
            return y, False
        y2, ok = self.refined(m, mid, b, levels - 1)
        if not ok:
            return y, False
        return ia.join(y1, y2), True

    def process(self, piece: _Piece, allowed: bool):
        """Returns (accepted {col: Interval}, children, built_model)."""
        if not allowed:
            return {i: self.naive(i, piece) for i in piece.pending}, [], False
        prec = self.prec
        x = ia.interval(piece.lo, piece.hi, prec)
        accepted = {}
        failed = []
        may_split = True
        try:
            m = tm_build(self.e, x, self.cfg.degree, prec)
        except ModelError:
            m = None
        if m is None:
            failed = list(piece.pending)
            if piece.sub_column and eval_interval(self.e, x, prec) is NAI:
                # domain violation inside this column: no point in splitting further
                may_split = False
        elif ia.width(m.rem, prec) > self.thr:
            failed = list(piece.pending)
        else:
            levels = min(self.cfg.refine, self.cfg.max_depth - piece.depth)
            for i in piece.pending:
                a, b = self.col_bounds(i, piece)
                y, ok = self.refined(m, a, b, levels)
                if ok:
                    accepted[i] = y
                else:
                    failed.append(i)

        children = []
        if failed and may_split and piece.depth < self.cfg.max_depth:
            children = self.split(piece, failed)
        else:
            for i in failed:
                accepted[i] = self.naive(i, piece)
        return accepted, children, m is not None

    def split(self, piece: _Piece, failed) -> list[_Piece]:
        depth = piece.depth + 1
        if piece.sub_column:
            mid = (piece.lo + piece.hi) / 2
            return [
                _Piece(piece.lo, mid, piece.first, piece.last, piece.pending, depth),
                _Piece(mid, piece.hi, piece.first, piece.last, piece.pending, depth),
            ]
        cut = (piece.first + piece.last) // 2
        children = []
        for group in ([i for i in failed if i < cut], [i for i in failed if i >= cut]):
            if not group:
                continue
            first, last = group[0], group[-1] + 1
            children.append(
                _Piece(self.xf.boundary(first), self.xf.boundary(last), first, last, tuple(group), depth)
            )
        return children


def enclose_columns(e: Expr, xf: XFrame, dy_hint, cfg: PlotConfig = PlotConfig()) -> Plot1:
    """Enclose f over every pixel column (a `Plot1`).

    Works breadth-first over pieces of the x-range.  Each piece gets one
    Taylor model; a column is accepted when its enclosure passes the
    endpoint completeness test (after up to ``cfg.refine`` bisections of
    the column evaluated with the same model).  Otherwise the piece is
    bisected, at a column boundary while it spans several columns and at
    its midpoint once it lies inside a single column.  At ``max_depth``,
    or once ``max_builds`` models have been built, remaining columns use
    naive interval evaluation.
    """
    dy_hint = _as_fraction(dy_hint)
    if dy_hint <= 0:
        raise PlotError("dy_hint must be positive")
    if cfg.method == "naive":
        return naive_columns(e, xf, cfg)
    w = xf.w
    enc = _Encloser(e, xf, dy_hint, cfg)
    parts: list[list[Interval]] = [[] for _ in range(w)]
    level = [_Piece(xf.boundary(0), xf.boundary(w), 0, w, tuple(range(w)), 0)] if w else []
    budget = cfg.max_builds if cfg.max_builds is not None else 16 * w + 256
    stats = {"pieces": 0, "models": 0, "levels": 0}
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        while level:
            allowed = [k < budget for k in range(len(level))]
            budget -= min(budget, len(level))
            if pool is None:
                results = [enc.process(p, ok) for p, ok in zip(level, allowed)]
            else:
                results = list(pool.map(enc.process, level, allowed))
            nxt = []
            for accepted, children, built in results:
                for i, y in accepted.items():
                    parts[i].append(y)
                nxt.extend(children)
                stats["models"] += built
            stats["pieces"] += len(level)
            stats["levels"] += 1
            level = nxt
    finally:
        if pool is not None:
            pool.shutdown()
    cols = []
    for ys in parts:
        acc = ys[0]
        for y in ys[1:]:
            acc = ia.join(acc, y)
        cols.append(acc)
    log.debug("enclose_columns: %s", stats)
    return Plot1(xf, tuple(cols), stats)


def naive_columns(e: Expr, xf: XFrame, cfg: PlotConfig = PlotConfig()) -> Plot1:
    """Plain interval evaluation of every column (no polynomial models)."""
    cols = tuple(
        eval_interval(e, ia.interval(xf.boundary(i), xf.boundary(i + 1), cfg.prec), cfg.prec)
        for i in range(xf.w)
    )
    return Plot1(xf, cols, {"pieces": 0, "models": 0, "levels": 0})


# -- quantization ------------------------------------------------------------


def quantize(p1: Plot1, yf: YFrame) -> Plot2:
    """Turn column enclosures into pixel runs ``(z1, z2)`` with ``0 <= z1 <= z2 <= h``."""
    h = yf.h
    runs = []
    for y in p1.cols:
        if y is NAI:
            runs.append((0, h))
            continue
        lo, hi = ia.as_fractions(y)
        z1 = math.floor((lo - yf.oy) / yf.dy)
        z2 = math.ceil((hi - yf.oy) / yf.dy)
        z1 = min(max(z1, 0), h)
        z2 = min(max(z2, 0), h)
        runs.append((z1, z2))
    return Plot2(p1.frame, yf, tuple(runs))


def _dyadic_up(q: Fraction, bits: int = FRAME_BITS) -> Fraction:
    """Smallest dyadic >= q > 0 with ``bits`` significant bits."""
    e = q.numerator.bit_length() - q.denominator.bit_length()
    # 2**(e-1) < q < 2**(e+1); aim for a significand in [2**(bits-1), 2**bits)
    shift = bits - e
    scaled = q * Fraction(2) ** shift
    return Fraction(math.ceil(scaled)) / Fraction(2) ** shift


def frame_for_range(lo, hi, h: int, prec: int | None = None) -> YFrame:
    """Y-frame with ``oy <= lo`` and ``oy + dy*h >= hi``, half a pixel of margin."""
    lo, hi = _as_fraction(lo), _as_fraction(hi)
    if hi < lo:
        raise PlotError("empty y-range")
    dy = dy_from_range(lo, hi, h, prec)
    if dy * h > hi - lo:
        mid = (lo + hi) / 2
        lo, hi = mid - dy * h / 2, mid + dy * h / 2
    span = hi - lo
    margin = span / (2 * h)
    dy = _dyadic_up((span + 2 * margin) / h)
    grid = dy / 2**FRAME_BITS
    oy = math.floor((lo - margin) / grid) * grid
    yf = YFrame(oy, dy, h)
    assert yf.y1 <= lo and yf.y2 >= hi
    return yf


def auto_yframe(p1: Plot1, h: int, prec: int | None = None) -> YFrame:
    """Frame covering the union of all finite column enclosures."""
    lo = hi = None
    for y in p1.cols:
        if y is NAI:
            continue
        lo = y.lo if lo is None else min(lo, y.lo)
        hi = y.hi if hi is None else max(hi, y.hi)
    if lo is None:
        raise PlotError("no finite range: every column is NAI")
    return frame_for_range(lo, hi, h, prec)


# -- driver ------------------------------------------------------------------


@dataclass(frozen=True)
class PlotResult:
    plot1: Plot1
    plot2: Plot2
    dy_hint: Fraction


def make_xframe(x1, x2, w: int) -> XFrame:
    x1, x2 = _as_fraction(x1), _as_fraction(x2)
    if not x1 < x2:
        raise PlotError(f"need x1 < x2, got {x1} and {x2}")
    return XFrame(x1, (x2 - x1) / w, w)


def plot_full(e: Expr, x1, x2, y1=None, y2=None, cfg: PlotConfig = PlotConfig()) -> PlotResult:
    """Like `plot`, also returning the column enclosures."""
    if (y1 is None) != (y2 is None):
        raise PlotError("give both y1 and y2, or neither")
    xf = make_xframe(x1, x2, cfg.width)
    h = cfg.height
    if y1 is not None:
        y1, y2 = _as_fraction(y1), _as_fraction(y2)
        if not y1 < y2:
            raise PlotError(f"need y1 < y2, got {y1} and {y2}")
        yf = YFrame(y1, (y2 - y1) / h, h)
        p1 = enclose_columns(e, xf, yf.dy, cfg)
        return PlotResult(p1, quantize(p1, yf), yf.dy)
    ylo, yhi = estimate_yframe(e, xf, cfg)
    dy_hint = dy_from_range(ylo, yhi, h, cfg.prec)
    p1 = enclose_columns(e, xf, dy_hint, cfg)
    yf = auto_yframe(p1, h, cfg.prec)
    return PlotResult(p1, quantize(p1, yf), dy_hint)


def plot(e: Expr, x1, x2, y1=None, y2=None, cfg: PlotConfig = PlotConfig()) -> Plot2:
    """Correct plot of ``e`` over ``[x1, x2]`` at ``cfg.width x cfg.height``.

    When ``y1, y2`` are given they fix the y-frame; otherwise it is derived
    from the column enclosures.
    """
    return plot_full(e, x1, x2, y1, y2, cfg).plot2


def plot_in_frame(e: Expr, xf: XFrame, yf: YFrame, cfg: PlotConfig = PlotConfig()) -> Plot2:
    """Plot with both frames supplied exactly."""
    return quantize(enclose_columns(e, xf, yf.dy, cfg), yf)
