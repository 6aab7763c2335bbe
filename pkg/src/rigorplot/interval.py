"""Outward-rounded interval arithmetic over MPFR floats.

Every operation takes the working precision explicitly; there is no
ambient rounding mode.  Bounds are ``gmpy2.mpfr`` values and each bound is
produced by a single directed rounding, so for any reals ``u in U`` and
``v in V`` the exact ``u op v`` lies in ``op(U, V, prec)``.

``NAI`` ("not an interval") contains every real.  It is returned for
domain violations and absorbs every operation it takes part in.
"""

from __future__ import annotations

import functools
from fractions import Fraction
from numbers import Rational

import gmpy2
from gmpy2 import mpfr, mpq

DEFAULT_PREC = 53

_INF = mpfr("inf")
_NINF = mpfr("-inf")
_ZERO = mpfr(0)
_ONE = mpfr(1)


@functools.lru_cache(maxsize=None)
def contexts(prec: int) -> tuple:
    """Return the (round-down, round-up, round-nearest) contexts for ``prec`` bits."""
    check_prec(prec)
    return (
        gmpy2.context(precision=prec, round=gmpy2.RoundDown),
        gmpy2.context(precision=prec, round=gmpy2.RoundUp),
        gmpy2.context(precision=prec, round=gmpy2.RoundToNearest),
    )


def check_prec(prec) -> int:
    if not isinstance(prec, int) or isinstance(prec, bool) or prec < 2:
        raise ValueError(f"precision must be an integer >= 2, got {prec!r}")
    return prec


class Interval:
    """Closed interval ``[lo, hi]`` with MPFR bounds.

    Instances are immutable by convention.  Build them through `point`,
    `interval` or the arithmetic functions rather than directly, since the
    constructor does not round or validate.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = lo
        self.hi = hi

    @property
    def is_nai(self) -> bool:
        return self is NAI

    def __repr__(self):
        if self is NAI:
            return "NAI"
        return f"Interval({self.lo!s}, {self.hi!s})"

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        if self is NAI or other is NAI:
            return self is other
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __contains__(self, x):
        return contains(self, x)


NAI = Interval(_NINF, _INF)
ZERO = Interval(_ZERO, _ZERO)


def exact(k):
    """Integer (or mpfr) as an mpfr without rounding."""
    if isinstance(k, mpfr):
        return k
    return mpfr(k, max(2, abs(k).bit_length()))


def _mk(lo, hi) -> Interval:
    # any non-finite bound (overflow, inf - inf, ...) degrades to NAI
    if not (gmpy2.is_finite(lo) and gmpy2.is_finite(hi)):
        return NAI
    return Interval(lo, hi)


def negate(v):
    """Exact ``-v``; the ``-`` operator would round to gmpy2's global context."""
    return contexts(max(v.precision, 2))[2].minus(v)


def magnitude(v):
    """Exact ``|v|``."""
    return v if v >= 0 else negate(v)


def interval_from_bounds(lo, hi) -> Interval:
    """Interval from already-rounded mpfr bounds; NAI if either is not finite."""
    return _mk(lo, hi)


def to_mpfr(x, ctx):
    """Round a real number to ``ctx`` (its precision and rounding direction)."""
    if isinstance(x, mpfr):
        return ctx.plus(x)
    if isinstance(x, float):
        return ctx.plus(mpfr(x))
    if isinstance(x, str):
        x = Fraction(x)
    if isinstance(x, (int, Rational)) or type(x).__name__ in ("mpz", "mpq"):
        q = mpq(x) if not isinstance(x, Fraction) else mpq(x.numerator, x.denominator)
        return mpfr(q, 0, ctx)
    raise TypeError(f"cannot convert {type(x).__name__} to a bound")


def point(x, prec: int = DEFAULT_PREC) -> Interval:
    """Thin enclosure of the real ``x`` (exact when representable)."""
    d, u, _ = contexts(prec)
    return _mk(to_mpfr(x, d), to_mpfr(x, u))


def interval(lo, hi, prec: int = DEFAULT_PREC) -> Interval:
    """Outward-rounded enclosure of ``[lo, hi]``."""
    d, u, _ = contexts(prec)
    a, b = to_mpfr(lo, d), to_mpfr(hi, u)
    if a > b:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    return _mk(a, b)


def from_fraction(x: Fraction, prec: int = DEFAULT_PREC) -> Interval:
    return point(x, prec)


# -- accessors ---------------------------------------------------------------


def lower(x: Interval):
    return x.lo


def upper(x: Interval):
    return x.hi


def width(x: Interval, prec: int = DEFAULT_PREC):
    """Width rounded up; ``+inf`` for NAI."""
    if x is NAI:
        return _INF
    return contexts(prec)[1].sub(x.hi, x.lo)


def midpoint(x: Interval, prec: int = DEFAULT_PREC):
    """Nearest-rounded midpoint, guaranteed to lie inside ``x``."""
    if x is NAI:
        raise ValueError("midpoint of NAI")
    n = contexts(prec)[2]
    m = n.div(n.add(x.lo, x.hi), 2)
    # x.lo / x.hi may carry more bits than prec; clamping keeps m inside
    return min(max(m, x.lo), x.hi)


def mag(x: Interval):
    """Largest absolute value in ``x``."""
    if x is NAI:
        return _INF
    return max(magnitude(x.lo), magnitude(x.hi))


def mig(x: Interval):
    """Smallest absolute value in ``x``."""
    if x is NAI:
        return _ZERO
    if x.lo > 0:
        return x.lo
    if x.hi < 0:
        return negate(x.hi)
    return _ZERO


def contains(x: Interval, v) -> bool:
    if x is NAI:
        return True
    if isinstance(v, Interval):
        return subset(v, x)
    if isinstance(v, Fraction):
        v = mpq(v.numerator, v.denominator)
    return x.lo <= v <= x.hi


def subset(a: Interval, b: Interval) -> bool:
    """True when ``a`` is contained in ``b``."""
    if b is NAI:
        return True
    if a is NAI:
        return False
    return b.lo <= a.lo and a.hi <= b.hi


def contains_zero(x: Interval) -> bool:
    return x is NAI or (x.lo <= 0 <= x.hi)


def is_zero(x: Interval) -> bool:
    return x is not NAI and x.lo == 0 and x.hi == 0


def join(a: Interval, b: Interval) -> Interval:
    """Smallest interval containing both operands."""
    if a is NAI or b is NAI:
        return NAI
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi))


def meet(a: Interval, b: Interval):
    """Intersection, or None when the operands are disjoint."""
    if a is NAI:
        return b
    if b is NAI:
        return a
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    if lo > hi:
        return None
    return Interval(lo, hi)


def as_fractions(x: Interval) -> tuple[Fraction, Fraction]:
    if x is NAI:
        raise ValueError("NAI has no finite bounds")
    return to_fraction(x.lo), to_fraction(x.hi)


def to_fraction(v) -> Fraction:
    """Exact value of a finite mpfr."""
    n, d = v.as_integer_ratio()
    return Fraction(int(n), int(d))


# -- arithmetic --------------------------------------------------------------


def neg(x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI:
        return NAI
    return Interval(negate(x.hi), negate(x.lo))


def add(x: Interval, y: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI or y is NAI:
        return NAI
    d, u, _ = contexts(prec)
    return _mk(d.add(x.lo, y.lo), u.add(x.hi, y.hi))


def sub(x: Interval, y: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI or y is NAI:
        return NAI
    d, u, _ = contexts(prec)
    return _mk(d.sub(x.lo, y.hi), u.sub(x.hi, y.lo))


def mul_bounds(a, b, c, e, d, u):
    """Rounded bounds of ``[a, b] * [c, e]`` as a tuple (no NAI handling)."""
    if a >= 0:
        if c >= 0:
            return d.mul(a, c), u.mul(b, e)
        if e <= 0:
            return d.mul(b, c), u.mul(a, e)
        return d.mul(b, c), u.mul(b, e)
    if b <= 0:
        if c >= 0:
            return d.mul(a, e), u.mul(b, c)
        if e <= 0:
            return d.mul(b, e), u.mul(a, c)
        return d.mul(a, e), u.mul(a, c)
    # [a, b] straddles zero
    if c >= 0:
        return d.mul(a, e), u.mul(b, e)
    if e <= 0:
        return d.mul(b, c), u.mul(a, c)
    return min(d.mul(a, e), d.mul(b, c)), max(u.mul(a, c), u.mul(b, e))


def mul(x: Interval, y: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI or y is NAI:
        return NAI
    d, u, _ = contexts(prec)
    return _mk(*mul_bounds(x.lo, x.hi, y.lo, y.hi, d, u))


def scale(x: Interval, k, prec: int = DEFAULT_PREC) -> Interval:
    """Multiply by an exact scalar (int or mpfr)."""
    if x is NAI:
        return NAI
    d, u, _ = contexts(prec)
    k = exact(k)
    if k >= 0:
        return _mk(d.mul(x.lo, k), u.mul(x.hi, k))
    return _mk(d.mul(x.hi, k), u.mul(x.lo, k))


def div(x: Interval, y: Interval, prec: int = DEFAULT_PREC) -> Interval:
    """Quotient; NAI whenever the denominator contains zero."""
    if x is NAI or y is NAI or contains_zero(y):
        return NAI
    d, u, _ = contexts(prec)
    a, b, c, e = x.lo, x.hi, y.lo, y.hi
    if c > 0:
        if a >= 0:
            return _mk(d.div(a, e), u.div(b, c))
        if b <= 0:
            return _mk(d.div(a, c), u.div(b, e))
        return _mk(d.div(a, c), u.div(b, c))
    if a >= 0:
        return _mk(d.div(b, e), u.div(a, c))
    if b <= 0:
        return _mk(d.div(b, c), u.div(a, e))
    return _mk(d.div(b, e), u.div(a, e))


def divk(x: Interval, k: int, prec: int = DEFAULT_PREC) -> Interval:
    """Divide by a nonzero exact integer."""
    if x is NAI:
        return NAI
    d, u, _ = contexts(prec)
    k = exact(k)
    if k > 0:
        return _mk(d.div(x.lo, k), u.div(x.hi, k))
    return _mk(d.div(x.hi, k), u.div(x.lo, k))


def inv(x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI or contains_zero(x):
        return NAI
    d, u, _ = contexts(prec)
    return _mk(d.div(_ONE, x.hi), u.div(_ONE, x.lo))


def sqr(x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    return pow_int(x, 2, prec)


def pow_int(x: Interval, n: int, prec: int = DEFAULT_PREC) -> Interval:
    """``x**n`` for an integer exponent; negative powers go through `inv`."""
    if x is NAI:
        return NAI
    if n == 0:
        return Interval(_ONE, _ONE)
    if n < 0:
        return inv(pow_int(x, -n, prec), prec)
    if n == 1:
        return x
    d, u, _ = contexts(prec)
    a, b = x.lo, x.hi
    if n % 2:
        return _mk(d.pow(a, n), u.pow(b, n))
    if a >= 0:
        return _mk(d.pow(a, n), u.pow(b, n))
    if b <= 0:
        return _mk(d.pow(b, n), u.pow(a, n))
    return _mk(_ZERO, u.pow(max(negate(a), b), n))


def fabs(x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI:
        return NAI
    if x.lo >= 0:
        return x
    if x.hi <= 0:
        return Interval(negate(x.hi), negate(x.lo))
    return Interval(_ZERO, max(negate(x.lo), x.hi))


def sqrt(x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI or x.lo < 0:
        return NAI
    d, u, _ = contexts(prec)
    return _mk(d.sqrt(x.lo), u.sqrt(x.hi))


def exp(x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI:
        return NAI
    d, u, _ = contexts(prec)
    return _mk(d.exp(x.lo), u.exp(x.hi))


def ln(x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI or x.lo <= 0:
        return NAI
    d, u, _ = contexts(prec)
    return _mk(d.log(x.lo), u.log(x.hi))


def atan(x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI:
        return NAI
    d, u, _ = contexts(prec)
    return _mk(d.atan(x.lo), u.atan(x.hi))


def pi(prec: int = DEFAULT_PREC) -> Interval:
    d, u, _ = contexts(prec)
    return Interval(d.const_pi(), u.const_pi())


def _quarter_turns(x: Interval, prec: int) -> tuple[int, int] | None:
    """Integers n with n*pi/2 possibly inside ``x``, as an inclusive range.

    Returns None when no such multiple can lie in ``x``.  The range is
    conservative: it may include a multiple that is actually just outside.
    """
    wp = prec + 32
    d, u, _ = contexts(wp)
    half_lo = d.div(d.const_pi(), 2)
    half_hi = u.div(u.const_pi(), 2)
    a, b = x.lo, x.hi
    t_lo = d.div(a, half_hi) if a >= 0 else d.div(a, half_lo)
    t_hi = u.div(b, half_lo) if b >= 0 else u.div(b, half_hi)
    n_lo = int(gmpy2.ceil(t_lo))
    n_hi = int(gmpy2.floor(t_hi))
    if n_lo > n_hi:
        return None
    return n_lo, n_hi


def _trig(x: Interval, prec: int, fn: str, max_phase: int) -> Interval:
    # max_phase: residue mod 4 of the quarter-turn index where fn attains +1
    d, u, _ = contexts(prec)
    turns = _quarter_turns(x, prec)
    if turns is not None and turns[1] - turns[0] >= 3:
        return Interval(-_ONE, _ONE)
    fd, fu = getattr(d, fn), getattr(u, fn)
    lo = min(fd(x.lo), fd(x.hi))
    hi = max(fu(x.lo), fu(x.hi))
    if turns is not None:
        for n in range(turns[0], turns[1] + 1):
            r = (n - max_phase) % 4
            if r == 0:
                hi = _ONE
            elif r == 2:
                lo = -_ONE
    return _mk(max(lo, -_ONE), min(hi, _ONE))


def sin(x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI:
        return NAI
    return _trig(x, prec, "sin", 1)


def cos(x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    if x is NAI:
        return NAI
    return _trig(x, prec, "cos", 0)


def tan(x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    """Tangent; NAI when ``x`` may contain a pole."""
    if x is NAI:
        return NAI
    turns = _quarter_turns(x, prec)
    if turns is not None:
        n_lo, n_hi = turns
        if n_hi > n_lo or n_lo % 2:
            return NAI
    d, u, _ = contexts(prec)
    return _mk(d.tan(x.lo), u.tan(x.hi))


ELEMENTARY = {
    "exp": exp,
    "ln": ln,
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "atan": atan,
    "sqrt": sqrt,
    "abs": fabs,
    "inv": inv,
    "sqr": sqr,
}


def elem(f: str, x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    """Apply the named elementary function; see `ELEMENTARY`."""
    try:
        fn = ELEMENTARY[f]
    except KeyError:
        raise ValueError(f"unknown elementary function {f!r}") from None
    return fn(x, prec)


def ulp(v, prec: int):
    """Unit in the last place of ``v`` at ``prec`` bits (``v`` nonzero)."""
    v = v if isinstance(v, mpfr) else mpfr(v, 256)
    e = gmpy2.get_exp(v) if v != 0 else 0
    return mpfr(2) ** (e - prec)

