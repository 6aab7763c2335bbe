"""Reference computations for the test suite, independent of rigorplot.

Everything here uses mpmath at high precision; nothing imports the
package's interval or Taylor-model code.
"""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction

import mpmath

FUNCS = {
    "exp": mpmath.exp,
    "ln": mpmath.log,
    "sin": mpmath.sin,
    "cos": mpmath.cos,
    "tan": mpmath.tan,
    "atan": mpmath.atan,
    "sqrt": mpmath.sqrt,
    "abs": abs,
    "inv": lambda v: 1 / v,
    "sqr": lambda v: v * v,
}


def mpf(q: Fraction):
    """mpmath value of ``q``: exact for dyadic rationals, else correctly rounded
    to far more bits than any bound in the tests carries."""
    q = Fraction(q)
    bits = max(q.numerator.bit_length(), q.denominator.bit_length()) + 256
    with mpmath.workprec(bits):
        return mpmath.mpf(q.numerator) / q.denominator


def evaluate(e, x: Fraction, dps: int = 60):
    """Evaluate an expression tree with mpmath; None where undefined."""
    from rigorplot.expr import Binary, BinaryOp, Const, Unary, UnaryOp, Var

    with mpmath.workdps(dps):

        def ev(n):
            if isinstance(n, Var):
                return mpf(x)
            if isinstance(n, Const):
                return mpf(n.value)
            if isinstance(n, Unary):
                v = ev(n.child)
                op = n.op
                if op is UnaryOp.NEG:
                    return -v
                if op is UnaryOp.POW_INT:
                    if n.exponent < 0 and v == 0:
                        raise ZeroDivisionError
                    return v ** n.exponent
                if op in (UnaryOp.LN,) and v <= 0:
                    raise ValueError
                if op is UnaryOp.SQRT and v < 0:
                    raise ValueError
                if op is UnaryOp.INV and v == 0:
                    raise ZeroDivisionError
                if op is UnaryOp.TAN and mpmath.cos(v) == 0:
                    raise ZeroDivisionError
                return FUNCS[op.value.lower()](v)
            a, b = ev(n.left), ev(n.right)
            if n.op is BinaryOp.ADD:
                return a + b
            if n.op is BinaryOp.SUB:
                return a - b
            if n.op is BinaryOp.MUL:
                return a * b
            if b == 0:
                raise ZeroDivisionError
            return a / b

        try:
            return ev(e)
        except (ValueError, ZeroDivisionError):
            return None


def remez(f, a, b, n: int, iterations: int = 30, dps: int = 60):
    """Minimax polynomial of degree ``n`` for ``f`` on ``[a, b]``.

    Returns the monomial coefficients (low degree first) and the levelled
    error.  Plain exchange algorithm with golden-section extremum search.
    """
    with mpmath.workdps(dps):
        a, b = mpmath.mpf(a), mpmath.mpf(b)
        m = n + 2
        xs = [(a + b) / 2 - (b - a) / 2 * mpmath.cos(mpmath.pi * i / (m - 1)) for i in range(m)]
        coeffs, lev = None, None
        for _ in range(iterations):
            mat = mpmath.matrix(m, m)
            rhs = mpmath.matrix(m, 1)
            for i, x in enumerate(xs):
                for k in range(n + 1):
                    mat[i, k] = x**k
                mat[i, n + 1] = (-1) ** i
                rhs[i] = f(x)
            sol = mpmath.lu_solve(mat, rhs)
            coeffs = [sol[k] for k in range(n + 1)]
            lev = sol[n + 1]

            def err(x):
                return mpmath.polyval(coeffs[::-1], x) - f(x)

            roots = [_bisect(err, xs[i], xs[i + 1]) for i in range(m - 1)]
            edges = [a] + roots + [b]
            new = [_argmax_abs(err, edges[i], edges[i + 1]) for i in range(m)]
            shift = max(abs(p - q) for p, q in zip(new, xs))
            xs = new
            if shift < (b - a) * mpmath.mpf(10) ** (-dps // 2):
                break
        return coeffs, lev


def _bisect(g, lo, hi, steps: int = 200):
    glo = g(lo)
    for _ in range(steps):
        mid = (lo + hi) / 2
        gm = g(mid)
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return (lo + hi) / 2


def _argmax_abs(g, lo, hi, steps: int = 120):
    r = (mpmath.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - r * (b - a), a + r * (b - a)
    fc, fd = abs(g(c)), abs(g(d))
    for _ in range(steps):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - r * (b - a)
            fc = abs(g(c))
        else:
            a, c, fc = c, d, fd
            d = a + r * (b - a)
            fd = abs(g(d))
    best = (a + b) / 2
    for cand in (lo, hi):
        if abs(g(cand)) > abs(g(best)):
            best = cand
    return best


def double_coefficients(coeffs) -> list[Fraction]:
    """Round to binary64 (nearest) and return the exact values."""
    return [Fraction(Decimal(float(c))) for c in coeffs]


def horner_text(coeffs: list[Fraction]) -> str:
    """``c0 + x*(c1 + x*(...))`` with exact decimal literals."""
    text = _exact_decimal(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        text = f"{_exact_decimal(c)} + x*({text})"
    return text


def _exact_decimal(q: Fraction) -> str:
    # binary64 values are dyadic, so the decimal expansion terminates
    den, k = q.denominator, 0
    while den % 2 == 0:
        den //= 2
        k += 1
    assert den == 1, q
    digits = str(abs(q.numerator) * 5**k).rjust(k + 1, "0")
    out = digits if k == 0 else f"{digits[:-k]}.{digits[-k:]}"
    return f"(-{out})" if q < 0 else out


def minimax_exp_double():
    """Degree-6 minimax of exp on [-1/32, 1/32] with binary64 coefficients."""
    coeffs, _ = remez(mpmath.exp, mpmath.mpf(-1) / 32, mpmath.mpf(1) / 32, 6)
    return double_coefficients(coeffs)


def sign_changes(values) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def column_range(e, x_lo: Fraction, x_hi: Fraction, n: int, dps: int = 40):
    """Dense-sample under-approximation of f over a column (None if undefined)."""
    vals = []
    for k in range(n + 1):
        v = evaluate(e, x_lo + (x_hi - x_lo) * Fraction(k, n), dps)
        if v is not None:
            vals.append(v)
    if not vals:
        return None
    return min(vals), max(vals)
