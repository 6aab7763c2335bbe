"""Taylor models: rigorous polynomial approximations over an interval.

A model of ``f`` over the domain ``X`` is a polynomial ``p`` in powers of
``(x - c)`` with interval coefficients together with a remainder interval
``rem`` such that

    p(x) - f(x) in rem    for every x in X.

Enclosures of ``f`` over a subset ``T`` of ``X`` are then ``p(T) - rem``.
"""

from __future__ import annotations

from fractions import Fraction

from . import interval as ia
from .expr import Binary, BinaryOp, Const, Expr, Unary, UnaryOp, Var
from .interval import DEFAULT_PREC, NAI, ZERO, Interval


class ModelError(ArithmeticError):
    """A Taylor model could not be built (domain violation or overflow)."""


class Basis:
    """Domain ``X``, expansion point ``c`` and cached bounds of ``(X - c)^k``.

    Every model taking part in one construction shares a single basis.
    """

    __slots__ = ("domain", "center", "offset", "prec", "_powers", "_radii")

    def __init__(self, domain: Interval, prec: int = DEFAULT_PREC):
        if domain is NAI:
            raise ModelError("cannot expand over NAI")
        self.domain = domain
        self.prec = ia.check_prec(prec)
        self.center = ia.midpoint(domain, prec)
        self.offset = ia.sub(domain, Interval(self.center, self.center), prec)
        self._powers = [Interval(ia.exact(1), ia.exact(1)), self.offset]
        self._radii = [ia.exact(1), ia.mag(self.offset)]

    def power(self, k: int) -> Interval:
        """Enclosure of ``(x - c)^k`` over the domain."""
        while len(self._powers) <= k:
            self._powers.append(ia.pow_int(self.offset, len(self._powers), self.prec))
        return self._powers[k]

    def radius(self, k: int):
        """Upper bound of ``|x - c|^k`` over the domain."""
        while len(self._radii) <= k:
            self._radii.append(ia.mag(self.power(len(self._radii))))
        return self._radii[k]

    def same(self, other: "Basis") -> bool:
        return self is other or (
            self.prec == other.prec and self.center == other.center and self.domain == other.domain
        )

    def __repr__(self):
        return f"Basis({self.domain!r}, center={self.center!s})"


class TaylorModel:
    __slots__ = ("basis", "coeffs", "rem", "_range")

    def __init__(self, basis: Basis, coeffs, rem: Interval):
        self.basis = basis
        self.coeffs = tuple(coeffs)
        self.rem = rem
        self._range = None

    @property
    def domain(self) -> Interval:
        return self.basis.domain

    @property
    def center(self):
        return self.basis.center

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def prec(self) -> int:
        return self.basis.prec

    def poly_range(self) -> Interval:
        """Enclosure of ``p`` over the whole domain."""
        if self._range is None:
            prec = self.prec
            acc = self.coeffs[0]
            for k in range(1, len(self.coeffs)):
                c = self.coeffs[k]
                if not ia.is_zero(c):
                    acc = ia.add(acc, ia.mul(c, self.basis.power(k), prec), prec)
            self._range = acc
        return self._range

    def range(self) -> Interval:
        """Enclosure of the modelled function over the domain."""
        return ia.sub(self.poly_range(), self.rem, self.prec)

    def is_constant(self) -> bool:
        return ia.is_zero(self.rem) and all(ia.is_zero(c) for c in self.coeffs[1:])

    def __repr__(self):
        return f"TaylorModel(deg={self.degree}, center={self.center!s}, rem={self.rem!r})"


def _basis(x, prec: int) -> Basis:
    return x if isinstance(x, Basis) else Basis(x, prec)


def _check_same(a: TaylorModel, b: TaylorModel):
    if not a.basis.same(b.basis):
        raise ValueError(f"Taylor models over different bases: {a.basis!r} vs {b.basis!r}")


# -- base cases --------------------------------------------------------------


def tm_const(v: Interval, x, deg: int, prec: int = DEFAULT_PREC) -> TaylorModel:
    """Model of a constant function; ``x`` is a domain interval or a `Basis`."""
    if deg < 0:
        raise ValueError("degree must be >= 0")
    if v is NAI:
        raise ModelError("constant is NAI")
    basis = _basis(x, prec)
    return TaylorModel(basis, (v,) + (ZERO,) * deg, ZERO)


def tm_var(x, deg: int, prec: int = DEFAULT_PREC) -> TaylorModel:
    """Model of the identity function."""
    if deg < 0:
        raise ValueError("degree must be >= 0")
    basis = _basis(x, prec)
    c = Interval(basis.center, basis.center)
    if deg == 0:
        # p = c, so p - x ranges over c - X
        return TaylorModel(basis, (c,), ia.neg(basis.offset))
    one = Interval(ia.exact(1), ia.exact(1))
    return TaylorModel(basis, (c, one) + (ZERO,) * (deg - 1), ZERO)


# -- arithmetic --------------------------------------------------------------


def _zip_coeffs(a, b, op, prec):
    n = max(len(a), len(b))
    a = a + (ZERO,) * (n - len(a))
    b = b + (ZERO,) * (n - len(b))
    return tuple(op(x, y, prec) for x, y in zip(a, b))


def tm_add(a: TaylorModel, b: TaylorModel) -> TaylorModel:
    _check_same(a, b)
    prec = a.prec
    return TaylorModel(a.basis, _zip_coeffs(a.coeffs, b.coeffs, ia.add, prec), ia.add(a.rem, b.rem, prec))


def tm_sub(a: TaylorModel, b: TaylorModel) -> TaylorModel:
    _check_same(a, b)
    prec = a.prec
    return TaylorModel(a.basis, _zip_coeffs(a.coeffs, b.coeffs, ia.sub, prec), ia.sub(a.rem, b.rem, prec))


def tm_neg(a: TaylorModel) -> TaylorModel:
    return TaylorModel(a.basis, tuple(ia.neg(c) for c in a.coeffs), ia.neg(a.rem))


def tm_add_const(a: TaylorModel, v: Interval) -> TaylorModel:
    coeffs = (ia.add(a.coeffs[0], v, a.prec),) + a.coeffs[1:]
    return TaylorModel(a.basis, coeffs, a.rem)


def tm_mul(a: TaylorModel, b: TaylorModel, deg: int) -> TaylorModel:
    """Product truncated at ``deg``.

    With ``f_a = p_a - d_a`` and ``f_b = p_b - d_b``::

        trunc(p_a p_b) - f_a f_b = -tail + p_a d_b + p_b d_a - d_a d_b

    and the tail (terms above ``deg``) is bounded by magnitudes.
    """
    _check_same(a, b)
    basis, prec = a.basis, a.prec
    d, u, _ = ia.contexts(prec)
    pa, pb = a.coeffs, b.coeffs
    na, nb = len(pa) - 1, len(pb) - 1
    nz_a = [i for i in range(na + 1) if not ia.is_zero(pa[i])]
    nz_b = [j for j in range(nb + 1) if not ia.is_zero(pb[j])]

    # accumulate raw bounds; NAI coefficients cannot occur in a model
    lo = [ia.exact(0)] * (deg + 1)
    hi = [ia.exact(0)] * (deg + 1)
    for i in nz_a:
        a1, a2 = pa[i].lo, pa[i].hi
        for j in nz_b:
            k = i + j
            if k > deg:
                break
            p1, p2 = ia.mul_bounds(a1, a2, pb[j].lo, pb[j].hi, d, u)
            lo[k] = d.add(lo[k], p1)
            hi[k] = u.add(hi[k], p2)
    out = [ia.interval_from_bounds(x, y) for x, y in zip(lo, hi)]
    if any(c is NAI for c in out):
        raise ModelError("coefficient overflow")

    tail = ZERO
    if na + nb > deg:
        # suffix[j] = sum over j' >= j of |b_j'| r^j'
        weights_b = [ia.exact(0)] * (nb + 2)
        for j in range(nb, -1, -1):
            wb = u.mul(ia.mag(pb[j]), basis.radius(j)) if j in nz_b else 0
            weights_b[j] = u.add(weights_b[j + 1], wb)
        bound = ia.exact(0)
        for i in nz_a:
            j0 = deg - i + 1
            if j0 < 0:
                j0 = 0
            if j0 > nb:
                continue
            bound = u.add(bound, u.mul(u.mul(ia.mag(pa[i]), basis.radius(i)), weights_b[j0]))
        if bound > 0:
            tail = Interval(ia.negate(bound), bound)

    rem = tail
    ra_zero, rb_zero = ia.is_zero(a.rem), ia.is_zero(b.rem)
    if not rb_zero:
        rem = ia.add(rem, ia.mul(a.poly_range(), b.rem, prec), prec)
    if not ra_zero:
        rem = ia.add(rem, ia.mul(b.poly_range(), a.rem, prec), prec)
    if not (ra_zero or rb_zero):
        rem = ia.sub(rem, ia.mul(a.rem, b.rem, prec), prec)
    if rem is NAI:
        raise ModelError("remainder overflow in product")
    return TaylorModel(basis, out, rem)


def tm_pow(a: TaylorModel, n: int, deg: int, prec: int = DEFAULT_PREC) -> TaylorModel:
    if n < 0:
        return tm_elem("inv", tm_pow(a, -n, deg, prec), deg, prec)
    result = None
    base = a
    while n:
        if n & 1:
            result = base if result is None else tm_mul(result, base, deg)
        n >>= 1
        if n:
            base = tm_mul(base, base, deg)
    if result is None:
        return tm_const(Interval(ia.exact(1), ia.exact(1)), a.basis, deg)
    return result


# -- elementary functions ----------------------------------------------------


def _factorial_div(values, prec):
    out = []
    fact = 1
    for k, v in enumerate(values):
        if k > 1:
            fact *= k
        out.append(v if fact == 1 else ia.divk(v, fact, prec))
    return out


def _binom_half(k: int) -> Fraction:
    c = Fraction(1)
    for j in range(k):
        c *= (Fraction(1, 2) - j) / (j + 1)
    return c


def jet(f: str, y: Interval, n: int, prec: int = DEFAULT_PREC) -> list[Interval]:
    """Enclosures of ``f^(k)(y) / k!`` over ``y`` for ``k = 0..n``."""
    if f == "exp":
        out = [ia.exp(y, prec)]
        for k in range(1, n + 1):
            out.append(ia.divk(out[-1], k, prec))
        return out
    if f in ("sin", "cos"):
        s, c = ia.sin(y, prec), ia.cos(y, prec)
        cycle = [s, c, ia.neg(s), ia.neg(c)] if f == "sin" else [c, ia.neg(s), ia.neg(c), s]
        return _factorial_div([cycle[k % 4] for k in range(n + 1)], prec)
    if f == "ln":
        r = ia.inv(y, prec)
        out = [ia.ln(y, prec)]
        for k in range(1, n + 1):
            t = ia.divk(ia.pow_int(r, k, prec), k, prec)
            out.append(t if k % 2 else ia.neg(t))
        return out
    if f == "inv":
        r = ia.inv(y, prec)
        out = []
        for k in range(n + 1):
            t = ia.pow_int(r, k + 1, prec)
            out.append(ia.neg(t) if k % 2 else t)
        return out
    if f == "sqrt":
        s, r = ia.sqrt(y, prec), ia.inv(y, prec)
        out = [s]
        for k in range(1, n + 1):
            coef = ia.point(_binom_half(k), prec)
            out.append(ia.mul(coef, ia.mul(s, ia.pow_int(r, k, prec), prec), prec))
        return out
    if f == "atan":
        # k >= 1: (-1)^(k-1)/k * Im((y + i)^k) / (1 + y^2)^k, and |value| <= 1/k
        out = [ia.atan(y, prec)]
        one_plus = ia.add(Interval(ia.exact(1), ia.exact(1)), ia.sqr(y, prec), prec)
        binom = [1]
        for k in range(1, n + 1):
            binom = [1] + [binom[j] + binom[j + 1] for j in range(len(binom) - 1)] + [1]
            im = ZERO
            for j in range(1, k + 1, 2):
                coef = binom[j] if (j - 1) % 4 == 0 else -binom[j]
                im = ia.add(im, ia.scale(ia.pow_int(y, k - j, prec), coef, prec), prec)
            t = ia.divk(ia.div(im, ia.pow_int(one_plus, k, prec), prec), k, prec)
            if k % 2 == 0:
                t = ia.neg(t)
            cap = ia.divk(Interval(ia.exact(-1), ia.exact(1)), k, prec)
            t = ia.meet(t, cap) or cap
            out.append(t)
        return out
    if f == "tan":
        out = [ia.tan(y, prec)]
        if out[0] is NAI:
            return [NAI] * (n + 1)
        for k in range(1, n + 1):
            acc = Interval(ia.exact(1), ia.exact(1)) if k == 1 else ZERO
            m = k - 1
            for j in range(0, m // 2 + 1):
                if j < m - j:
                    acc = ia.add(acc, ia.scale(ia.mul(out[j], out[m - j], prec), 2, prec), prec)
                else:
                    acc = ia.add(acc, ia.sqr(out[j], prec), prec)
            out.append(ia.divk(acc, k, prec))
        return out
    raise ValueError(f"no Taylor jet for {f!r}")


_ELEM_NAMES = {
    UnaryOp.EXP: "exp",
    UnaryOp.LN: "ln",
    UnaryOp.SIN: "sin",
    UnaryOp.COS: "cos",
    UnaryOp.TAN: "tan",
    UnaryOp.ATAN: "atan",
    UnaryOp.SQRT: "sqrt",
    UnaryOp.INV: "inv",
    UnaryOp.ABS: "abs",
}


def _smooth_on(f: str, r: Interval) -> bool:
    if f in ("ln", "sqrt"):
        return r.lo > 0
    if f == "inv":
        return not ia.contains_zero(r)
    if f == "tan":
        return ia.tan(r) is not NAI
    return True


def tm_elem(f, a: TaylorModel, deg: int, prec: int = DEFAULT_PREC) -> TaylorModel:
    """Compose the elementary function ``f`` with the model ``a``.

    ``f`` is expanded to order ``n = deg + 1`` about the midpoint ``m`` of
    the range ``R`` of ``a``; the Lagrange term
    ``f^(n+1)(R)/(n+1)! (R - m)^(n+1)`` bounds the rest.  The series is
    substituted into ``a - m`` by Horner's rule with products truncated at
    ``deg``, which folds the order-``n`` term into the remainder.
    """
    if isinstance(f, UnaryOp):
        f = _ELEM_NAMES[f]
    basis = a.basis
    r = a.range()
    if r is NAI:
        raise ModelError(f"{f}: unbounded argument range")

    if f == "abs":
        if r.lo >= 0:
            return a
        if r.hi <= 0:
            return tm_neg(a)
        # not smooth at 0: zero polynomial, remainder -|R|
        return TaylorModel(basis, (ZERO,) * (deg + 1), ia.neg(ia.fabs(r)))

    if not _smooth_on(f, r):
        raise ModelError(f"{f} is not defined (or not smooth) on {r!r}")

    if a.is_constant():
        v = ia.elem(f, a.coeffs[0], prec)
        if v is NAI:
            raise ModelError(f"{f} undefined at constant {a.coeffs[0]!r}")
        return tm_const(v, basis, deg)

    # one term past deg: the truncation in tm_mul bounds it using its value at
    # m (often tiny or zero), and the Lagrange term moves up an order
    n = deg + 1
    m = ia.midpoint(r, prec)
    mi = Interval(m, m)
    series = jet(f, mi, n, prec)
    top = jet(f, r, n + 1, prec)[n + 1]
    lagrange = ia.mul(top, ia.pow_int(ia.sub(r, mi, prec), n + 1, prec), prec)
    if lagrange is NAI or any(c is NAI for c in series):
        raise ModelError(f"{f}: series bound failed on {r!r}")

    shifted = tm_add_const(a, ia.neg(mi))
    acc = tm_const(series[n], basis, deg)
    for k in range(n - 1, -1, -1):
        acc = tm_add_const(tm_mul(acc, shifted, deg), series[k])
    rem = ia.sub(acc.rem, lagrange, prec)
    if rem is NAI:
        raise ModelError(f"{f}: remainder overflow")
    return TaylorModel(basis, acc.coeffs, rem)


# -- whole expressions -------------------------------------------------------


def tm_build(e: Expr, x: Interval, deg: int, prec: int = DEFAULT_PREC) -> TaylorModel:
    """Taylor model of the expression ``e`` over ``x``.

    Raises `ModelError` when some sub-expression leaves its domain.
    """
    if deg < 0:
        raise ValueError("degree must be >= 0")
    basis = Basis(x, prec)
    consts: dict[Fraction, TaylorModel] = {}
    var = tm_var(basis, deg)

    def build(node) -> TaylorModel:
        if isinstance(node, Var):
            return var
        if isinstance(node, Const):
            m = consts.get(node.value)
            if m is None:
                m = consts[node.value] = tm_const(ia.point(node.value, prec), basis, deg)
            return m
        if isinstance(node, Unary):
            a = build(node.child)
            op = node.op
            if op is UnaryOp.NEG:
                return tm_neg(a)
            if op is UnaryOp.SQR:
                return tm_mul(a, a, deg)
            if op is UnaryOp.POW_INT:
                return tm_pow(a, node.exponent, deg, prec)
            return tm_elem(op, a, deg, prec)
        if isinstance(node, Binary):
            a, b = build(node.left), build(node.right)
            op = node.op
            if op is BinaryOp.ADD:
                return tm_add(a, b)
            if op is BinaryOp.SUB:
                return tm_sub(a, b)
            if op is BinaryOp.MUL:
                return tm_mul(a, b, deg)
            return tm_mul(a, tm_elem("inv", b, deg, prec), deg)
        raise TypeError(f"not an expression: {node!r}")

    model = build(e)
    if model.rem is NAI or any(c is NAI for c in model.coeffs):
        raise ModelError("model construction overflowed")
    return model


def tm_eval(m: TaylorModel, t: Interval, prec: int | None = None) -> Interval:
    """Enclosure of the modelled function over ``t``, a subset of the domain."""
    if prec is None:
        prec = m.prec
    if not ia.subset(t, m.domain):
        raise ValueError(f"{t!r} is not inside the model domain {m.domain!r}")
    s = ia.sub(t, Interval(m.center, m.center), prec)
    return ia.sub(_horner(m.coeffs, s, prec), m.rem, prec)


def tm_eval_tight(m: TaylorModel, t: Interval, prec: int | None = None) -> Interval:
    """`tm_eval`, narrowed to the endpoint hull where ``p`` is monotone on ``t``.

    The derivative of ``p`` is enclosed over ``t`` by Horner; when it
    excludes zero every polynomial with coefficients in the model's boxes is
    monotone there, so ``p(t)`` lies between the endpoint enclosures.
    """
    if prec is None:
        prec = m.prec
    y = tm_eval(m, t, prec)
    coeffs = m.coeffs
    if len(coeffs) < 2 or y is NAI:
        return y
    c = Interval(m.center, m.center)
    s = ia.sub(t, c, prec)
    acc = ia.scale(coeffs[-1], len(coeffs) - 1, prec)
    for k in range(len(coeffs) - 2, 0, -1):
        acc = ia.add(ia.mul(acc, s, prec), ia.scale(coeffs[k], k, prec), prec)
    if ia.contains_zero(acc):
        return y
    ends = ia.join(_horner(coeffs, ia.sub(Interval(t.lo, t.lo), c, prec), prec),
                   _horner(coeffs, ia.sub(Interval(t.hi, t.hi), c, prec), prec))
    return ia.meet(y, ia.sub(ends, m.rem, prec)) or y


def _horner(coeffs, s: Interval, prec: int) -> Interval:
    acc = coeffs[-1]
    for k in range(len(coeffs) - 2, -1, -1):
        acc = ia.add(ia.mul(acc, s, prec), coeffs[k], prec)
    return acc
