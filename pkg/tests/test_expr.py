import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigorplot import interval as ia
from rigorplot.expr import (
    Binary,
    BinaryOp,
    Const,
    ParseError,
    Unary,
    UnaryOp,
    Var,
    eval_interval,
    eval_point,
    format,
    parse,
    show,
)
from rigorplot.interval import NAI

from oracles import evaluate, mpf


def test_reference_reification_example():
    e = parse("cos(x) + 3")
    assert e == Binary(BinaryOp.ADD, Unary(UnaryOp.COS, Var(0)), Const(Fraction(3)))
    assert show(e) == "Binary Add (Unary Cos (Var 0)) (Const 3)"


def test_var():
    assert parse("x") == Var(0)


def test_nested_call():
    e = parse("sin(x + exp(x))")
    assert e == Unary(UnaryOp.SIN, Binary(BinaryOp.ADD, Var(0), Unary(UnaryOp.EXP, Var(0))))


def test_literals_are_exact():
    assert parse("820/8192") == Binary(BinaryOp.DIV, Const(Fraction(820)), Const(Fraction(8192)))
    assert parse("0.1") == Const(Fraction(1, 10))
    assert parse("1e-3") == Const(Fraction(1, 1000))
    assert parse("-5/16384") == Binary(
        BinaryOp.DIV, Unary(UnaryOp.NEG, Const(Fraction(5))), Const(Fraction(16384))
    )


def test_precedence():
    x = Var(0)
    assert parse("1 + 2 * x") == Binary(
        BinaryOp.ADD, Const(Fraction(1)), Binary(BinaryOp.MUL, Const(Fraction(2)), x)
    )
    assert parse("x - 1 - 2") == Binary(
        BinaryOp.SUB, Binary(BinaryOp.SUB, x, Const(Fraction(1))), Const(Fraction(2))
    )
    # minus binds looser than a power, as in ordinary notation
    assert parse("-x^2") == Unary(UnaryOp.NEG, Unary(UnaryOp.POW_INT, x, 2))
    assert parse("(-x)^2") == Unary(UnaryOp.POW_INT, Unary(UnaryOp.NEG, x), 2)
    assert parse("x**3") == Unary(UnaryOp.POW_INT, x, 3)
    assert parse("x^(-2)") == Unary(UnaryOp.POW_INT, x, -2)


def test_constants_pi_and_e():
    with mpmath.workdps(40):
        assert mpf(ia.as_fractions(eval_point(parse("pi"), 0, 90))[0]) <= mpmath.pi
        assert mpmath.pi <= mpf(ia.as_fractions(eval_point(parse("pi"), 0, 90))[1])
        lo, hi = ia.as_fractions(eval_point(parse("e"), 0, 90))
        assert mpf(lo) <= mpmath.e <= mpf(hi)


@pytest.mark.parametrize(
    "text, pos",
    [
        ("x +", 3),
        ("y + 1", 0),
        ("foo(x)", 0),
        ("sin x", 4),
        ("x^1.5", 2),
        ("(x", 2),
        ("x $ 1", 2),
        ("x^2^3", 3),
    ],
)
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.position == pos


def test_unknown_variable_message():
    with pytest.raises(ParseError, match="only 'x'"):
        parse("t * 2")


def test_eval_interval_dependency_loss():
    r = eval_interval(parse("x*x - x"), ia.interval(0, 1))
    lo, hi = ia.as_fractions(r)
    assert lo <= Fraction(-1, 4) and hi >= 0
    assert lo >= -1 and hi <= 1


def test_eval_const_and_points():
    assert eval_interval(parse("3"), ia.interval(-5, 5)) == ia.interval(3, 3)
    r = eval_interval(parse("cos(x) + 3"), ia.interval(0, 0))
    assert 4 in r and ia.width(r) <= 4 * ia.ulp(4, 53)
    r = eval_point(parse("x^2"), Fraction(3, 10), 20)
    assert ia.contains(r, Fraction(9, 100)) and ia.width(r, 20) <= 4 * ia.ulp(Fraction(9, 100), 20)
    assert 1 in eval_point(parse("exp(x)"), 0)
    assert eval_point(parse("ln(x)"), -1) is NAI


# -- random trees -----------------------------------------------------------------

UNARY_OPS = [op for op in UnaryOp if op is not UnaryOp.POW_INT]
SAFE_CONSTS = st.sampled_from(
    [Fraction(0), Fraction(1), Fraction(3), Fraction(1, 2), Fraction(1, 10), Fraction(25, 4), Fraction(7)]
)


def trees(max_leaves=12):
    leaves = st.one_of(st.just(Var(0)), SAFE_CONSTS.map(Const))

    def extend(children):
        return st.one_of(
            st.builds(Unary, st.sampled_from(UNARY_OPS), children),
            st.builds(
                lambda c, n: Unary(UnaryOp.POW_INT, c, n), children, st.integers(-3, 4)
            ),
            st.builds(Binary, st.sampled_from(list(BinaryOp)), children, children),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@settings(max_examples=1000, deadline=None)
@given(trees())
def test_format_parse_round_trip(e):
    assert parse(format(e)) == e


def random_tree(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return Var(0) if rng.random() < 0.6 else Const(Fraction(rng.randint(0, 9), rng.choice([1, 2, 4])))
    r = rng.random()
    if r < 0.45:
        op = rng.choice([UnaryOp.NEG, UnaryOp.EXP, UnaryOp.SIN, UnaryOp.COS, UnaryOp.ATAN, UnaryOp.SQR,
                         UnaryOp.ABS, UnaryOp.SQRT, UnaryOp.LN, UnaryOp.INV, UnaryOp.TAN])
        return Unary(op, random_tree(rng, depth - 1))
    if r < 0.55:
        return Unary(UnaryOp.POW_INT, random_tree(rng, depth - 1), rng.randint(-2, 3))
    return Binary(rng.choice(list(BinaryOp)), random_tree(rng, depth - 1), random_tree(rng, depth - 1))


def test_point_inside_interval_soundness():
    """Point enclosures at 3x precision sit inside naive interval enclosures."""
    rng = random.Random(11)
    checked = 0
    for _ in range(600):
        e = random_tree(rng, 4)
        prec = rng.choice([24, 53])
        a = Fraction(rng.randint(-300, 300), 100)
        b = a + Fraction(rng.randint(1, 200), 100)
        x = a + (b - a) * Fraction(rng.randint(0, 100), 100)
        outer = eval_interval(e, ia.interval(a, b, prec), prec)
        inner = eval_point(e, x, 3 * prec)
        if outer is NAI or inner is NAI:
            continue
        checked += 1
        assert ia.subset(inner, outer), (format(e), a, b, x)
        # and the exact value (via mpmath) is inside too
        v = evaluate(e, x)
        if v is not None:
            lo, hi = ia.as_fractions(outer)
            assert mpf(lo) <= v <= mpf(hi)
    assert checked > 200


def test_eval_interval_monotone_in_x():
    rng = random.Random(12)
    for _ in range(400):
        e = random_tree(rng, 4)
        a = Fraction(rng.randint(-300, 300), 100)
        b = a + Fraction(rng.randint(1, 200), 100)
        c = a + (b - a) * Fraction(rng.randint(0, 50), 100)
        d = b - (b - a) * Fraction(rng.randint(0, 50), 100)
        outer = eval_interval(e, ia.interval(a, b))
        inner = eval_interval(e, ia.interval(c, d))
        if outer is NAI:
            continue
        assert inner is not NAI and ia.subset(inner, outer), format(e)
