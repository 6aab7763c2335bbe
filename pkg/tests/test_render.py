import json
import random
import shutil
import subprocess
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigorplot.expr import parse
from rigorplot.plotter import Plot2, PlotConfig, XFrame, YFrame, plot, plot_in_frame
from rigorplot.render import (
    FormatError,
    emit_gnuplot,
    emit_json,
    emit_runs,
    emit_svg,
    envelope,
    format_number,
    hexfloat,
    nice_ticks,
    parse_hexfloat,
    parse_json,
    parse_number,
    parse_runs,
)

from golden_cases import GOLDEN, REF_X, REF_Y, cases, renders

REF_COLS = ((0, 2), (0, 5), (3, 9), (8, 16), (15, 25), (24, 36), (35, 49), (48, 64), (62, 81), (79, 100))
REF = Plot2(REF_X, REF_Y, REF_COLS)


# -- numbers ----------------------------------------------------------------------


def test_hexfloat_matches_float_hex():
    rng = random.Random(3)
    for _ in range(2000):
        v = rng.uniform(-1e6, 1e6) * 2.0 ** rng.randint(-60, 60)
        assert parse_hexfloat(hexfloat(Fraction(v))) == Fraction(v)
        assert float.fromhex(hexfloat(Fraction(v))) == v


def test_hexfloat_examples():
    assert hexfloat(Fraction(3, 4)) == "0x1.8p-1"
    assert hexfloat(0) == "0x0p+0"
    assert hexfloat(Fraction(820, 8192)) == "0x1.9ap-4"
    assert hexfloat(Fraction(-5, 16384)) == "-0x1.4p-12"
    assert hexfloat(1) == "0x1p+0"
    with pytest.raises(ValueError):
        hexfloat(Fraction(1, 3))


def test_wide_dyadic_round_trip():
    q = Fraction(2**200 + 1, 2**90)
    assert parse_hexfloat(hexfloat(q)) == q


def test_non_dyadic_written_as_fraction():
    assert format_number(Fraction(1, 3)) == "1/3"
    assert parse_number("1/3") == Fraction(1, 3)
    with pytest.raises(FormatError):
        parse_number("0.5")


# -- envelope ---------------------------------------------------------------------


def test_envelope_reference_boundary():
    env = envelope(REF)
    assert env.xs[3] == 3 * REF_X.dx
    assert env.low[3] == REF_Y.oy + 3 * REF_Y.dy
    assert env.high[3] == REF_Y.oy + 16 * REF_Y.dy


def test_envelope_single_column():
    yf = YFrame(Fraction(0), Fraction(1, 4), 8)
    env = envelope(Plot2(XFrame(Fraction(0), Fraction(1), 1), yf, ((2, 5),)))
    assert env.low == (yf.row(2), yf.row(2))
    assert env.high == (yf.row(5), yf.row(5))


def test_envelope_full_band():
    yf = YFrame(Fraction(-1), Fraction(1, 4), 8)
    env = envelope(Plot2(XFrame(Fraction(0), Fraction(1), 5), yf, ((0, 8),) * 5))
    assert set(env.low) == {yf.y1} and set(env.high) == {yf.y2}


def random_plot2(rng, w=None):
    w = rng.randint(0, 40) if w is None else w
    h = rng.randint(1, 60)
    cols = []
    for _ in range(w):
        z1 = rng.randint(0, h)
        cols.append((z1, rng.randint(z1, h)))
    xf = XFrame(Fraction(rng.randint(-50, 50), 8), Fraction(rng.randint(1, 40), rng.choice([1, 3, 64])), w)
    yf = YFrame(Fraction(rng.randint(-50, 50), 7), Fraction(rng.randint(1, 40), rng.choice([1, 5, 1024])), h)
    return Plot2(xf, yf, tuple(cols))


def test_envelope_containment_random():
    rng = random.Random(21)
    for _ in range(3000):
        p2 = random_plot2(rng)
        env = envelope(p2)
        yf = p2.yframe
        assert len(env.xs) == (p2.xframe.w + 1 if p2.xframe.w else 0)
        for lo, hi in zip(env.low, env.high):
            assert lo <= hi
        for i, (z1, z2) in enumerate(p2.cols):
            for b in (i, i + 1):
                assert env.low[b] <= yf.row(z1) and env.high[b] >= yf.row(z2)


# -- runs and json ------------------------------------------------------------------


def test_runs_reference_lines():
    lines = emit_runs(REF).splitlines()
    assert lines[0] == "# rigorplot runs"
    assert lines[1] == "0x0p+0 0x1.9ap-4 -0x1.4p-12 0x1.4c8p-7 10 100"
    assert lines[2] == "0 0 2" and lines[-1] == "9 79 100"
    assert len(lines) == 12


def test_runs_empty_and_default():
    yf = YFrame(Fraction(0), Fraction(1), 7)
    p2 = Plot2(XFrame(Fraction(0), Fraction(1), 2), yf, ((0, 0), (0, 7)))
    assert emit_runs(p2).splitlines()[2:] == ["0 0 0", "1 0 7"]


def test_runs_round_trip_random():
    rng = random.Random(22)
    for _ in range(500):
        p2 = random_plot2(rng)
        assert parse_runs(emit_runs(p2)) == p2


def test_runs_rejects_garbage():
    with pytest.raises(FormatError):
        parse_runs("nothing here")
    with pytest.raises(FormatError):
        parse_runs("# rigorplot runs\n0x0p+0 0x1p+0 0x0p+0 0x1p+0 1 4\n3 0 1\n")


def test_json_reference_round_trip():
    doc = json.loads(emit_json(REF))
    assert doc["dx"] == "0x1.9ap-4" and doc["w"] == "0x1.4p+3" and doc["h"] == "0x1.9p+6"
    assert doc["columns"][2] == [3, 9]
    assert parse_json(emit_json(REF)) == REF


def test_json_empty_plot():
    p2 = Plot2(XFrame(Fraction(0), Fraction(1), 0), YFrame(Fraction(0), Fraction(1), 3), ())
    doc = json.loads(emit_json(p2))
    assert doc["columns"] == [] and doc["w"] == "0x0p+0"
    assert parse_json(emit_json(p2)) == p2


def test_json_nai_plot_full_height():
    p2 = plot(parse("ln(x)"), -2, -1, Fraction(0), Fraction(1), PlotConfig(width=4, height=10))
    assert json.loads(emit_json(p2))["columns"] == [[0, 10]] * 4


def test_json_accepts_integer_sizes():
    doc = json.loads(emit_json(REF))
    doc["w"], doc["h"] = 10, 100
    assert parse_json(json.dumps(doc)) == REF
    doc["w"] = "0x1.8p+0"
    with pytest.raises(FormatError):
        parse_json(json.dumps(doc))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**6))
def test_json_round_trip_property(seed):
    p2 = random_plot2(random.Random(seed))
    assert parse_json(emit_json(p2)) == p2


# -- goldens and purity ---------------------------------------------------------------


@pytest.mark.parametrize("name", ["square", "constant", "nai"])
def test_goldens(name):
    p2 = cases()[name]
    for ext, text in renders(p2).items():
        assert text == (GOLDEN / f"{name}.{ext}").read_text(), f"{name}.{ext}"


def test_renders_are_pure():
    a = plot_in_frame(parse("x^2"), REF_X, REF_Y)
    b = plot_in_frame(parse("x^2"), REF_X, REF_Y)
    assert renders(a) == renders(b)


# -- gnuplot ----------------------------------------------------------------------------


def test_gnuplot_data_contains_exact_band():
    script, data = emit_gnuplot(REF, "p.dat")
    env = envelope(REF)
    rows = [tuple(float(t) for t in ln.split()) for ln in data.splitlines()]
    assert len(rows) == 11
    for (x, lo, hi), ex, elo, ehi in zip(rows, env.xs, env.low, env.high):
        assert Fraction(lo) <= elo and Fraction(hi) >= ehi
        assert float(ex) == x
    assert '"p.dat"' in script and "filledcurves" in script


@pytest.mark.skipif(shutil.which("gnuplot") is None, reason="gnuplot not installed")
def test_gnuplot_accepts_script(tmp_path):
    script, data = emit_gnuplot(REF, str(tmp_path / "p.dat"))
    (tmp_path / "p.dat").write_text(data)
    (tmp_path / "p.gp").write_text("set terminal dumb\n" + script)
    res = subprocess.run(["gnuplot", str(tmp_path / "p.gp")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr


# -- svg -------------------------------------------------------------------------------


def test_svg_structure():
    root = ET.fromstring(emit_svg(REF, 320, 240))
    ns = {"s": "http://www.w3.org/2000/svg"}
    assert root.get("width") == "320"
    inner = root.find("s:svg", ns)
    vb = [float(t) for t in inner.get("viewBox").split()]
    assert vb[0] == float(REF_X.x1) and vb[2] == float(REF_X.x2 - REF_X.x1)
    assert vb[1] == -float(REF_Y.y2)
    poly = inner.find("s:polygon", ns)
    pts = [tuple(map(float, p.split(","))) for p in poly.get("points").split()]
    assert len(pts) == 22
    # points are in plot coordinates: first is (x0, high_0)
    assert pts[0] == (0.0, float(REF_Y.row(2)))
    labels = [t.text for t in root.iter("{http://www.w3.org/2000/svg}text")]
    assert "0.2" in labels and "1" in labels


def test_svg_empty_plot_has_no_polygon():
    p2 = Plot2(XFrame(Fraction(0), Fraction(1), 0), YFrame(Fraction(0), Fraction(1), 3), ())
    assert "<polygon" not in emit_svg(p2)


def test_svg_size_validated():
    with pytest.raises(ValueError):
        emit_svg(REF, 0, 10)


def test_nice_ticks():
    assert nice_ticks(0, 1) == pytest.approx([0, 0.2, 0.4, 0.6, 0.8, 1.0])
    assert nice_ticks(-1, 1)[0] == pytest.approx(-1)
    assert nice_ticks(2, 2) == [2]
