import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normlab import dsl
from normlab.dsl import (
    SymbolContext,
    SymbolEvalError,
    SymbolSyntaxError,
    UnknownIdentifierError,
    VariableIndexError,
    diff_symbol,
    eval_symbol,
    load_symbol_file,
    parse_symbol,
    sample_symbol,
)
from normlab.phase import PhaseGrid, PhasePoint


def P(x, xi):
    return PhasePoint(np.atleast_1d(x), np.atleast_1d(xi))


def test_parse_and_evaluate(sym):
    F = sym("exp(-(x1^2 + p1^2))")
    assert eval_symbol(F, P(1.0, 1.0)).real == pytest.approx(math.exp(-2), abs=1e-15)
    assert eval_symbol(sym("x1*p1"), P(2.0, 3.0)).real == 6.0
    assert eval_symbol(sym("1"), P(-7.0, 0.1)).real == 1.0


def test_index_out_of_range(sym):
    with pytest.raises(VariableIndexError):
        sym("x2 + 1")


def test_unbalanced_paren_offset(sym):
    text = "p1*(x1"
    with pytest.raises(SymbolSyntaxError) as err:
        sym(text)
    assert err.value.offset == len(text.encode())


def test_unknown_identifier(sym):
    with pytest.raises(UnknownIdentifierError):
        sym("foo(x1)")


def test_builtin_potentials(sym):
    z = P(0.5, 0.0)
    assert eval_symbol(sym("lorentz(x1)"), z).real == pytest.approx(1 / 1.25)
    assert eval_symbol(sym("gauss(x1)"), z).real == pytest.approx(math.exp(-0.25))
    assert eval_symbol(sym("cos2(x1)"), z).real == pytest.approx(1 + math.cos(0.5))


def test_guarded_division(sym):
    F = sym("1/x1")
    with pytest.raises(SymbolEvalError):
        eval_symbol(F, P(0.0, 0.0))


def test_derivative_examples(sym):
    d2 = diff_symbol(sym("x1^2"), (2,), (0,))
    assert d2.is_zero() is False
    for x in (-3.0, 0.0, 2.5):
        assert eval_symbol(d2, P(x, 0.0)).real == 2.0
    e = sym("exp(x1)")
    assert diff_symbol(e, (4,), (0,)).same_as(e)


def test_derivative_finite_difference_oracle(sym):
    F = sym("sin(2*x1)")
    dF = diff_symbol(F, (1,), (0,))
    rng = np.random.default_rng(5)
    step = 1e-5
    for x in rng.uniform(-3, 3, 20):
        fd = (eval_symbol(F, P(x + step, 0)).real - eval_symbol(F, P(x - step, 0)).real) / (2 * step)
        assert eval_symbol(dF, P(x, 0)).real == pytest.approx(fd, abs=1e-6)
        assert eval_symbol(dF, P(x, 0)).real == pytest.approx(2 * math.cos(2 * x), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_mixed_derivative_matches_finite_differences(x, p):
    F = parse_symbol("exp(-x1^2/2)*cos(p1 + x1)/(2 + sin(x1))", SymbolContext(1))
    d = diff_symbol(F, (1,), (1,))
    s = 1e-4

    def f(a, b):
        return eval_symbol(F, P(a, b)).real

    fd = (f(x + s, p + s) - f(x + s, p - s) - f(x - s, p + s) + f(x - s, p - s)) / (4 * s * s)
    assert eval_symbol(d, P(x, p)).real == pytest.approx(fd, abs=1e-6)


def test_order_cap(sym):
    with pytest.raises(ValueError):
        diff_symbol(sym("x1"), (5,), (0,))


def test_sampling_examples():
    grid = PhaseGrid.uniform(1, 4.0, 16)
    ones = sample_symbol(parse_symbol("1", SymbolContext(1)), grid)
    assert np.all(ones.values == 1)
    xs = sample_symbol(parse_symbol("x1", SymbolContext(1)), grid)
    # FFT-style nodes [-L, L): dropping -L leaves a symmetric set
    x_axis = xs.values[1:, 0].real
    assert abs(x_axis.sum()) < 1e-12
    assert np.array_equal(x_axis, -x_axis[::-1])
    g = sample_symbol(parse_symbol("exp(-(x1^2 + p1^2))", SymbolContext(1)), grid)
    i, j = np.unravel_index(np.argmax(np.abs(g.values)), g.values.shape)
    nodes_x, nodes_p = grid.axes[0].nodes, grid.axes[1].nodes
    assert abs(nodes_x[i]) == np.min(np.abs(nodes_x))
    assert abs(nodes_p[j]) == np.min(np.abs(nodes_p))


def test_symbol_file(tmp_path):
    path = tmp_path / "sym.txt"
    path.write_text("# a comment\nexp(-(x1^2 +\n p1^2))\n", encoding="utf-8")
    F = load_symbol_file(path, SymbolContext(1))
    assert eval_symbol(F, P(0.0, 0.0)).real == 1.0


def test_substitute_and_potential_node():
    ctx = SymbolContext(2)
    V = ctx.potential("lorentz")
    node = dsl.substitute(V, {("y", 0): dsl.sub(dsl.var("x", 1), dsl.var("x", 2))})
    F = dsl.SymbolExpr(node, 2)
    z = PhasePoint([1.0, 3.0], [0.0, 0.0])
    assert eval_symbol(F, z).real == pytest.approx(1 / (1 + 4))
