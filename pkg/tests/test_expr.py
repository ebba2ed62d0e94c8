import math

import numpy as np
import pytest

from tetradlab import selftest
from tetradlab.expr import (ExprDomainError, ExprSyntaxError, UndeclaredSymbolError, eval_jet,
                            evaluate, free_symbols, parse, safe_mask, to_string)

SCH = ("t", "r", "theta", "phi")


def at(**kw):
    p = np.zeros((1, 4))
    for i, c in enumerate(SCH):
        p[0, i] = kw.get(c, 0.0)
    return p


def test_zeta_value_and_derivative():
    e = parse("sqrt(1 - k/r)", SCH, ("k",))
    j = eval_jet(e, at(r=4.0), {"k": 2.0})
    assert j.value[0] == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert j.grad[0, 1] == pytest.approx(2 / (32 * math.sqrt(0.5)), rel=1e-14)


def test_constant_and_polynomial():
    j = eval_jet(parse("3", SCH), at())
    assert j.value[0] == 3 and not j.grad.any() and not j.hess.any()
    j = eval_jet(parse("r^2", SCH), at(r=3.0))
    assert (j.value[0], j.grad[0, 1], j.hess[0, 1, 1]) == (9.0, 6.0, 2.0)


def test_product_example():
    assert evaluate(parse("r*sin(theta)", SCH), at(r=2.0, theta=math.pi / 2))[0] == 2.0


@pytest.mark.parametrize("src,val", [("1-2-3", -4.0), ("2^3^2", 512.0), ("-r^2", -9.0),
                                     ("2*3+4", 10.0), ("8/4/2", 1.0), ("-2^2", -4.0),
                                     ("(-2)^2", 4.0), ("pi", math.pi)])
def test_precedence(src, val):
    assert evaluate(parse(src, SCH), at(r=3.0))[0] == pytest.approx(val)


def test_free_symbols():
    assert free_symbols(parse("sqrt(1 - k/r)", SCH, ("k",))) == {"r", "k"}
    assert free_symbols(parse("0", SCH)) == set()
    assert free_symbols(parse("r*sin(theta)", SCH)) == {"r", "theta"}


@pytest.mark.parametrize("src,offset", [("1 +", 3), ("sqrt(1 - k/r", 12), ("r $ 2", 2),
                                        ("(r))", 3)])
def test_syntax_errors_carry_offsets(src, offset):
    with pytest.raises(ExprSyntaxError) as ei:
        parse(src, SCH, ("k",))
    assert ei.value.offset == offset


def test_undeclared_symbol():
    with pytest.raises(UndeclaredSymbolError) as ei:
        parse("r + q", SCH)
    assert ei.value.name == "q"


@pytest.mark.parametrize("src,point", [("sqrt(r - 2)", 1.0), ("ln(r)", -1.0), ("1/(r - 2)", 2.0),
                                       ("cot(r)", 0.0), ("r^0.5", -1.0)])
def test_domain_errors(src, point):
    e = parse(src, SCH)
    with pytest.raises(ExprDomainError) as ei:
        eval_jet(e, at(r=point))
    assert ei.value.point[1] == point
    assert not safe_mask(e, at(r=point))[0]


def test_round_trip_examples():
    for src in ["sqrt(1 - k/r)", "-r^2", "(-r)^2", "2^3^2", "(2^3)^2", "1-(2-3)", "a/(b*c)",
                "-(-r)", "sin(theta)^2*r", "10^-1", "1e-3*r"]:
        e = parse(src, SCH, ("k", "a", "b", "c"))
        s = to_string(e.root)
        assert parse(s, SCH, ("k", "a", "b", "c")).root == e.root


def test_random_corpus_matches_finite_differences():
    s = selftest.expression_suite(np.random.default_rng(7), n=120)
    assert s["gradient"] < 1e-5
    assert s["hessian"] < 1e-3
    assert s["hessian_symmetry"] == 0.0
    assert s["round_trip_failures"] == 0
