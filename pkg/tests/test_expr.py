import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weylkit.acceptance import random_expression
from weylkit.errors import DomainError, EvalError, ParseError
from weylkit.expr import BinOp, Call, Const, Neg, Num, Var, evaluate, eval_taylor, identifiers, parse, to_string
from weylkit.oracles import taylor_fd_derivative


def test_precedence_shapes():
    assert parse("r^2 * sin(theta)^2") == BinOp("*", BinOp("^", Var("r"), Num(2.0)),
                                                 BinOp("^", Call("sin", Var("theta")), Num(2.0)))
    assert parse("1 - 2*M/r") == BinOp("-", Num(1.0), BinOp("/", BinOp("*", Num(2.0), Var("M")), Var("r")))


def test_power_binds_tighter_than_unary_minus_and_is_right_associative():
    assert parse("-x^2") == Neg(BinOp("^", Var("x"), Num(2.0)))
    assert parse("a^b^c") == BinOp("^", Var("a"), BinOp("^", Var("b"), Var("c")))
    assert evaluate(parse("2^3^2"), {}) == 512.0


def test_pi_is_a_constant():
    assert parse("2*pi") == BinOp("*", Num(2.0), Const("pi"))
    assert identifiers(parse("2*pi*r")) == {"r"}


@pytest.mark.parametrize("text, offset, fragment", [
    ("2*", 2, "expected operand"),
    ("(x + 1", 0, "unbalanced"),  # points at the unmatched "("
    ("x + 1)", 5, ""),
    ("foo(x)", 0, "unknown function"),
    ("", 0, ""),
    ("2x", 1, ""),
    ("x $ y", 2, "unexpected character"),
])
def test_parse_errors_report_offsets(text, offset, fragment):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.offset == offset
    assert fragment in info.value.message


def test_eval_taylor_sine():
    t = eval_taylor("sin(x)", {"x": math.pi / 2}, seed=["x"])
    assert t.value == 1.0
    assert abs(t.derivative(0)) < 1e-16
    assert t.derivative(0, 0) == pytest.approx(-1.0, abs=1e-15)


def test_eval_taylor_square():
    t = eval_taylor("x^2", {"x": 3.0}, seed=["x"])
    assert (t.value, t.derivative(0), t.derivative(0, 0), t.derivative(0, 0, 0)) == (9.0, 6.0, 2.0, 0.0)


def test_eval_taylor_schwarzschild_factor():
    t = eval_taylor("1 - 2*M/r", {"r": 4.0}, {"M": 1.0}, seed=["r"])
    assert t.value == 0.5
    assert t.derivative(0) == pytest.approx(0.125, rel=1e-15)


def test_mixed_partials_of_a_product():
    t = eval_taylor("x*y", {"x": 0.3, "y": -1.7}, seed=["x", "y"])
    assert t.derivative(0, 1) == 1.0
    assert t.derivative(0, 0) == 0.0
    assert all(t.derivative(*a) == 0.0 for a in [(0, 0, 1), (0, 1, 1), (0, 0, 0), (1, 1, 1)])


def test_unbound_identifier_is_an_error():
    with pytest.raises(EvalError):
        evaluate(parse("x + y"), {"x": 1.0})


@pytest.mark.parametrize("text, env", [
    ("log(x)", {"x": 0.0}),
    ("sqrt(x)", {"x": -1.0}),
    ("1/(x - 1)", {"x": 1.0}),
    ("x^0.5", {"x": -2.0}),
])
def test_domain_errors_name_the_subexpression(text, env):
    with pytest.raises(DomainError) as info:
        eval_taylor(text, env, seed=list(env))
    assert "subexpression" in str(info.value)


def test_negative_integer_power():
    t = eval_taylor("x^-2", {"x": 2.0}, seed=["x"])
    assert t.value == 0.25
    assert t.derivative(0) == pytest.approx(-0.25, rel=1e-15)


def _smooth(rng, depth):
    if depth == 0 or rng.random() < 0.2:
        return rng.choice(["x", "y", f"{rng.uniform(0.1, 2.0):.3f}"])
    k = rng.integers(6)
    a = _smooth(rng, depth - 1)
    if k == 0:
        return f"sin({a})"
    if k == 1:
        return f"cos({a})"
    if k == 2:
        return f"({a})^{rng.integers(2, 4)}"
    b = _smooth(rng, depth - 1)
    return f"({a}) {'+-*'[k - 3]} ({b})"


def test_first_order_coefficients_match_finite_differences():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        text = _smooth(rng, 4)
        env = {"x": rng.uniform(-1, 1), "y": rng.uniform(-1, 1)}
        t = eval_taylor(text, env, seed=["x", "y"])
        for i, v in enumerate(("x", "y")):
            fd = taylor_fd_derivative(text, env, v)
            ad = t.derivative(i)
            worst = max(worst, abs(ad - fd) / (abs(ad) + abs(fd) + 1e-3))
    assert worst < 1e-5


def test_order_zero_is_bit_exact():
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(300):
        e = random_expression(rng, 4)
        env = {"x": rng.uniform(0.1, 2), "y": rng.uniform(0.1, 2), "z": rng.uniform(0.1, 2)}
        try:
            plain = evaluate(e, env)
        except (DomainError, OverflowError):
            continue
        assert eval_taylor(e, env).value == plain or math.isnan(plain)
        try:
            seeded = eval_taylor(e, env, seed=["x", "y", "z"]).value
        except DomainError:
            continue  # a derivative can blow up where the value does not, e.g. sqrt at 0
        assert seeded == plain or math.isnan(plain)
        checked += 1
    assert checked > 100


def test_round_trip_500_random_trees():
    rng = np.random.default_rng(3)
    for _ in range(500):
        e = random_expression(rng, 5)
        s = to_string(e)
        assert parse(s) == e
        assert to_string(parse(s)) == s


_leaf = st.one_of(st.sampled_from([Var("x"), Var("r"), Const("pi")]),
                  st.floats(0, 1e6, allow_nan=False).map(Num))
_tree = st.recursive(_leaf, lambda kids: st.one_of(
    kids.map(Neg),
    st.tuples(st.sampled_from(["sin", "exp", "sqrt"]), kids).map(lambda t: Call(*t)),
    st.tuples(st.sampled_from(list("+-*/^")), kids, kids).map(lambda t: BinOp(*t))), max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(_tree)
def test_print_parse_is_stable(e):
    assert parse(to_string(e)) == e


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="xy12+-*/^() .", max_size=12))
def test_parser_accepts_or_rejects_cleanly(text):
    try:
        e = parse(text)
    except ParseError as exc:
        assert 0 <= exc.offset <= len(text.encode())
        return
    try:
        evaluate(e, {"x": 0.7, "y": 1.3})
    except EvalError:  # includes domain errors and names like "x1"
        pass
