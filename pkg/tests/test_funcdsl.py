import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annuchar.funcdsl import (
    Add,
    Const,
    Div,
    Exp,
    ExpressionFunction,
    IntPow,
    Mul,
    Neg,
    ParseError,
    RationalFunction,
    SingularPointError,
    Sub,
    Var,
    constant,
    parse,
    rational,
    unparse,
)


class TestParse:
    def test_monomial(self):
        assert parse("z^3").tree == IntPow(Var(), 3)

    def test_rational_expression(self):
        expected = Div(
            Sub(Var(), Const(2 + 0j)),
            IntPow(Add(Var(), Const(0.5 + 0j)), 2),
        )
        assert parse("(z-2)/(z+0.5)^2").tree == expected

    def test_essential_singularity(self):
        assert parse("exp(1/z)").tree == Exp(Div(Const(1 + 0j), Var()))

    def test_complex_literals(self):
        assert parse("(1+2i)").tree == Const(1 + 2j)
        assert parse("0.5i").tree == Const(0.5j)
        assert parse("-2").tree == Const(-2 + 0j)
        assert parse("i").tree == Const(1j)

    def test_syntax_error_offset(self):
        with pytest.raises(ParseError) as exc:
            parse("z^^2")
        assert exc.value.offset == 2

    def test_unknown_identifier(self):
        with pytest.raises(ParseError):
            parse("sin(z)")

    def test_exponent_overflow(self):
        with pytest.raises(ParseError):
            parse("z^65")
        assert parse("z^64").tree == IntPow(Var(), 64)

    def test_division_by_zero_literal(self):
        with pytest.raises(ParseError):
            parse("1/0")

    def test_empty(self):
        with pytest.raises(ParseError):
            parse("   ")

    def test_negative_exponent(self):
        assert parse("z^-2").tree == IntPow(Var(), -2)


class TestEval:
    def test_monomial(self):
        assert parse("z^3").eval(2) == 8

    def test_rational(self):
        assert parse("(z-2)/(z+0.5)^2").eval(0) == pytest.approx(-8.0)

    def test_exp_reciprocal(self):
        v = parse("exp(1/z)").eval(1j)
        assert v == pytest.approx(complex(math.cos(1), -math.sin(1)))

    def test_pole_raises(self):
        with pytest.raises(SingularPointError):
            parse("1/z").eval(0)
        with pytest.raises(SingularPointError):
            rational(1, [(2, -1)]).eval(2)

    def test_rational_eval(self):
        f = rational(3, [(2, 1), (-0.5, -2)])
        z = 1 + 1j
        assert f.eval(z) == pytest.approx(3 * (z - 2) / (z + 0.5) ** 2)


class TestLogDeriv:
    def test_monomial(self):
        f = rational(1, [(0, 5)])
        z = 2 + 1j
        assert f.log_deriv(z) == pytest.approx(5 / z)
        assert parse("z^5").log_deriv(z) == pytest.approx(5 / z)

    def test_partial_fractions(self):
        f = rational(1, [(2, 1), (0.5, 1)])
        assert f.log_deriv(1) == pytest.approx(1 / (1 - 2) + 1 / (1 - 0.5))

    def test_exp_reciprocal_fd_oracle(self):
        f = parse("exp(1/z)")
        z = 2j
        h = 1e-6
        fd = (f.eval(z + h) - f.eval(z - h)) / (2 * h * f.eval(z))
        assert abs(f.log_deriv(z) - fd) <= 1e-6
        assert f.log_deriv(z) == pytest.approx(-1 / z**2)

    def test_zero_point_raises(self):
        with pytest.raises(SingularPointError):
            rational(1, [(1.5, 2)]).log_deriv(1.5)


FD_SAMPLE_EXPRESSIONS = [
    "z^3",
    "(z-2)/(z+0.5)^2",
    "exp(1/z)",
    "z^2+3*z-1",
    "exp(z)/(z-0.3)",
    "(z^2-2)*exp(1/z)",
]


@pytest.mark.parametrize("text", FD_SAMPLE_EXPRESSIONS)
def test_log_deriv_matches_centered_difference(text):
    f = parse(text)
    rng = np.random.default_rng(7)
    h = 1e-6
    checked = 0
    while checked < 100:
        z = complex(rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        try:
            fd = (f.eval(z + h) - f.eval(z - h)) / (2 * h * f.eval(z))
            ld = f.log_deriv(z)
        except SingularPointError:
            continue
        if abs(f.eval(z)) < 1e-3:  # centered difference of log degenerates
            continue
        assert abs(ld - fd) <= 1e-6 * max(1.0, abs(ld))
        checked += 1


class TestTransforms:
    def test_reciprocal_of_square(self):
        g = rational(1, [(0, 2)]).reciprocal()
        assert g.factors == ((0j, -2),)

    def test_shift_by_zero_is_identity(self):
        f = rational(1, [(0, 2)])
        assert f.shift(0) is f
        e = parse("z^2")
        assert e.shift(0) is e

    def test_reciprocal_involution(self):
        f = parse("(z-2)/(z+0.5)^2")
        g = f.reciprocal().reciprocal()
        rng = np.random.default_rng(3)
        for _ in range(10):
            z = complex(rng.uniform(0.5, 2) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
            a, b = f.eval(z), g.eval(z)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))

    def test_shift_of_rational_is_expression(self):
        f = rational(1, [(0, 2)])
        g = f.shift(1)
        assert isinstance(g, ExpressionFunction)
        assert g.eval(2) == pytest.approx(3.0)

    def test_rational_reciprocal_flips_scale(self):
        f = rational(2, [(1.5, 3)])
        g = f.reciprocal()
        z = 0.3 + 0.1j
        assert g.eval(z) == pytest.approx(1 / f.eval(z))


class TestExactZerosPoles:
    def test_factored(self):
        f = rational(1, [(2, 1), (-0.5, -2)])
        assert f.exact_zeros_poles() == [(2 + 0j, 1), ((-0.5 + 0j), -2)]

    def test_expression_absent(self):
        assert parse("exp(1/z)").exact_zeros_poles() is None

    def test_constant_empty(self):
        assert constant(5).exact_zeros_poles() == []

    def test_validation(self):
        with pytest.raises(ValueError):
            rational(0, [])
        with pytest.raises(ValueError):
            rational(1, [(2, 0)])


# --- parse/unparse round trip -------------------------------------------

_const_values = st.complex_numbers(
    max_magnitude=1e6, allow_nan=False, allow_infinity=False
)
_leaves = st.one_of(st.builds(Const, _const_values), st.just(Var()))


def _both_const(node) -> bool:
    return isinstance(node.left, Const) and isinstance(node.right, Const)


def _extend(children):
    return st.one_of(
        st.builds(Add, children, children).filter(lambda n: not _both_const(n)),
        st.builds(Sub, children, children).filter(lambda n: not _both_const(n)),
        st.builds(Mul, children, children),
        st.builds(Div, children, children).filter(
            lambda n: not (isinstance(n.right, Const) and n.right.value == 0)
        ),
        st.builds(IntPow, children, st.integers(min_value=-64, max_value=64)),
        st.builds(Exp, children),
        st.builds(Neg, children.filter(lambda n: not isinstance(n, Const))),
    )


_trees = st.recursive(_leaves, _extend, max_leaves=24)


@pytest.mark.filterwarnings("ignore:Generating overly large repr")
@settings(max_examples=200, deadline=None)
@given(_trees)
def test_parse_unparse_round_trip(tree):
    assert parse(unparse(tree)).tree == tree


# --- rational vs expression agreement ------------------------------------

_moduli = st.floats(min_value=0.2, max_value=4.0, allow_nan=False)
_angles = st.floats(min_value=0.0, max_value=2 * math.pi, allow_nan=False)
_factor = st.tuples(
    st.builds(lambda r, a: r * cmath.exp(1j * a), _moduli, _angles),
    st.sampled_from([1, 2, -1, -2]),
)


@settings(max_examples=60, deadline=None)
@given(
    st.builds(lambda r, a: r * cmath.exp(1j * a), st.floats(0.5, 2.0), _angles),
    st.lists(_factor, min_size=0, max_size=4),
    st.integers(0, 2**32 - 1),
)
def test_rational_matches_expression_form(scale, factors, seed):
    f = RationalFunction(scale, tuple(factors))
    g = ExpressionFunction(f.as_tree())
    rng = np.random.default_rng(seed)
    for _ in range(5):
        z = complex(rng.uniform(0.4, 2.5) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        if any(abs(z - b) < 1e-3 for b, _ in factors):
            continue
        a = f.eval(z)
        assert abs(a - g.eval(z)) <= 1e-12 * max(1.0, abs(a))


def test_models_vectorize_over_arrays():
    f = rational(1, [(2, 1), (0.5, -1)])
    z = np.exp(1j * np.linspace(0, 2 * np.pi, 17))
    vals = f.eval_array(z)
    assert vals.shape == z.shape
    assert np.allclose(vals, [(zz - 2) / (zz - 0.5) for zz in z])
    e = parse("exp(1/z)")
    ve = e.eval_array(z)
    assert np.allclose(ve, np.exp(1 / z))
