import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homotopy_tvoa.models import derham as dr
from homotopy_tvoa.models.derham import DeRhamElement, ModelError, format_element, parse_element
from homotopy_tvoa.polytopes import PentagonParams

F = Fraction
X = parse_element("0,1|")
DX = parse_element("|1")
STANDARD = {"rho": F(1), "alpha1": F(1, 100), "alpha2": F(1, 10), "eps1": F(1, 100),
            "eps2": F(1, 10), "xi": F(1, 100)}


def elements(parity=None):
    par = st.sampled_from((0, 1)) if parity is None else st.just(parity)
    coeffs = st.lists(st.fractions(-9, 9, max_denominator=6), min_size=1, max_size=5)
    return st.tuples(par, coeffs).map(
        lambda pc: DeRhamElement.from_coeffs(pc[1], ()) if pc[0] == 0
        else DeRhamElement.from_coeffs((), pc[1]))


class TestElementaryOperators:
    def test_q_of_x_squared(self):
        assert dr.q(parse_element("0,0,1|")) == parse_element("|0,2")

    def test_cartan_identity_on_x_cubed(self):
        a = parse_element("0,0,0,1|")
        assert dr.q(dr.beta(a)) + dr.beta(dr.q(a)) == dr.ell(a) == parse_element("0,0,3|")

    def test_translate_x_dx(self):
        assert dr.translate(F(5, 2), parse_element("|0,1")) == parse_element("|5/2,1")

    def test_dispatch(self):
        assert dr.derham_apply("mul", X, DX) == parse_element("|0,1")
        assert dr.derham_apply("translate", 1, X) == parse_element("1,1|")
        with pytest.raises(ModelError):
            dr.derham_apply("wedge", X)

    def test_dx_squared_vanishes(self):
        assert not (DX * DX)

    @given(elements())
    def test_q_and_beta_square_to_zero(self, a):
        assert not dr.q(dr.q(a))
        assert not dr.beta(dr.beta(a))

    @given(elements())
    def test_anticommutator_is_ell(self, a):
        assert dr.q(dr.beta(a)) + dr.beta(dr.q(a)) == dr.ell(a)

    @given(elements(), elements(), st.fractions(-3, 3, max_denominator=7))
    def test_translate_is_multiplicative(self, a, b, t):
        assert dr.translate(t, a * b) == dr.translate(t, a) * dr.translate(t, b)

    @given(elements(), st.fractions(-3, 3, max_denominator=7), st.fractions(-3, 3, max_denominator=7))
    def test_translate_composes(self, a, s, t):
        assert dr.translate(s, dr.translate(t, a)) == dr.translate(s + t, a)

    @given(elements(), elements())
    def test_q_is_an_odd_derivation(self, a, b):
        sign = -1 if a.parity == 1 else 1
        assert dr.q(a * b) == dr.q(a) * b + (a * dr.q(b)).scale(sign)

    @given(elements())
    def test_text_round_trip(self, a):
        assert parse_element(format_element(a)) == a


class TestEvalOp:
    def test_pair(self):
        out = dr.eval_op("pair", [X, DX], {"eps": F(1, 10)}, t=2)
        assert out == parse_element("|21/10,1")

    def test_m_kills_even_inputs(self):
        assert not dr.eval_op("m", [X, X], {"eps": F(1, 10)}, t=2)

    def test_m_on_dx_and_x(self):
        out = dr.eval_op("m", [DX, X], {"eps": F(1, 10)}, t=2)
        # (x + 2)/10 - 1/200
        assert out == parse_element("39/200,1/10|")

    def test_regime_violation(self):
        with pytest.raises(ModelError, match="regime"):
            dr.eval_op("n", [X, X, X], {"rho": 1, "alpha1": F(1, 2), "alpha2": F(1, 2)})
        with pytest.raises(ModelError, match="regime"):
            dr.eval_op("p", [X, X, X, X], {**STANDARD, "xi": F(99, 100)})

    def test_mixed_parity_input_rejected(self):
        with pytest.raises(ModelError, match="parity"):
            dr.eval_op("pair", [parse_element("1|1"), X], {"eps": 1})

    def test_zero_length_m_matches_lz_m(self):
        a, b = parse_element("|1,2"), parse_element("3,0,1|")
        assert not dr.m_op(a, b, 0)
        assert not dr.lz_model("m", [a, b])


# -- independent floating-point evaluation by adaptive quadrature -----------

def _num(a: DeRhamElement, x):
    fc, gc = a.coeffs()
    return (sum(mpmath.mpf(c.numerator) / c.denominator * x ** k for k, c in enumerate(fc)),
            sum(mpmath.mpf(c.numerator) / c.denominator * x ** k for k, c in enumerate(gc)))


def _mul(p, q):
    return (p[0] * q[0], p[0] * q[1] + p[1] * q[0])


def _sgn(a):
    return -1 if a.parity == 1 else 1


def _quad_m(a, b, eps, t, x):
    eps = mpmath.mpf(eps.numerator) / eps.denominator
    return (mpmath.quad(lambda s: _mul(_num(a, x + t + s + eps), _num(b, x + t + s))[1], [-eps, 0]), 0)


def _quad_nprime(a, b, c, rho, a1, a2, t, x):
    rho, a1, a2 = (mpmath.mpf(v.numerator) / v.denominator for v in (rho, a1, a2))
    mid = mpmath.quad(lambda s: _num(b, x + t + s)[1], [a2, rho - a1])
    val = _mul(_mul(_num(a, x + t + rho), (mid, 0)), _num(c, x + t))
    return tuple(_sgn(a) * v for v in val)


def _quad_pprime(a1, a2, a3, a4, p, t, x):
    v = {k: mpmath.mpf(val.numerator) / val.denominator for k, val in p.items()}

    def inner(u):
        top = min(v["rho"] - v["alpha2"], u - v["xi"])
        return mpmath.quad(lambda w: _num(a2, x + t + u)[1] * _num(a3, x + t + w)[1],
                           [v["eps1"], top])

    body = mpmath.quad(inner, [v["eps2"], v["rho"] - v["alpha2"] + v["xi"], v["rho"] - v["alpha1"]])
    val = _mul(_mul(_num(a1, x + t + v["rho"]), (body, 0)), _num(a4, x + t))
    return tuple(-_sgn(a2) * c for c in val)  # pentagon carries the clockwise orientation


def _close(exact: DeRhamElement, approx, x):
    got = _num(exact, x)
    for e, n in zip(got, approx):
        scale = max(abs(e), abs(n), mpmath.mpf(1))
        assert abs(e - n) / scale < 1e-9


class TestQuadratureCrossCheck:
    @pytest.fixture(autouse=True)
    def _precision(self):
        with mpmath.workdps(30):
            yield

    def test_m(self):
        rng = random.Random(11)
        for _ in range(5):
            a = dr.random_element(rng, 1)
            b = dr.random_element(rng, 0)
            exact = dr.eval_op("m", [a, b], {"eps": F(1, 10)}, t=2)
            x = mpmath.mpf(rng.randint(-20, 20)) / 7
            _close(exact, _quad_m(a, b, F(1, 10), 2, x), x)

    def test_nprime(self):
        rng = random.Random(12)
        params = {"rho": F(1), "alpha1": F(1, 100), "alpha2": F(1, 10)}
        for _ in range(5):
            a, b, c = (dr.random_element(rng, rng.randint(0, 1)) for _ in range(3))
            exact = dr.eval_op("nprime", [a, b, c], params, t=2)
            x = mpmath.mpf(rng.randint(-20, 20)) / 7
            _close(exact, _quad_nprime(a, b, c, *params.values(), 2, x), x)

    def test_pprime(self):
        rng = random.Random(13)
        for _ in range(5):
            args = [dr.random_element(rng, rng.randint(0, 1)) for _ in range(4)]
            exact = dr.eval_op("pprime", args, STANDARD, t=2)
            x = mpmath.mpf(rng.randint(-20, 20)) / 7
            _close(exact, _quad_pprime(*args, STANDARD, 2, x), x)


class TestModelResidual:
    def test_lemma31_example(self):
        assert not dr.model_residual("lemma3.1", [parse_element("0,0,1|"), DX], {"eps": F(1, 10)})

    def test_prop32_example(self):
        params = {"rho": F(1), "alpha1": F(1, 100), "alpha2": F(1, 100)}
        assert not dr.model_residual("prop3.2", [DX, X, parse_element("|0,1")], params)

    @pytest.mark.parametrize("identity", dr.IDENTITIES)
    def test_random_inputs_under_every_functional(self, identity):
        rng = random.Random(f"model:{identity}")
        params = {"eps": F(1, 10), **STANDARD}
        keys = {"lemma3.1": ("eps",), "prop3.2": ("rho", "alpha1", "alpha2"),
                "lemma3.2": ("rho", "eps1", "eps2"), "prop3.3": tuple(STANDARD)}[identity]
        for _ in range(10):
            inputs = [dr.random_element(rng, rng.randint(0, 1))
                      for _ in range(dr.IDENTITY_ARITY[identity])]
            res = dr.model_residual(identity, inputs, {k: params[k] for k in keys}, t=2)
            assert res.is_zero()
            assert all(fn(res) == 0 for fn in dr.standard_functionals())

    def test_residual_detects_a_broken_side(self):
        a, b = parse_element("1,1|"), parse_element("|0,2")
        lhs, rhs = dr.identity_sides("lemma3.1", [a, b], {"eps": F(1, 10)})
        broken = lhs - rhs + dr.pair(a, b, F(1, 10))
        assert broken and any(fn(broken) for fn in dr.standard_functionals())

    def test_unknown_identity(self):
        with pytest.raises(ModelError):
            dr.model_residual("prop9.9", [X], {})

    def test_regime_checked(self):
        with pytest.raises(ModelError, match="regime"):
            dr.model_residual("prop3.3", [X] * 4, {**STANDARD, "eps2": F(1, 1000)})

    def test_functionals_are_distinct_and_linear(self):
        fns = dr.standard_functionals()
        assert len({fn.name for fn in fns}) == 3
        a, b = parse_element("1,2|3"), parse_element("|0,0,5")
        for fn in fns:
            assert fn(a + b.scale(3)) == fn(a) + 3 * fn(b)


class TestLianZuckerman:
    def test_pair_is_the_product(self):
        assert dr.lz_model("pair", [X, DX]) == parse_element("|0,1")

    @given(elements(), elements())
    def test_m_vanishes(self, a, b):
        assert not dr.lz_model("m", [a, b])

    @given(elements(), elements(), elements())
    def test_n_vanishes(self, a, b, c):
        assert not dr.lz_model("n", [a, b, c])


def test_pentagon_params_shared_with_polytopes():
    assert not PentagonParams.from_mapping(STANDARD).violations()
