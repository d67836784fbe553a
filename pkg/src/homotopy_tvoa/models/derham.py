"""Commutative de Rham model of the weak-sense operator calculus.

An element ``f(x) + g(x) dx`` has even part ``f`` and odd part ``g``.  The
operators of the calculus act as

* ``q``      (plays Q):        ``f + g dx  ->  f' dx``
* ``beta``   (plays b_{-1}):   ``f + g dx  ->  g``
* ``ell``    (plays L_{-1}):   ``d/dx`` on both parts, equal to ``q beta + beta q``
* ``translate(t)``:            ``x -> x + t``

and the operator product is the supercommutative product with ``dx dx = 0``.
A vertex operator ``A(t)`` is ``translate(t) A``; every operation below is
translation covariant, so operations return their value at position 0 and
``eval_op`` translates to the requested position.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from sympy.polys.rings import PolyElement

from ..polytopes import HPolytope, PentagonParams, integrate, pentagon_P, poly_ring, to_fraction, to_qq

RING, (X, _U, _V, _W) = poly_ring(["x", "_u", "_v", "_w"])
DUMMIES = (_U, _V, _W)

# Orientation of the pentagon integral in p'.  The boundary terms of Q p'
# come out with the displayed signs when the pentagon is traversed clockwise
# in the (x, y) plane, i.e. the oriented integral is minus the Lebesgue one.
PENTAGON_ORIENTATION = -1


class ModelError(ValueError):
    pass


def _poly(v) -> PolyElement:
    if isinstance(v, PolyElement):
        return v
    return RING(to_qq(v))


@dataclass(frozen=True)
class DeRhamElement:
    f: PolyElement
    g: PolyElement

    def __init__(self, f=0, g=0):
        object.__setattr__(self, "f", _poly(f))
        object.__setattr__(self, "g", _poly(g))

    @classmethod
    def from_coeffs(cls, f_coeffs=(), g_coeffs=()) -> "DeRhamElement":
        f = sum((to_qq(c) * X**k for k, c in enumerate(f_coeffs)), RING.zero)
        g = sum((to_qq(c) * X**k for k, c in enumerate(g_coeffs)), RING.zero)
        return cls(f, g)

    def coeffs(self) -> tuple:
        """``(f_coeffs, g_coeffs)`` as Fraction lists in increasing degree."""
        return _coeff_list(self.f), _coeff_list(self.g)

    @property
    def parity(self) -> int | None:
        if not self.g:
            return 0
        if not self.f:
            return 1
        return None

    def is_zero(self) -> bool:
        return not self.f and not self.g

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        return DeRhamElement(self.f + other.f, self.g + other.g)

    def __sub__(self, other):
        return DeRhamElement(self.f - other.f, self.g - other.g)

    def __neg__(self):
        return DeRhamElement(-self.f, -self.g)

    def scale(self, k) -> "DeRhamElement":
        k = _poly(k)
        return DeRhamElement(k * self.f, k * self.g)

    def __mul__(self, other: "DeRhamElement") -> "DeRhamElement":
        return DeRhamElement(self.f * other.f, self.f * other.g + self.g * other.f)

    def __str__(self):
        f, g = self.coeffs()
        return f"({self.f.as_expr()}) + ({self.g.as_expr()}) dx"


def _coeff_list(p: PolyElement) -> list:
    if not p:
        return []
    out = {}
    for monom, c in p.terms():
        if any(monom[1:]):
            raise ModelError("element still depends on integration dummies")
        out[monom[0]] = to_fraction(c)
    return [out.get(k, Fraction(0)) for k in range(max(out) + 1)]


ZERO = DeRhamElement()


def parse_element(text: str) -> DeRhamElement:
    """``"f0,f1,...|g0,g1,..."`` coefficient lists (either side may be empty)."""
    left, _, right = text.partition("|")
    fc = [Fraction(c) for c in left.split(",") if c.strip()]
    gc = [Fraction(c) for c in right.split(",") if c.strip()]
    return DeRhamElement.from_coeffs(fc, gc)


def format_element(a: DeRhamElement) -> str:
    f, g = a.coeffs()
    return ",".join(str(c) for c in f) + "|" + ",".join(str(c) for c in g)


# --------------------------------------------------------------------------
# Elementary operators
# --------------------------------------------------------------------------

def _dx(p: PolyElement) -> PolyElement:
    return p.diff(X)


def q(a: DeRhamElement) -> DeRhamElement:
    return DeRhamElement(0, _dx(a.f))


def beta(a: DeRhamElement) -> DeRhamElement:
    return DeRhamElement(a.g, 0)


def ell(a: DeRhamElement) -> DeRhamElement:
    return DeRhamElement(_dx(a.f), _dx(a.g))


def translate(t, a: DeRhamElement) -> DeRhamElement:
    shift = X + _poly(t)
    return DeRhamElement(a.f.compose(X, shift), a.g.compose(X, shift))


def mul(a: DeRhamElement, b: DeRhamElement) -> DeRhamElement:
    return a * b


def derham_apply(op: str, *args):
    if op == "q":
        return q(*args)
    if op == "beta":
        return beta(*args)
    if op == "ell":
        return ell(*args)
    if op == "mul":
        return mul(*args)
    if op == "translate":
        t, a = args
        return translate(t, a)
    raise ModelError(f"unknown de Rham operator {op!r}")


def _integrate_dummy(p: PolyElement, var: PolyElement, lo, hi) -> PolyElement:
    if not p:
        return p
    idx = RING.gens.index(var)
    anti = RING.zero
    for monom, c in p.terms():
        e = monom[idx]
        m = list(monom)
        m[idx] = e + 1
        anti += RING({tuple(m): c / (e + 1)})
    return anti.compose(var, _poly(hi)) - anti.compose(var, _poly(lo))


def integrate_interval(a: DeRhamElement, var, lo, hi) -> DeRhamElement:
    """Oriented integral over ``var`` from ``lo`` to ``hi``."""
    return DeRhamElement(_integrate_dummy(a.f, var, lo, hi), _integrate_dummy(a.g, var, lo, hi))


def integrate_polygon(a: DeRhamElement, domain: HPolytope, orientation: int = 1) -> DeRhamElement:
    """Integral over a polygon in the dummies ``_u, _v`` (variables must be named so)."""

    def part(p):
        if not p:
            return p
        r = integrate(domain, p)
        return _poly(r) if not isinstance(r, PolyElement) else r

    return DeRhamElement(part(a.f), part(a.g)).scale(orientation)


def _sgn(k: int) -> int:
    return -1 if k % 2 else 1


def _parity(a: DeRhamElement, given: int | None = None) -> int:
    if given is not None:
        return given
    p = a.parity
    if p is None:
        raise ModelError("input is not parity-homogeneous")
    return p


# --------------------------------------------------------------------------
# The parameter-dependent operations (values at position 0)
# --------------------------------------------------------------------------

def pair(a, b, eps):
    return translate(eps, a) * b


def m_op(a, b, eps):
    integrand = beta(translate(_U + _poly(eps), a) * translate(_U, b))
    return integrate_interval(integrand, _U, -_poly(eps), 0)


def nprime(a, b, c, rho, a1, a2):
    rho, a1, a2 = _poly(rho), _poly(a1), _poly(a2)
    mid = integrate_interval(translate(_U, beta(b)), _U, a2, rho - a1)
    return (translate(rho, a) * mid * c).scale(_sgn(_parity(a)))


def n_op(a, b, c, rho, a1, a2):
    return nprime(a, b, c, rho, a1, a2) + pair(m_op(a, b, a1), c, rho)


def mtilde(a, b, c, rho, e1, e2):
    inner = translate(_V, nprime(a, b, c, rho, e1, e2))
    return beta(integrate_interval(inner, _V, -_poly(rho), 0))


def _pentagon_dummy_domain(p: PentagonParams) -> HPolytope:
    P = pentagon_P(p)
    return HPolytope(("_u", "_v"), P.inequalities)


def pprime(a1, a2, a3, a4, p: PentagonParams):
    integrand = translate(_U, beta(a2)) * translate(_V, beta(a3))
    body = integrate_polygon(integrand, _pentagon_dummy_domain(p), PENTAGON_ORIENTATION)
    return (translate(p.rho, a1) * body * a4).scale(_sgn(_parity(a2)))


def p_op(a1, a2, a3, a4, p: PentagonParams):
    return (
        pprime(a1, a2, a3, a4, p)
        + n_op(m_op(a1, a2, p.alpha1), a3, a4, p.rho, p.alpha2, p.eps1)
        + pair(mtilde(a1, a2, a3, p.alpha2, p.alpha1, p.xi), a4, p.rho)
    )


def q_boundary(op, args, *params, sign=1):
    """``Q op(args) + sign * sum_i (-1)^{|a_1|+...+|a_{i-1}|} op(..., Q a_i, ...)``.

    ``sign=+1`` is the form used for m and n, ``sign=-1`` the form of the
    p', p and m-tilde relations.
    """
    total = q(op(*args, *params))
    passed = 0
    for i, a in enumerate(args):
        shifted = list(args)
        shifted[i] = q(a)
        total = total + op(*shifted, *params).scale(sign * _sgn(passed))
        passed += _parity(a)
    return total


# --------------------------------------------------------------------------
# Public evaluation API
# --------------------------------------------------------------------------

OPS = {
    "pair": (2, ("eps",)),
    "m": (2, ("eps",)),
    "nprime": (3, ("rho", "alpha1", "alpha2")),
    "n": (3, ("rho", "alpha1", "alpha2")),
    "mtilde": (3, ("rho", "eps1", "eps2")),
    "pprime": (4, ("pentagon",)),
    "p": (4, ("pentagon",)),
}

_IMPL = {"pair": pair, "m": m_op, "nprime": nprime, "n": n_op, "mtilde": mtilde, "pprime": pprime, "p": p_op}


def _param_values(opname, params):
    arity, names = OPS[opname]
    if names == ("pentagon",):
        pp = PentagonParams.from_mapping(params)
        bad = pp.violations()
        if bad:
            raise ModelError("regime violation: " + ", ".join(bad))
        return [pp]
    try:
        vals = [Fraction(params[k]) for k in names]
    except KeyError as exc:
        raise ModelError(f"{opname} needs parameter {exc.args[0]}") from None
    if opname in ("nprime", "n") and not (0 < vals[1] and 0 < vals[2] and vals[1] + vals[2] < vals[0]):
        raise ModelError("regime violation: need 0 < alpha1, alpha2 and alpha1 + alpha2 < rho")
    if opname == "mtilde" and not (0 < vals[1] and 0 < vals[2] and vals[1] + vals[2] < vals[0]):
        raise ModelError("regime violation: need 0 < eps1, eps2 and eps1 + eps2 < rho")
    return vals


def eval_op(opname: str, inputs, params, t=0) -> DeRhamElement:
    if opname not in OPS:
        raise ModelError(f"unknown operation {opname!r}")
    arity, _ = OPS[opname]
    if len(inputs) != arity:
        raise ModelError(f"{opname} takes {arity} inputs")
    for a in inputs:
        _parity(a)
    vals = _param_values(opname, params)
    return translate(Fraction(t), _IMPL[opname](*inputs, *vals))


IDENTITIES = ("lemma3.1", "prop3.2", "lemma3.2", "prop3.3")
IDENTITY_ARITY = {"lemma3.1": 2, "prop3.2": 3, "lemma3.2": 3, "prop3.3": 4}


def identity_sides(identity: str, inputs, params) -> tuple:
    """``(lhs, rhs)`` of an identity at position 0."""
    P = {k: Fraction(v) for k, v in params.items()}
    par = [_parity(a) for a in inputs]
    if identity == "lemma3.1":
        a, b = inputs
        eps = P["eps"]
        lhs = pair(a, b, eps) - pair(b, a, -eps).scale(_sgn(par[0] * par[1]))
        rhs = q_boundary(m_op, (a, b), eps)
        return lhs, rhs
    if identity == "prop3.2":
        a, b, c = inputs
        rho, a1, a2 = P["rho"], P["alpha1"], P["alpha2"]
        lhs = pair(pair(a, b, a1), c, rho) - pair(a, pair(b, c, a2), rho)
        rhs = q_boundary(n_op, (a, b, c), rho, a1, a2)
        return lhs, rhs
    if identity == "lemma3.2":
        a, b, c = inputs
        rho, e1, e2 = P["rho"], P["eps1"], P["eps2"]
        s_all = _sgn(par[0] * par[1] + par[0] * par[2] + par[1] * par[2])
        lhs = nprime(a, b, c, rho, e1, e2) + nprime(c, b, a, -rho, -e2, -e1).scale(s_all)
        rhs = (
            m_op(pair(b, a, -e1), c, rho).scale(_sgn(par[0] * par[1]))
            - m_op(a, pair(b, c, e2), rho)
            + q_boundary(mtilde, (a, b, c), rho, e1, e2, sign=-1)
        )
        return lhs, rhs
    if identity == "prop3.3":
        a1, a2, a3, a4 = inputs
        pp = PentagonParams.from_mapping(P)
        rho, xi = pp.rho, pp.xi
        al1, al2, ep1, ep2 = pp.alpha1, pp.alpha2, pp.eps1, pp.eps2
        lhs = q_boundary(p_op, (a1, a2, a3, a4), pp, sign=-1)
        rhs = (
            pair(a1, n_op(a2, a3, a4, ep2, xi, ep1), rho).scale(_sgn(par[0]))
            - n_op(a1, a2, pair(a3, a4, ep1), rho, al1, ep2)
            + n_op(a1, pair(a2, a3, xi), a4, rho, al2, ep2)
            - n_op(pair(a1, a2, al1), a3, a4, rho, al2, ep1)
            + pair(n_op(a1, a2, a3, al2, al1, xi), a4, rho)
        )
        return lhs, rhs
    raise ModelError(f"unknown identity {identity!r}")


@dataclass(frozen=True)
class CorrelatorFunctional:
    """Linear functional on elements given by weights on the coefficients."""

    f_weights: tuple = ()
    g_weights: tuple = ()
    default: Fraction = Fraction(1)
    name: str = "coefficient-sum"

    def __call__(self, a: DeRhamElement) -> Fraction:
        fc, gc = a.coeffs()
        total = Fraction(0)
        for k, c in enumerate(fc):
            total += c * (self.f_weights[k] if k < len(self.f_weights) else self.default)
        for k, c in enumerate(gc):
            total += c * (self.g_weights[k] if k < len(self.g_weights) else self.default)
        return total


COEFFICIENT_SUM = CorrelatorFunctional()


def standard_functionals() -> list:
    return [
        COEFFICIENT_SUM,
        CorrelatorFunctional((Fraction(1),), (Fraction(0),), Fraction(0), "evaluate-even-at-0"),
        CorrelatorFunctional(
            tuple(Fraction(k + 1, k + 2) for k in range(12)),
            tuple(Fraction(-3, k + 5) for k in range(12)),
            Fraction(7, 3),
            "weighted",
        ),
    ]


def model_residual(identity: str, inputs, params, t=2) -> DeRhamElement:
    if identity not in IDENTITIES:
        raise ModelError(f"unknown identity {identity!r}")
    if len(inputs) != IDENTITY_ARITY[identity]:
        raise ModelError(f"{identity} takes {IDENTITY_ARITY[identity]} inputs")
    _check_regime(identity, params)
    lhs, rhs = identity_sides(identity, inputs, params)
    return translate(Fraction(t), lhs - rhs)


def _check_regime(identity, params):
    P = {k: Fraction(v) for k, v in params.items()}
    if identity == "lemma3.1":
        if not P.get("eps", 0) > 0:
            raise ModelError("regime violation: eps > 0 required")
    elif identity == "prop3.2":
        _param_values("n", P)
    elif identity == "lemma3.2":
        _param_values("mtilde", P)
    elif identity == "prop3.3":
        _param_values("p", P)


def random_element(rng: random.Random, parity: int, max_degree: int = 4) -> DeRhamElement:
    deg = rng.randint(0, max_degree)
    coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(deg + 1)]
    if not any(coeffs):
        coeffs[-1] = Fraction(1)
    return DeRhamElement.from_coeffs(coeffs, ()) if parity == 0 else DeRhamElement.from_coeffs((), coeffs)


# --------------------------------------------------------------------------
# Lian-Zuckerman operations in the model
# --------------------------------------------------------------------------

def lz_model(opname: str, inputs) -> DeRhamElement:
    """Residue formulas with ``A(z) B = translate(z) A * B``.

    The z-expansion has only nonnegative powers, so ``Res_z z^-1`` picks the
    constant term and every residue at a nonnegative power of z vanishes.
    """
    if opname == "pair":
        a, b = inputs
        return _z_coefficient(lambda z: translate(z, a) * b, 0)
    if opname == "m":
        a, b = inputs
        # Res_{z-w} (z-w)^i A(z-w)B extracts the coefficient of (z-w)^{-i-1}, i >= 0
        total = ZERO
        for i in range(0, 8):
            total = total + _z_coefficient(lambda z: translate(z, a) * b, -i - 1)
        return total
    if opname == "n":
        a, b, c = inputs
        total = ZERO
        for i in range(0, 8):
            total = total + _z_coefficient(lambda z: translate(z, b) * c, -i - 1)
        return total
    raise ModelError(f"unknown LZ operation {opname!r}")


def _z_coefficient(fn, power: int) -> DeRhamElement:
    if power < 0:
        return ZERO
    expr = fn(_W)

    def pick(p):
        idx = RING.gens.index(_W)
        return RING({m[:idx] + (0,) + m[idx + 1:]: c for m, c in p.terms() if m[idx] == power})

    return DeRhamElement(pick(expr.f), pick(expr.g))
