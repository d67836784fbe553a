"""Operation expressions: hashable trees of nonlocal operations on fields.

``Op`` nodes are pure syntax.  ``evaluate(op, at, regime)`` turns one into a
:class:`Combination` located at the affine position ``at``.  Keeping the tree
around lets derivations compare expressions formally (``m`` terms cancelling
as expressions) before anything is expanded.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from ..polytopes import associahedron_faces, facet_gap
from .terms import (
    Affine,
    Combination,
    Domain,
    FieldSym,
    Regime,
    WeakCalcError,
    derive_b,
    derive_Q,
    interval_domain,
    stokes,
)

# arity and number of parameters for each operation
SIGNATURES = {
    "pair": (2, ("eps",)),
    "m": (2, ("eps",)),
    "nprime": (3, ("rho", "alpha1", "alpha2")),
    "n": (3, ("rho", "alpha1", "alpha2")),
    "mtilde": (3, ("rho", "eps1", "eps2")),
    "pprime": (4, ("rho", "alpha1", "alpha2", "eps1", "eps2", "xi")),
    "o1": (4, ("rho", "alpha1", "alpha2", "eps1", "eps2", "xi")),
    "o2": (4, ("rho", "alpha1", "alpha2", "eps1", "eps2", "xi")),
    "p": (4, ("rho", "alpha1", "alpha2", "eps1", "eps2", "xi")),
}

# parity shift of each operation
_SHIFT = {"pair": 0, "m": 1, "nprime": 1, "n": 1, "mtilde": 0, "pprime": 0,
          "o1": 0, "o2": 0, "p": 0, "Q": 1, "b": 1, "mu": 0, "nu": 1}

PENTAGON_ORIENTATION = -1


@dataclass(frozen=True)
class Op:
    kind: str
    args: tuple = ()
    params: tuple = ()
    sym: FieldSym | None = None

    @property
    def parity(self) -> int:
        if self.kind == "field":
            return self.sym.parity
        return (sum(a.parity for a in self.args) + _SHIFT[self.kind]) % 2

    def __str__(self):
        if self.kind == "field":
            return str(self.sym)
        if self.kind in ("Q", "b"):
            return f"{self.kind}({self.args[0]})"
        ps = ",".join(str(p) for p in self.params)
        return f"{self.kind}[{ps}](" + ", ".join(str(a) for a in self.args) + ")"

    def contains(self, kind: str, through=("pair", "Q", "b")) -> bool:
        """Whether ``kind`` occurs explicitly, looking only through ``through`` nodes."""
        if self.kind == kind:
            return True
        if self.kind not in through:
            return False
        return any(a.contains(kind, through) for a in self.args)


def field(name: str, parity: int, slot: int = 0) -> Op:
    return Op("field", sym=FieldSym(slot, name, parity % 2))


def fields(parities, names=None) -> list:
    names = names or [f"A{i + 1}" for i in range(len(parities))]
    return [field(n, p, i + 1) for i, (n, p) in enumerate(zip(names, parities))]


def _aff(values) -> tuple:
    return tuple(Affine.of(v) for v in values)


def make(kind: str, args, params=()) -> Op:
    args = tuple(args)
    if kind in ("Q", "b"):
        if len(args) != 1:
            raise WeakCalcError(f"{kind} takes one argument")
        return Op(kind, args)
    if kind in ("mu", "nu"):
        return Op(kind, args, _aff(params))
    if kind not in SIGNATURES:
        raise WeakCalcError(f"unknown operation {kind!r}")
    arity, pnames = SIGNATURES[kind]
    if len(args) != arity:
        raise WeakCalcError(f"{kind} takes {arity} arguments, got {len(args)}")
    if len(params) != len(pnames):
        raise WeakCalcError(f"{kind} takes parameters {pnames}")
    return Op(kind, args, _aff(params))


def Q(x: Op) -> Op:
    if x.kind == "field":
        out = [(c, g) for c, g in _q_field(x.sym)]
        if len(out) == 1 and out[0][0] == 1:
            return Op("field", sym=out[0][1])
    return Op("Q", (x,))


def _q_field(f):
    from .terms import q_on_field
    return q_on_field(f)


def pair(x, y, eps):
    return make("pair", (x, y), (eps,))


def m(x, y, eps):
    return make("m", (x, y), (eps,))


def nprime(x, y, z, rho, a1, a2):
    return make("nprime", (x, y, z), (rho, a1, a2))


def n(x, y, z, rho, a1, a2):
    return make("n", (x, y, z), (rho, a1, a2))


def mtilde(x, y, z, rho, e1, e2):
    return make("mtilde", (x, y, z), (rho, e1, e2))


PENTAGON_SYMBOLS = ("rho", "alpha1", "alpha2", "eps1", "eps2", "xi")


def pentagon_op(kind, args, params=PENTAGON_SYMBOLS):
    return make(kind, args, params)


# --------------------------------------------------------------------------
# Formal sums of expressions
# --------------------------------------------------------------------------

class ExprSum:
    """Rational linear combination of :class:`Op` trees."""

    def __init__(self, items=()):
        acc = {}
        for op, c in (items.items() if isinstance(items, dict) else items):
            c = Fraction(c)
            acc[op] = acc.get(op, 0) + c
            if not acc[op]:
                del acc[op]
        self.items = acc

    @classmethod
    def of(cls, op: Op, c=1):
        return cls([(op, c)])

    def __add__(self, other):
        return ExprSum(list(self.items.items()) + list(other.items.items()))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        return ExprSum([(op, c * k) for op, c in self.items.items()])

    def __bool__(self):
        return bool(self.items)

    def filter(self, pred) -> "ExprSum":
        return ExprSum([(op, c) for op, c in self.items.items() if pred(op)])

    def evaluate(self, at, regime: Regime) -> Combination:
        total = Combination()
        for op, c in self.items.items():
            total = total + evaluate(op, at, regime).scale(c)
        return total

    def __str__(self):
        if not self.items:
            return "0"
        return " ".join(f"{'+' if c > 0 else '-'}{abs(c)}*{op}"
                        for op, c in sorted(self.items.items(), key=lambda kv: str(kv[0])))


def q_boundary(kind: str, args, params=(), sign: int = 1) -> ExprSum:
    """``Q op(args) + sign * sum_i (-1)^{|a_1|+...+|a_{i-1}|} op(.., Q a_i, ..)``."""
    args = tuple(args)
    out = [(Q(make(kind, args, params)), 1)]
    passed = 0
    for i, a in enumerate(args):
        new = args[:i] + (Q(a),) + args[i + 1:]
        out.append((make(kind, new, params), sign * (-1) ** passed))
        passed += a.parity
    return ExprSum(out)


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

class _Fresh:
    def __init__(self):
        self._c = itertools.count(1)

    def __call__(self) -> str:
        return f"s{next(self._c)}"


def evaluate(op: Op, at, regime: Regime | None = None, fresh=None) -> Combination:
    """The combination ``op`` located at position ``at``."""
    regime = regime or Regime()
    fresh = fresh or _Fresh()
    return _eval(op, Affine.of(at), regime, fresh)


def _interval(var, lo, hi, regime):
    dom, empty = interval_domain(var, lo, hi, regime.witness)
    return dom, empty


def _eval(op: Op, at: Affine, regime: Regime, fresh) -> Combination:
    w = regime.witness
    k = op.kind
    if k == "field":
        return Combination.word(((op.sym, at),))
    if k == "Q":
        return derive_Q(_eval(op.args[0], at, regime, fresh))
    if k == "b":
        return derive_b(_eval(op.args[0], at, regime, fresh))
    a = op.args
    p = op.params
    if k == "pair":
        (eps,) = p
        return _eval(a[0], at + eps, regime, fresh) * _eval(a[1], at, regime, fresh)
    if k == "m":
        (eps,) = p
        s = fresh()
        dom, empty = _interval(s, -eps, Affine(), regime)
        if empty:
            return Combination()
        pos = at + Affine.sym(s)
        inner = _eval(a[0], pos + eps, regime, fresh) * _eval(a[1], pos, regime, fresh)
        return derive_b(inner).integrate(dom)
    if k == "nprime":
        rho, a1, a2 = p
        s = fresh()
        dom, empty = _interval(s, a2, rho - a1, regime)
        if empty:
            return Combination()
        sign = -1 if a[0].parity else 1
        mid = derive_b(_eval(a[1], at + Affine.sym(s), regime, fresh)).integrate(dom)
        return (_eval(a[0], at + rho, regime, fresh) * mid * _eval(a[2], at, regime, fresh)).scale(sign)
    if k == "n":
        rho, a1, a2 = p
        return (_eval(make("nprime", a, p), at, regime, fresh)
                + _eval(pair(m(a[0], a[1], a1), a[2], rho), at, regime, fresh))
    if k == "mtilde":
        rho, e1, e2 = p
        s = fresh()
        dom, empty = _interval(s, -rho, Affine(), regime)
        if empty:
            return Combination()
        inner = _eval(make("nprime", a, p), at + Affine.sym(s), regime, fresh)
        return derive_b(inner.integrate(dom))
    if k == "pprime":
        rho, al1, al2, e1, e2, xi = p
        x, y = fresh(), fresh()
        X, Y = Affine.sym(x), Affine.sym(y)
        dom = Domain((x, y), (X - e2, rho - al1 - X, Y - e1, rho - al2 - Y, X - Y - xi),
                     PENTAGON_ORIENTATION)
        sign = -1 if a[1].parity else 1
        mid = (derive_b(_eval(a[1], at + X, regime, fresh))
               * derive_b(_eval(a[2], at + Y, regime, fresh))).integrate(dom)
        return (_eval(a[0], at + rho, regime, fresh) * mid * _eval(a[3], at, regime, fresh)).scale(sign)
    if k == "o1":
        rho, al1, al2, e1, e2, xi = p
        return _eval(n(m(a[0], a[1], al1), a[2], a[3], rho, al2, e1), at, regime, fresh)
    if k == "o2":
        rho, al1, al2, e1, e2, xi = p
        return _eval(pair(mtilde(a[0], a[1], a[2], al2, al1, xi), a[3], rho), at, regime, fresh)
    if k == "p":
        return (_eval(make("pprime", a, p), at, regime, fresh)
                + _eval(make("o1", a, p), at, regime, fresh)
                + _eval(make("o2", a, p), at, regime, fresh))
    if k == "mu":
        return _eval_mu(a, p, at, regime, fresh)
    if k == "nu":
        s = fresh()
        rho = p[0]
        dom, _ = _interval(s, -rho, Affine(), regime)
        inner = _eval(Op("mu", a, p), at + Affine.sym(s), regime, fresh)
        return derive_b(inner.integrate(dom))
    raise WeakCalcError(f"cannot evaluate {k!r}")


def kn_inequalities(n: int, rho: Affine, names) -> tuple:
    """Facet inequalities of the realisation of K_n in the positions ``t_2..t_{n-1}``
    (``t_1 = rho``, ``t_n = 0``), paired with the bracket of each facet."""
    pos = {1: rho, n: Affine()}
    for i, v in zip(range(2, n), names):
        pos[i] = Affine.sym(v)
    out = []
    total = comb(n, 2)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if (i, j) == (1, n):
                continue
            gap = rho.scale(Fraction(comb(j - i + 1, 2), total))
            out.append(((i, j), pos[i] - pos[j] - gap))
    return tuple(out)


def _eval_mu(a, p, at, regime, fresh):
    """``mu'_n = sign A_1(rho) int_{K_n} [b,A_2](t_2) ... [b,A_{n-1}](t_{n-1}) A_n``
    with ``sign = (-1)^{(n-3)(n-2)/2 + sum_k (n-1-k)|A_k|}``."""
    n_ = len(a)
    rho = p[0]
    names = [fresh() for _ in range(n_ - 2)]
    ineqs = tuple(e for _, e in kn_inequalities(n_, rho, names))
    dom = Domain(tuple(names), ineqs, 1)
    exponent = (n_ - 3) * (n_ - 2) // 2 + sum(
        (n_ - 1 - k) * x.parity for k, x in enumerate(a[: n_ - 2], start=1))
    sign = -1 if exponent % 2 else 1
    mid = Combination.word(())
    for x, v in zip(a[1:n_ - 1], names):
        mid = mid * derive_b(_eval(x, at + Affine.sym(v), regime, fresh))
    return (_eval(a[0], at + rho, regime, fresh) * mid.integrate(dom)
            * _eval(a[-1], at, regime, fresh)).scale(sign)


def apply_Q(c: Combination, regime: Regime | None = None, trace=None) -> Combination:
    """``Q`` as a derivation followed by Stokes / Newton-Leibniz rewriting."""
    regime = regime or Regime()
    return stokes(derive_Q(c), regime, trace)


def extent(c: Combination, regime: Regime | None = None) -> tuple:
    """``(position, length)`` of a combination: the lowest point any field can
    reach and the spread up to the highest one, as affine expressions."""
    from .terms import witness_vertices

    regime = regime or Regime()
    w = regime.witness
    lo = hi = None
    for (dom, word), _ in c.items():
        verts = witness_vertices(dom, w) if dom.vars else [()]
        # symbolic extremes are attained at vertices; solve them symbolically
        sym_verts = _symbolic_vertices(dom, w) if dom.vars else [{}]
        for _, pos in word:
            for sv in sym_verts:
                e = pos.substitute(sv)
                val = e.evaluate(w)
                if lo is None or val < lo[0]:
                    lo = (val, e)
                if hi is None or val > hi[0]:
                    hi = (val, e)
        del verts
    if lo is None:
        raise WeakCalcError("extent of the zero combination")
    return lo[1], hi[1] - lo[1]


def _symbolic_vertices(dom: Domain, w) -> list:
    """Vertices of ``dom`` as affine expressions in the parameters."""
    from .. import linalg

    k = dom.dim
    out = {}
    for rows in itertools.combinations(dom.ineqs, k):
        mat = [[e.coeff(v) for v in dom.vars] for e in rows]
        if linalg.det(mat) == 0:
            continue
        rest = [Affine({x: c for x, c in e.coeffs.items() if x not in dom.vars}, e.const)
                for e in rows]
        # solve mat . v = -rest column-wise over the affine constants
        sol = {}
        inv_cols = []
        for j in range(k):
            unit = [Fraction(int(i == j)) for i in range(k)]
            inv_cols.append(linalg.solve(mat, unit))
        for i, v in enumerate(dom.vars):
            e = Affine()
            for j in range(k):
                e = e - rest[j].scale(inv_cols[j][i])
            sol[v] = e
        point = {v: sol[v].evaluate(w) for v in dom.vars}
        if all(g.evaluate({**w, **point}) >= 0 for g in dom.ineqs):
            out[tuple(point[v] for v in dom.vars)] = sol
    return list(out.values())


__all__ = [
    "Op", "ExprSum", "field", "fields", "make", "Q", "pair", "m", "nprime", "n",
    "mtilde", "pentagon_op", "q_boundary", "evaluate", "apply_Q", "extent",
    "kn_inequalities", "PENTAGON_ORIENTATION", "SIGNATURES", "facet_gap",
    "associahedron_faces",
]
