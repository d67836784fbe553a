"""Weak equivalence by moments.

Under a correlator the fields of an identity are generic.  Replacing each
argument slot ``i`` by a generic jet, a field ``d^k X`` at position ``p``
contributes ``z_i^k exp(z_i p)`` (truncated at ``z_i``-degree ``N``).  After
reordering the word into slot order (with Koszul signs) and integrating over
the domain, two combinations agree in the weak sense up to jet order ``N``
exactly when their moment polynomials agree for every decoration pattern.

Integration is symbolic in the parameters: domains are cut into slabs at
the witness and integrated with affine limits.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

from sympy import QQ
from sympy.polys.rings import ring

from .terms import Affine, Combination, Domain, Regime, WeakCalcError, is_full_dimensional
from .ops import _symbolic_vertices

PARAMETERS = ("t", "rho", "eps", "eps1", "eps2", "alpha1", "alpha2", "xi")
MAX_SLOTS = 6
MAX_VARS = 2


@lru_cache(maxsize=None)
def _ring():
    names = list(PARAMETERS) + [f"z{i}" for i in range(1, MAX_SLOTS + 1)] + ["u1", "u2", "_v"]
    R, *gens = ring(",".join(names), QQ)
    return R, dict(zip(names, gens))


def _poly(e: Affine):
    R, g = _ring()
    out = R(QQ(e.const.numerator, e.const.denominator))
    for k, v in e.coeffs.items():
        if k not in g:
            raise WeakCalcError(f"unknown symbol {k!r} in moment computation")
        out += QQ(v.numerator, v.denominator) * g[k]
    return out


def _truncate(p, N):
    R, g = _ring()
    idx = [R.gens.index(g[f"z{i}"]) for i in range(1, MAX_SLOTS + 1)]
    return R({m: c for m, c in p.items() if all(m[j] <= N for j in idx)})


def _exp_series(zp, N):
    R, _ = _ring()
    out = R(1)
    term = R(1)
    for k in range(1, N + 1):
        term = term * zp * QQ(1, k)
        out += term
    return out


def _definite(p, var: str, lo, hi):
    """``int_lo^hi p d(var)`` with ``lo``/``hi`` ring elements (Horner in the bounds)."""
    R, g = _ring()
    i = R.gens.index(g[var])
    by_power: dict = {}
    for mon, c in p.items():
        e = mon[i]
        mm = mon[:i] + (0,) + mon[i + 1:]
        by_power.setdefault(e + 1, {})[mm] = c / (e + 1)
    top = max(by_power, default=0)

    def horner(b):
        acc = R(0)
        for k in range(top, 0, -1):
            acc = acc * b
            if k in by_power:
                acc += R(by_power[k])
        return acc * b

    return horner(hi) - horner(lo)


def _rename_to_ring(dom: Domain, word):
    ren = {v: f"u{k + 1}" for k, v in enumerate(dom.vars)}
    if len(ren) > MAX_VARS:
        raise WeakCalcError(f"moment integration supports at most {MAX_VARS} variables")
    nd = Domain(tuple(ren[v] for v in dom.vars), tuple(e.rename(ren) for e in dom.ineqs),
                dom.orientation)
    nw = tuple((f, p.rename(ren)) for f, p in word)
    return nd, nw


def _integrate(p, dom: Domain, witness):
    """Lebesgue integral of ``p`` over ``dom`` (orientation not applied)."""
    if not dom.vars:
        return p
    if len(dom.vars) == 1:
        (v,) = dom.vars
        lows, highs = [], []
        for e in dom.ineqs:
            c = e.coeff(v)
            bound = e.drop(v).scale(Fraction(-1) / c)
            (lows if c > 0 else highs).append(bound)
        lo = max(lows, key=lambda b: b.evaluate(witness))
        hi = min(highs, key=lambda b: b.evaluate(witness))
        return _definite(p, v, _poly(lo), _poly(hi))
    x, y = dom.vars
    verts = _symbolic_vertices(dom, witness)
    xs = sorted({(v[x].evaluate(witness), v[x]) for v in verts}, key=lambda t: t[0])
    breaks = []
    for val, e in xs:
        if breaks and breaks[-1][0] == val:
            continue
        breaks.append((val, e))
    total = None
    for (v0, e0), (v1, e1) in zip(breaks, breaks[1:]):
        mid = {**witness, x: (v0 + v1) / 2}
        lows, highs = [], []
        for e in dom.ineqs:
            c = e.coeff(y)
            if not c:
                continue
            bound = e.drop(y).scale(Fraction(-1) / c)
            (lows if c > 0 else highs).append(bound)
        lo = max(lows, key=lambda b: b.evaluate(mid))
        hi = min(highs, key=lambda b: b.evaluate(mid))
        inner = _definite(p, y, _poly(lo), _poly(hi))
        piece = _definite(inner, x, _poly(e0), _poly(e1))
        total = piece if total is None else total + piece
    R, _ = _ring()
    return total if total is not None else R(0)


def _signature(word):
    """Slot-ordered decoration pattern and the Koszul sign of the reordering."""
    order = sorted(range(len(word)), key=lambda i: word[i][0].slot)
    slots = [word[i][0].slot for i in order]
    if len(set(slots)) != len(slots):
        raise WeakCalcError("moment test needs words multilinear in the slots")
    sign = 1
    for a, b in itertools.combinations(range(len(order)), 2):
        if order[a] > order[b] and word[order[a]][0].parity and word[order[b]][0].parity:
            sign = -sign
    sig = tuple(word[i][0].undecorated() for i in order)
    return sign, sig


def moments(c: Combination, regime: Regime | None = None, order: int = 2) -> dict:
    """Map decoration pattern -> moment polynomial (zero entries dropped)."""
    regime = regime or Regime()
    R, g = _ring()
    w = regime.witness
    acc: dict = {}
    for (dom, word), coeff in c.items():
        if dom.vars and not is_full_dimensional(dom, w):
            continue
        sign, sig = _signature(word)
        nd, nw = _rename_to_ring(dom, word)
        integrand = R(1)
        for f, pos in nw:
            z = g[f"z{f.slot}"]
            integrand = _truncate(integrand * z ** f.deriv * _exp_series(z * _poly(pos), order), order)
        val = _integrate(integrand, nd, w)
        k = coeff * sign * nd.orientation
        val = val * QQ(k.numerator, k.denominator)
        acc[sig] = acc.get(sig, R(0)) + val
    return {k: v for k, v in acc.items() if v}


def weakly_zero(c: Combination, regime: Regime | None = None, order: int = 2) -> dict:
    """Residual groups of ``c`` whose moments do not vanish (empty when weakly zero)."""
    regime = regime or Regime()
    bad = moments(c, regime, order)
    out = {}
    for (dom, word), coeff in c.items():
        try:
            _, sig = _signature(word)
        except WeakCalcError:
            continue
        if sig in bad:
            out.setdefault(sig, []).append(((dom, word), coeff))
    return {sig: Combination(terms) for sig, terms in out.items()}
