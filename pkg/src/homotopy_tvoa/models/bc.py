"""The weight-(1, 0) bc ghost system as a topological vertex algebra.

Modes: ``b(z) = sum b_n z^{-n-1}``, ``c(z) = sum c_n z^{-n}`` with
``{b_m, c_k} = delta_{m+k,0}``; the vacuum is killed by ``b_n`` (n >= 0) and
``c_n`` (n >= 1).  Basis states are products of distinct creation modes,
written like ``b[-2]c[-1]|0>``.

Fields of composite states are built from the generators by the super
Borcherds identity

    (x_(m) A)_(n) = sum_i (-1)^i C(m, i) [ x_(m-i) A_(n+i)
                                          - (-1)^m (-1)^{|x||A|} A_(m+n-i) x_(i) ],

with ``b_(k) = b_k`` and ``c_(k) = c_{k+1}``.  The topological structure
(``Q = J_0`` with ``J = b``, an odd weight-2 field ``G`` with ``[Q, G] = L``,
the ghost current ``F``) is not assumed: :func:`bc_axioms_check` searches a
finite set of normalisations and keeps the one that passes.

In this system ``G_0^2 = 0`` fails for every candidate (for instance
``G_0^2 b[-1]|0> = -2 c[-1]|0>``), so the search reports failure and exposes
the assignment violating only that relation.  The Lian-Zuckerman relations
only use ``[Q, G] = L`` and are checked with that assignment.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

MAX_CUTOFF = 6


class BCError(ValueError):
    pass


# --------------------------------------------------------------------------
# Fock space
# --------------------------------------------------------------------------

# a mode is ("b", n) or ("c", n); a monomial is a canonically sorted tuple of
# creation modes (b before c, increasing index); a vector maps monomials to
# Fractions.

def is_creation(mode) -> bool:
    kind, n = mode
    return n <= -1 if kind == "b" else n <= 0


def mode_weight(mode) -> int:
    return -mode[1]


def mode_ghost(mode) -> int:
    return 1 if mode[0] == "b" else -1


def weight(mono) -> int:
    return sum(mode_weight(x) for x in mono)


def ghost(mono) -> int:
    return sum(mode_ghost(x) for x in mono)


def parity(mono) -> int:
    return len(mono) % 2


def _key(mode):
    return (0 if mode[0] == "b" else 1, mode[1])


def canonical(modes):
    """Sort a product of creation modes; returns ``(sign, mono)`` or ``(0, None)``."""
    modes = list(modes)
    if len(set(modes)) != len(modes):
        return 0, None
    sign = 1
    # bubble sort keeps track of transpositions
    for i in range(len(modes)):
        for j in range(len(modes) - 1 - i):
            if _key(modes[j]) > _key(modes[j + 1]):
                modes[j], modes[j + 1] = modes[j + 1], modes[j]
                sign = -sign
    return sign, tuple(modes)


VACUUM = ()


def vec(*pairs) -> dict:
    out = {}
    for mono, c in pairs:
        c = Fraction(c)
        if c:
            out[mono] = out.get(mono, 0) + c
            if not out[mono]:
                del out[mono]
    return out


def add(u: dict, v: dict, k=1) -> dict:
    out = dict(u)
    for mono, c in v.items():
        out[mono] = out.get(mono, 0) + k * c
        if not out[mono]:
            del out[mono]
    return out


def scale(v: dict, k) -> dict:
    k = Fraction(k)
    return {m: c * k for m, c in v.items()} if k else {}


def vector_parity(v: dict):
    ps = {parity(m) for m in v}
    if len(ps) > 1:
        raise BCError("vector is not parity homogeneous")
    return ps.pop() if ps else 0


_MODE_RE = re.compile(r"([bc])\[(-?\d+)\]")


def parse_state(text: str) -> dict:
    """``b[-2]c[-1]|0>`` -> basis vector (modes applied right to left)."""
    s = text.strip()
    if not s.endswith("|0>"):
        raise BCError(f"state must end with |0>: {text!r}")
    body = s[:-3]
    modes = []
    pos = 0
    for mt in _MODE_RE.finditer(body):
        if mt.start() != pos:
            raise BCError(f"cannot parse state {text!r} at column {pos + 1}")
        modes.append((mt.group(1), int(mt.group(2))))
        pos = mt.end()
    if pos != len(body):
        raise BCError(f"cannot parse state {text!r} at column {pos + 1}")
    v = {VACUUM: Fraction(1)}
    for mode in reversed(modes):
        v = apply_mode(mode, v)
    return v


def format_mono(mono) -> str:
    return "".join(f"{k}[{n}]" for k, n in mono) + "|0>"


def format_vector(v: dict) -> str:
    if not v:
        return "0"
    parts = []
    for mono in sorted(v, key=lambda m: (weight(m), [_key(x) for x in m])):
        c = v[mono]
        parts.append(f"{'+' if c > 0 else '-'}{abs(c)}*{format_mono(mono)}")
    s = " ".join(parts)
    return s[1:] if s.startswith("+") else s


@lru_cache(maxsize=None)
def _apply_mode_mono(mode, mono) -> tuple:
    kind, n = mode
    out = {}
    for j, x in enumerate(mono):
        if x[0] != kind and x[1] + n == 0:
            rest = mono[:j] + mono[j + 1:]
            out[rest] = out.get(rest, 0) + (-1) ** j
    if is_creation(mode):
        sign, new = canonical(mono + (mode,))
        if sign:
            out[new] = out.get(new, 0) + sign * (-1) ** len(mono)
    return tuple((m, Fraction(c)) for m, c in out.items() if c)


def apply_mode(mode, v: dict) -> dict:
    out = {}
    for mono, c in v.items():
        for m2, c2 in _apply_mode_mono(mode, mono):
            out[m2] = out.get(m2, 0) + c * c2
            if not out[m2]:
                del out[m2]
    return out


def basis(cutoff: int) -> list:
    """Basis monomials of weight <= cutoff."""
    if not 0 <= cutoff <= MAX_CUTOFF:
        raise BCError(f"cutoff must be in 0..{MAX_CUTOFF}")
    b_modes = [("b", -m) for m in range(1, cutoff + 1)]
    c_modes = [("c", -k) for k in range(0, cutoff + 1)]
    out = []
    for nb in range(len(b_modes) + 1):
        for bs in itertools.combinations(b_modes, nb):
            wb = sum(mode_weight(x) for x in bs)
            if wb > cutoff:
                continue
            for nc in range(len(c_modes) + 1):
                for cs in itertools.combinations(c_modes, nc):
                    if wb + sum(mode_weight(x) for x in cs) <= cutoff:
                        out.append(canonical(bs + cs)[1])
    return sorted(out, key=lambda m: (weight(m), [_key(x) for x in m]))


# --------------------------------------------------------------------------
# Vertex operators
# --------------------------------------------------------------------------

def _generator_mode(kind: str, k: int):
    """``x_(k)`` as a Fock mode."""
    return (kind, k) if kind == "b" else (kind, k + 1)


def _binom(m: int, i: int) -> Fraction:
    out = Fraction(1)
    for j in range(i):
        out *= Fraction(m - j, j + 1)
    return out


@lru_cache(maxsize=None)
def _vo_mono(a_mono, n: int, v_mono) -> tuple:
    """``A_(n) v`` for basis states ``A`` and ``v``."""
    if a_mono == VACUUM:
        return ((v_mono, Fraction(1)),) if n == -1 else ()
    wa, wv = weight(a_mono), weight(v_mono)
    if wa + wv - n - 1 < 0:
        return ()
    x, rest = a_mono[0], a_mono[1:]
    kind = x[0]
    m = x[1] if kind == "b" else x[1] - 1  # x = x_(m) |...>
    wx = 1 if kind == "b" else 0
    sign_swap = -1 if len(rest) % 2 else 1  # (-1)^{|x||A'|}, x odd
    total: dict = {}
    v = {v_mono: Fraction(1)}
    top = max(weight(rest) + wv - n - 1, wx + wv - 1)
    for i in range(0, top + 1):
        coef = _binom(m, i) * (-1) ** i
        if not coef:
            continue
        first = vo_apply({rest: Fraction(1)}, n + i, v)
        if first:
            total = add(total, apply_mode(_generator_mode(kind, m - i), first), coef)
        xi = apply_mode(_generator_mode(kind, i), v)
        if xi:
            second = vo_apply({rest: Fraction(1)}, m + n - i, xi)
            total = add(total, second, -coef * (-1) ** (m % 2) * sign_swap)
    return tuple(total.items())


def vo_apply(a: dict, n: int, v: dict) -> dict:
    """``A_(n) v`` extended bilinearly."""
    out: dict = {}
    for am, ac in a.items():
        for vm, vc in v.items():
            for rm, rc in _vo_mono(am, n, vm):
                out[rm] = out.get(rm, 0) + ac * vc * rc
                if not out[rm]:
                    del out[rm]
    return out


# --------------------------------------------------------------------------
# Topological data
# --------------------------------------------------------------------------

B_STATE = parse_state("b[-1]|0>")
DC_C_B = parse_state("c[-1]c[0]b[-1]|0>")  # :dc c b:
DC_B = parse_state("c[-1]b[-1]|0>")  # :dc b:
C_B = parse_state("c[0]b[-1]|0>")  # :c b:


@dataclass(frozen=True)
class TVOAData:
    """States J, G, F, L with the derived operators ``Q = J_0``, ``G_n``, ``L_n``, ``F_0``."""

    J: dict
    G: dict
    F: dict
    L: dict
    cutoff: int
    choice: dict = field(default_factory=dict)

    def Q(self, v: dict) -> dict:
        return vo_apply(self.J, 0, v)

    def G_mode(self, k: int, v: dict) -> dict:
        return vo_apply(self.G, k + 1, v)

    def L_mode(self, k: int, v: dict) -> dict:
        return vo_apply(self.L, k + 1, v)

    def F0(self, v: dict) -> dict:
        return vo_apply(self.F, 0, v)

    def L_minus1(self, v: dict) -> dict:
        return self.L_mode(-1, v)


C2_STATE = parse_state("c[-2]|0>")  # d^2 c / 2, killed by Q

AXIOMS = ("Q^2", "G_0^2", "[Q,G]", "F_0", "L_0")


def _candidates():
    scales = [Fraction(s) for s in (1, -1, 2, -2, Fraction(1, 2), Fraction(-1, 2))]
    shifts = [Fraction(s) for s in (0, 1, -1)]
    for g, u, l, f in itertools.product(scales, shifts, (1, -1), (1, -1)):
        yield {"G": g, "G_shift": u, "L": Fraction(l), "F": Fraction(f)}


def _data(choice, cutoff) -> TVOAData:
    G = add(scale(DC_C_B, choice["G"]), C2_STATE, choice.get("G_shift", 0))
    return TVOAData(J=B_STATE, G=G, F=scale(C_B, choice["F"]),
                    L=scale(DC_B, choice["L"]), cutoff=cutoff, choice=dict(choice))


def axiom_discrepancies(data: TVOAData, cutoff: int, first_only: bool = False) -> list:
    """Every failure ``(axiom, message)`` of the defining relations on basis
    states of weight <= cutoff."""
    out = []
    for mono in basis(cutoff):
        v = {mono: Fraction(1)}
        name = format_mono(mono)
        qv = data.Q(v)
        if data.Q(qv):
            out.append(("Q^2", f"Q^2 {name} = {format_vector(data.Q(qv))}"))
        g0 = data.G_mode(0, data.G_mode(0, v))
        if g0:
            out.append(("G_0^2", f"G_0^2 {name} = {format_vector(g0)}"))
        for k in range(-2, cutoff + 3):
            lhs = add(data.Q(data.G_mode(k, v)), data.G_mode(k, qv))
            rhs = data.L_mode(k, v)
            if lhs != rhs:
                out.append(("[Q,G]", f"[Q,G_{k}] - L_{k} on {name} = {format_vector(add(lhs, rhs, -1))}"))
        if data.F0(v) != scale(v, ghost(mono)):
            out.append(("F_0", f"F_0 {name} = {format_vector(data.F0(v))}"))
        if data.L_mode(0, v) != scale(v, weight(mono)):
            out.append(("L_0", f"L_0 {name} = {format_vector(data.L_mode(0, v))}"))
        if first_only and out:
            return out
    return out


def _choice_str(choice) -> str:
    return ", ".join(f"{k}={v}" for k, v in choice.items())


@dataclass
class AxiomsReport:
    """Outcome of the normalisation search.

    ``data`` is the passing assignment, or None.  ``best`` is the assignment
    violating the fewest axioms (used to probe the remaining relations when
    nothing passes) and ``failing_axioms`` names what it violates.
    """

    ok: bool
    cutoff: int
    data: TVOAData | None
    best: TVOAData
    failing_axioms: list
    tried: int
    discrepancies: list

    def as_dict(self):
        return {
            "ok": self.ok,
            "cutoff": self.cutoff,
            "choice": {k: str(v) for k, v in self.best.choice.items()},
            "failing_axioms": self.failing_axioms,
            "tried": self.tried,
            "discrepancies": self.discrepancies,
        }


def bc_axioms_check(cutoff: int = 4) -> AxiomsReport:
    """Search normalisations of ``G``, ``L``, ``F``; keep the first that passes."""
    if not 0 <= cutoff <= MAX_CUTOFF:
        raise BCError(f"cutoff must be in 0..{MAX_CUTOFF}")
    best = None
    tried = 0
    for choice in _candidates():
        tried += 1
        data = _data(choice, cutoff)
        bad = axiom_discrepancies(data, cutoff)
        if not bad:
            return AxiomsReport(True, cutoff, data, data, [], tried, [])
        failing = sorted({a for a, _ in bad}, key=AXIOMS.index)
        if best is None or len(failing) < len(best[1]):
            best = (data, failing, bad)
    data, failing, bad = best
    return AxiomsReport(False, cutoff, None, data, failing, tried,
                        [f"{_choice_str(data.choice)}: {msg}" for _, msg in bad])


@lru_cache(maxsize=None)
def axioms_report(cutoff: int = 4) -> AxiomsReport:
    return bc_axioms_check(cutoff)


def default_data(cutoff: int = 4) -> TVOAData:
    """The passing assignment, or the best partial one when none passes."""
    return axioms_report(cutoff).best


# --------------------------------------------------------------------------
# Lian-Zuckerman operations
# --------------------------------------------------------------------------

def _max_weight(*vs) -> int:
    return max((weight(m) for v in vs for m in v), default=0)


def lz_pair(a: dict, b: dict) -> dict:
    """``(A, B) = Res_z z^{-1} A(z) B = A_(-1) B``."""
    return vo_apply(a, -1, b)


def lz_m(a: dict, b: dict, data: TVOAData) -> dict:
    """``m(A,B) = sum_i (-1)^i/(i+1) L_{-1}^i/i! G_{-1}(A_(i) B)``."""
    out: dict = {}
    top = _max_weight(a) + _max_weight(b)
    fact = 1
    for i in range(top + 1):
        if i:
            fact *= i
        x = data.G_mode(-1, vo_apply(a, i, b))
        for _ in range(i):
            x = data.L_minus1(x)
        out = add(out, x, Fraction((-1) ** i, (i + 1) * fact))
    return out


def lz_n(a: dict, b: dict, c: dict, data: TVOAData) -> dict:
    """``n(A,B,C) = sum_i 1/(i+1) [ (G_{-1}A)_(-i-1) B_(i) C
    + (-1)^{|A||B|} (G_{-1}B)_(-i-1) A_(i) C ]``."""
    pa, pb = vector_parity(a), vector_parity(b)
    ga, gb = data.G_mode(-1, a), data.G_mode(-1, b)
    top = _max_weight(a) + _max_weight(b) + _max_weight(c)
    out: dict = {}
    for i in range(top + 1):
        out = add(out, vo_apply(ga, -i - 1, vo_apply(b, i, c)), Fraction(1, i + 1))
        out = add(out, vo_apply(gb, -i - 1, vo_apply(a, i, c)),
                  Fraction((-1) ** (pa * pb), i + 1))
    return out


def bc_lz(opname: str, states, cutoff: int = 4) -> dict:
    """Evaluate ``pair``, ``m`` or ``n`` on Fock states (strings or vectors)."""
    vs = [parse_state(s) if isinstance(s, str) else s for s in states]
    if any(_max_weight(v) > cutoff for v in vs):
        raise BCError("input weight exceeds the cutoff")
    data = default_data(cutoff)
    arity = {"pair": 2, "m": 2, "n": 3}
    if opname not in arity:
        raise BCError(f"unknown operation {opname!r}")
    if len(vs) != arity[opname]:
        raise BCError(f"{opname} takes {arity[opname]} states")
    if opname == "pair":
        return lz_pair(*vs)
    if opname == "m":
        return lz_m(*vs, data)
    return lz_n(*vs, data)


def _sg(k):
    return -1 if k % 2 else 1


def prop21_residuals(a: dict, b: dict, data: TVOAData, c: dict | None = None) -> dict:
    """Residuals (LHS - RHS) of the three relations; the third needs ``c``."""
    Q = data.Q
    pa, pb = vector_parity(a), vector_parity(b)
    out = {}
    out["cochain"] = add(Q(lz_pair(a, b)),
                         add(lz_pair(Q(a), b), lz_pair(a, Q(b)), _sg(pa)), -1)
    lhs = add(lz_pair(a, b), lz_pair(b, a), -_sg(pa * pb))
    rhs = add(add(Q(lz_m(a, b, data)), lz_m(Q(a), b, data)), lz_m(a, Q(b), data), _sg(pa))
    out["commutativity"] = add(lhs, rhs, -1)
    if c is not None:
        lhs = add(add(Q(lz_n(a, b, c, data)), lz_n(Q(a), b, c, data)),
                  lz_n(a, Q(b), c, data), _sg(pa))
        lhs = add(lhs, lz_n(a, b, Q(c), data), _sg(pa + pb))
        rhs = add(lz_pair(lz_pair(a, b), c), lz_pair(a, lz_pair(b, c)), -1)
        out["associativity"] = add(lhs, rhs, -1)
    return out


@dataclass
class Prop21Report:
    ok: bool
    pairs: int
    triples: int
    failures: list

    def as_dict(self):
        return {"ok": self.ok, "pairs": self.pairs, "triples": self.triples,
                "failures": self.failures[:10]}


def bc_verify_prop21(cutoff: int = 4, pair_weight: int = 2, triple_weight: int = 1) -> Prop21Report:
    """All three relations on every basis pair (weight <= 2) and triple (weight <= 1)."""
    data = default_data(cutoff)
    failures = []
    pairs = basis(pair_weight)
    for x, y in itertools.product(pairs, repeat=2):
        res = prop21_residuals({x: Fraction(1)}, {y: Fraction(1)}, data)
        for name, r in res.items():
            if r:
                failures.append(f"{name} ({format_mono(x)}, {format_mono(y)}): {format_vector(r)}")
    triples = basis(triple_weight)
    count = 0
    for x, y, z in itertools.product(triples, repeat=3):
        count += 1
        res = prop21_residuals({x: Fraction(1)}, {y: Fraction(1)}, data, {z: Fraction(1)})
        r = res["associativity"]
        if r:
            failures.append(f"associativity ({format_mono(x)}, {format_mono(y)}, {format_mono(z)}): "
                            f"{format_vector(r)}")
    return Prop21Report(not failures, len(pairs) ** 2, count, failures)
