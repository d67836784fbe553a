"""Terms of the weak-sense calculus: words of fields at affine positions,
integrated over affine polytope domains.

A term is ``coeff * orientation * Lebesgue-integral over domain of word``.
Fields are fresh symbols with a parity; the decorations ``Q``, ``b`` (for
``[b_{-1}, .]``) and a derivative count are normalised using

    Q Q = 0,   b b = 0,   Q b + b Q = d,   d central,

so every decorated field is ``d^k b^e1 Q^e2 A``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .. import linalg
from ..polytopes import HPolytope


class WeakCalcError(ValueError):
    pass


class AmbiguousOrder(WeakCalcError):
    pass


def _sgn(k: int) -> int:
    return -1 if k % 2 else 1


# --------------------------------------------------------------------------
# Affine expressions
# --------------------------------------------------------------------------

class Affine:
    """Rational affine combination of named symbols."""

    __slots__ = ("coeffs", "const", "_key")

    def __init__(self, coeffs: Mapping[str, object] | None = None, const=0):
        clean = {}
        for k, v in (coeffs or {}).items():
            v = Fraction(v)
            if v:
                clean[k] = v
        self.coeffs = clean
        self.const = Fraction(const)
        self._key = (tuple(sorted(clean.items())), self.const)

    @classmethod
    def of(cls, value) -> "Affine":
        if isinstance(value, Affine):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        return cls({}, value)

    @classmethod
    def sym(cls, name: str) -> "Affine":
        return cls({name: 1})

    @classmethod
    def parse(cls, text: str) -> "Affine":
        """Parse sums like ``rho-alpha1+1/2*t`` or a plain rational."""
        s = text.replace(" ", "")
        if not s:
            raise WeakCalcError("empty affine expression")
        tokens = []
        cur = ""
        for i, ch in enumerate(s):
            if ch in "+-" and i > 0 and s[i - 1] not in "*/":
                tokens.append(cur)
                cur = ch
            else:
                cur += ch
        tokens.append(cur)
        out = cls()
        for tok in tokens:
            if not tok:
                continue
            sign = -1 if tok.startswith("-") else 1
            tok = tok.lstrip("+-")
            if "*" in tok:
                c, name = tok.split("*", 1)
                out = out + cls({name: sign * Fraction(c)})
            else:
                try:
                    out = out + cls({}, sign * Fraction(tok))
                except ValueError:
                    out = out + cls({tok: sign})
        return out

    def __add__(self, other):
        other = Affine.of(other)
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c.get(k, 0) + v
        return Affine(c, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return Affine({k: -v for k, v in self.coeffs.items()}, -self.const)

    def __sub__(self, other):
        return self + (-Affine.of(other))

    def __rsub__(self, other):
        return Affine.of(other) - self

    def scale(self, k) -> "Affine":
        k = Fraction(k)
        return Affine({a: k * v for a, v in self.coeffs.items()}, k * self.const)

    def coeff(self, name: str) -> Fraction:
        return self.coeffs.get(name, Fraction(0))

    def symbols(self) -> set:
        return set(self.coeffs)

    def drop(self, name: str) -> "Affine":
        return Affine({k: v for k, v in self.coeffs.items() if k != name}, self.const)

    def substitute(self, mapping: Mapping[str, "Affine"]) -> "Affine":
        out = Affine({}, self.const)
        for k, v in self.coeffs.items():
            if k in mapping:
                out = out + Affine.of(mapping[k]).scale(v)
            else:
                out = out + Affine({k: v})
        return out

    def rename(self, mapping: Mapping[str, str]) -> "Affine":
        return Affine({mapping.get(k, k): v for k, v in self.coeffs.items()}, self.const)

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        total = self.const
        for k, v in self.coeffs.items():
            try:
                total += v * values[k]
            except KeyError:
                raise WeakCalcError(f"no witness value for {k!r}") from None
        return total

    def is_constant(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, Affine):
            try:
                other = Affine.of(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __lt__(self, other):
        return self._key < other._key

    def __repr__(self):
        return f"Affine({self})"

    def __str__(self):
        parts = []
        for k, v in sorted(self.coeffs.items()):
            if v == 1:
                parts.append(f"+{k}")
            elif v == -1:
                parts.append(f"-{k}")
            else:
                parts.append(f"{'+' if v > 0 else '-'}{abs(v)}*{k}")
        if self.const or not parts:
            c = self.const
            parts.append(f"{'+' if c >= 0 else '-'}{abs(c)}")
        s = "".join(parts)
        return s[1:] if s.startswith("+") else s


# --------------------------------------------------------------------------
# Fields
# --------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class FieldSym:
    """``d^deriv b^b Q^q A`` for a base field ``A`` of parity ``base_parity``.

    ``slot`` records which argument of an identity the field came from; it is
    bookkeeping for the moment test and plays no role in the algebra.
    """

    slot: int
    name: str
    base_parity: int
    b: int = 0
    q: int = 0
    deriv: int = 0

    @property
    def parity(self) -> int:
        return (self.base_parity + self.b + self.q) % 2

    def undecorated(self) -> "FieldSym":
        return FieldSym(self.slot, self.name, self.base_parity, self.b, self.q, 0)

    def with_(self, **kw) -> "FieldSym":
        data = dict(slot=self.slot, name=self.name, base_parity=self.base_parity,
                    b=self.b, q=self.q, deriv=self.deriv)
        data.update(kw)
        return FieldSym(**data)

    def __str__(self):
        core = ("Q" if self.q else "") + self.name
        if self.b:
            core = f"[b,{core}]"
        return ("d" * self.deriv if self.deriv <= 2 else f"d^{self.deriv}") + core


def q_on_field(f: FieldSym) -> list:
    """``Q`` applied to one decorated field, as ``(coeff, field)`` pairs."""
    if f.b == 0 and f.q == 0:
        return [(1, f.with_(q=1))]
    if f.b == 0 and f.q == 1:
        return []
    if f.b == 1 and f.q == 0:
        return [(1, f.with_(b=0, deriv=f.deriv + 1)), (-1, f.with_(q=1))]
    return [(1, f.with_(b=0, deriv=f.deriv + 1))]


def b_on_field(f: FieldSym) -> list:
    if f.b:
        return []
    return [(1, f.with_(b=1))]


# --------------------------------------------------------------------------
# Domains
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """``{vars : e >= 0 for e in ineqs}`` with an orientation sign.

    The empty domain (no variables) is a point: the term is not integrated.
    """

    vars: tuple = ()
    ineqs: tuple = ()
    orientation: int = 1

    def __mul__(self, other: "Domain") -> "Domain":
        clash = set(self.vars) & set(other.vars)
        if clash:
            raise WeakCalcError(f"integration variables reused: {sorted(clash)}")
        return Domain(self.vars + other.vars, self.ineqs + other.ineqs,
                      self.orientation * other.orientation)

    @property
    def dim(self) -> int:
        return len(self.vars)

    def substitute(self, mapping) -> "Domain":
        return Domain(self.vars, tuple(e.substitute(mapping) for e in self.ineqs), self.orientation)

    def key(self):
        return (self.vars, tuple(sorted(self.ineqs)), self.orientation)

    def __eq__(self, other):
        return isinstance(other, Domain) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __str__(self):
        if not self.vars:
            return ""
        body = ", ".join(f"{e}>=0" for e in sorted(self.ineqs, key=str))
        sign = "" if self.orientation > 0 else "-"
        return f"{sign}int[{','.join(self.vars)} | {body}]"


POINT = Domain()


def interval_domain(var: str, lo: Affine, hi: Affine, witness: Mapping) -> tuple:
    """Oriented ``int_lo^hi``; returns ``(domain, zero)`` where ``zero`` flags an
    identically empty interval."""
    lo, hi = Affine.of(lo), Affine.of(hi)
    if lo == hi:
        return None, True
    x = Affine.sym(var)
    lv, hv = lo.evaluate(witness), hi.evaluate(witness)
    if lv == hv:
        raise AmbiguousOrder(f"interval endpoints {lo} and {hi} coincide at the witness")
    if lv < hv:
        return Domain((var,), (x - lo, hi - x), 1), False
    return Domain((var,), (x - hi, lo - x), -1), False


# --------------------------------------------------------------------------
# Combinations
# --------------------------------------------------------------------------

Word = tuple  # tuple of (FieldSym, Affine)


def word_parity(word: Word) -> int:
    return sum(f.parity for f, _ in word) % 2


def word_str(word: Word) -> str:
    return " ".join(f"{f}({p})" for f, p in word) or "1"


class Combination:
    """Formal linear combination of integrated words (immutable by convention)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | Iterable = ()):
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for (dom, word), c in items:
            c = Fraction(c)
            if not c:
                continue
            key = (dom, tuple(word))
            v = acc.get(key, 0) + c
            if v:
                acc[key] = v
            else:
                acc.pop(key, None)
        self.terms = acc

    @classmethod
    def word(cls, word: Word, coeff=1, domain: Domain = POINT) -> "Combination":
        return cls({(domain, tuple(word)): coeff})

    @classmethod
    def zero(cls) -> "Combination":
        return cls()

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def __add__(self, other: "Combination") -> "Combination":
        return Combination(itertools.chain(self.terms.items(), other.terms.items()))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "Combination":
        k = Fraction(k)
        return Combination({key: k * c for key, c in self.terms.items()})

    def __mul__(self, other: "Combination") -> "Combination":
        out = []
        for (d1, w1), c1 in self.terms.items():
            for (d2, w2), c2 in other.terms.items():
                out.append(((d1 * d2, w1 + w2), c1 * c2))
        return Combination(out)

    def integrate(self, domain: Domain) -> "Combination":
        return Combination({(domain * d, w): c for (d, w), c in self.terms.items()})

    def substitute(self, mapping) -> "Combination":
        return Combination(
            {(d.substitute(mapping), tuple((f, p.substitute(mapping)) for f, p in w)): c
             for (d, w), c in self.terms.items()}
        )

    def parities(self) -> set:
        return {word_parity(w) for (_, w) in self.terms}

    def max_dim(self) -> int:
        return max((d.dim for d, _ in self.terms), default=0)

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: (str(kv[0][0]), word_str(kv[0][1]), kv[1]))

    def __eq__(self, other):
        return isinstance(other, Combination) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def to_lines(self) -> list:
        out = []
        for (d, w), c in self.sorted_items():
            coeff = f"{'+' if c > 0 else '-'}{abs(c)}"
            out.append(f"{coeff} {d} {word_str(w)}".replace("  ", " ").strip())
        return out

    def to_json(self) -> list:
        return [
            {
                "coeff": f"{c.numerator}/{c.denominator}",
                "vars": list(d.vars),
                "inequalities": [f"{e} >= 0" for e in sorted(d.ineqs, key=str)],
                "orientation": d.orientation,
                "word": [[str(f), str(p)] for f, p in w],
            }
            for (d, w), c in self.sorted_items()
        ]

    def __str__(self):
        return "\n".join(self.to_lines()) or "0"


# --------------------------------------------------------------------------
# Derivations
# --------------------------------------------------------------------------

def _derive(c: Combination, rule) -> Combination:
    out = []
    for (dom, word), coeff in c.items():
        passed = 0
        for i, (f, pos) in enumerate(word):
            for k, g in rule(f):
                new = word[:i] + ((g, pos),) + word[i + 1:]
                out.append(((dom, new), coeff * k * _sgn(passed)))
            passed += f.parity
    return Combination(out)


def derive_Q(c: Combination) -> Combination:
    """``Q`` as an odd derivation; integration measures are even."""
    return _derive(c, q_on_field)


def derive_b(c: Combination) -> Combination:
    """``[b_{-1}, .]`` as an odd derivation."""
    return _derive(c, b_on_field)


# --------------------------------------------------------------------------
# Regime
# --------------------------------------------------------------------------

DEFAULT_WITNESS = {
    "t": Fraction(7),
    "rho": Fraction(1),
    "eps": Fraction(1, 13),
    "eps2": Fraction(1, 7),
    "alpha2": Fraction(1, 9),
    "eps1": Fraction(1, 89),
    "alpha1": Fraction(1, 83),
    "xi": Fraction(1, 97),
}

SCALE_CLASSES = (("xi", "eps1", "alpha1"), ("eps", "eps2", "alpha2"), ("rho",), ("t",))


@dataclass(frozen=True)
class Regime:
    """Strict ordering of scale classes plus a rational witness point."""

    witness: Mapping = field(default_factory=lambda: dict(DEFAULT_WITNESS))
    classes: tuple = SCALE_CLASSES

    def __post_init__(self):
        object.__setattr__(self, "witness", {k: Fraction(v) for k, v in self.witness.items()})
        bad = self.violations()
        if bad:
            raise WeakCalcError("witness violates regime: " + ", ".join(bad))

    def violations(self) -> list:
        w = self.witness
        bad = [f"{k} > 0" for k, v in w.items() if v <= 0]
        for lower, upper in zip(self.classes, self.classes[1:]):
            for a in lower:
                for b in upper:
                    if a in w and b in w and not w[a] < w[b]:
                        bad.append(f"{a} < {b}")
        return bad

    def value(self, e: Affine, extra: Mapping | None = None) -> Fraction:
        if extra:
            merged = dict(self.witness)
            merged.update(extra)
            return e.evaluate(merged)
        return e.evaluate(self.witness)

    @classmethod
    def scaled(cls, factor_small, factor_mid=1, t=None) -> "Regime":
        w = dict(DEFAULT_WITNESS)
        for k in SCALE_CLASSES[0]:
            w[k] = w[k] * Fraction(factor_small)
        for k in SCALE_CLASSES[1]:
            w[k] = w[k] * Fraction(factor_mid)
        if t is not None:
            w["t"] = Fraction(t)
        return cls(w)


def alternative_regimes() -> list:
    """Three further witnesses used to check witness independence."""
    return [
        Regime.scaled(Fraction(1, 2)),
        Regime.scaled(Fraction(2, 3), Fraction(5, 4), t=11),
        Regime({"t": 4, "rho": Fraction(3, 2), "eps": Fraction(1, 5), "eps2": Fraction(1, 4),
                "alpha2": Fraction(1, 6), "eps1": Fraction(1, 31), "alpha1": Fraction(1, 37),
                "xi": Fraction(1, 41)}),
    ]


# --------------------------------------------------------------------------
# Geometry of a domain at the witness
# --------------------------------------------------------------------------

def _numeric_polytope(dom: Domain, witness: Mapping) -> HPolytope:
    rows = []
    for e in dom.ineqs:
        a = tuple(-e.coeff(v) for v in dom.vars)
        b = _const_part(e, dom.vars, witness)
        rows.append((a, b))
    return HPolytope(dom.vars, tuple(rows))


def _const_part(e: Affine, vars_, witness) -> Fraction:
    rest = Affine({k: v for k, v in e.coeffs.items() if k not in vars_}, e.const)
    return rest.evaluate(witness)


def witness_vertices(dom: Domain, witness: Mapping) -> list:
    return _numeric_polytope(dom, witness).vertices()


def interior_point(dom: Domain, witness: Mapping) -> dict:
    verts = witness_vertices(dom, witness)
    if not verts:
        raise WeakCalcError(f"domain {dom} is empty at the witness")
    k = len(verts)
    centre = [sum(v[i] for v in verts) / k for i in range(dom.dim)]
    return dict(zip(dom.vars, centre))


def is_full_dimensional(dom: Domain, witness: Mapping) -> bool:
    if not dom.vars:
        return True
    verts = witness_vertices(dom, witness)
    if len(verts) < dom.dim + 1:
        return False
    v0 = verts[0]
    return linalg.rank([[a - b for a, b in zip(v, v0)] for v in verts[1:]]) == dom.dim


def facet_indices(dom: Domain, witness: Mapping) -> list:
    """Indices of inequalities that cut out genuine facets at the witness."""
    verts = witness_vertices(dom, witness)
    out = []
    for i, e in enumerate(dom.ineqs):
        tight = [v for v in verts if e.evaluate({**witness, **dict(zip(dom.vars, v))}) == 0]
        if dom.dim == 1:
            ok = len(tight) == 1
        else:
            ok = len(tight) >= dom.dim and linalg.rank(
                [[a - b for a, b in zip(v, tight[0])] for v in tight[1:]]
            ) == dom.dim - 1
        if ok:
            out.append(i)
    return out


# --------------------------------------------------------------------------
# Stokes / Newton-Leibniz
# --------------------------------------------------------------------------

def _stokes_candidate(dom: Domain, word: Word):
    """Pick a derivative to integrate out.

    Returns ``(i, v, sole)``: field ``i`` carries a derivative and depends on
    the variable ``v``.  ``sole`` means no other field depends on ``v``; in a
    one-dimensional domain the first field depending on ``v`` is also eligible,
    the remaining dependence being moved onto later fields by parts.
    """
    for i, (f, pos) in enumerate(word):
        if not f.deriv:
            continue
        for v in dom.vars:
            if pos.coeff(v) and not any(
                j != i and p.coeff(v) for j, (_, p) in enumerate(word)
            ):
                return i, v, True
    if dom.dim == 1:
        (v,) = dom.vars
        first = next((i for i, (_, p) in enumerate(word) if p.coeff(v)), None)
        if first is not None and word[first][0].deriv:
            return first, v, False
    return None


def stokes(c: Combination, regime: Regime, trace: list | None = None) -> Combination:
    """Convert integrals of exact derivatives into boundary integrals.

    A term whose integrand carries ``d`` on a field that is the only one
    depending on the variable ``v`` is ``(1/k) d/dv`` of the word with that
    derivative removed, and

        int_D d/dv G  =  sum over facets e >= 0 of D:  -sign(e_v) int_{facet} G|_{e=0}.

    Repeats until no rule applies.  ``trace`` collects
    ``(inequality, boundary combination)`` pairs for inspection.
    """
    w = regime.witness
    pending = list(c.items())
    done = []
    guard = 0
    while pending:
        guard += 1
        if guard > 100000:
            raise WeakCalcError("Stokes rewriting did not terminate")
        (dom, word), coeff = pending.pop()
        cand = _stokes_candidate(dom, word) if dom.vars else None
        if cand is None:
            done.append(((dom, word), coeff))
            continue
        i, v, sole = cand
        f, pos = word[i]
        k = pos.coeff(v)
        lowered = word[:i] + ((f.with_(deriv=f.deriv - 1), pos),) + word[i + 1:]
        if not sole:
            # k W = d/dv W_low - sum_{j != i} k_j W_low with d moved to field j
            for j, (g, p) in enumerate(lowered):
                kj = p.coeff(v)
                if j == i or not kj:
                    continue
                moved = lowered[:j] + ((g.with_(deriv=g.deriv + 1), p),) + lowered[j + 1:]
                pending.append(((dom, moved), -coeff * kj / k))
        rest_vars = tuple(x for x in dom.vars if x != v)
        for idx in facet_indices(dom, w):
            e = dom.ineqs[idx]
            cv = e.coeff(v)
            if not cv:
                continue
            solved = e.drop(v).scale(Fraction(-1) / cv)  # v = solved on the facet
            sub = {v: solved}
            new_ineqs = tuple(
                g.substitute(sub) for j, g in enumerate(dom.ineqs) if j != idx
            )
            new_dom = Domain(rest_vars, tuple(g for g in new_ineqs if not g.is_constant()),
                             dom.orientation * (-1 if cv > 0 else 1))
            constants_ok = all(g.evaluate(w) >= 0 for g in new_ineqs if g.is_constant())
            if not constants_ok:
                continue
            if rest_vars and not is_full_dimensional(new_dom, w):
                continue
            new_word = tuple((g, p.substitute(sub)) for g, p in lowered)
            term = ((new_dom, new_word), coeff / k)
            if trace is not None:
                trace.append((e, Combination([term])))
            pending.append(term)
    return Combination(done)


# --------------------------------------------------------------------------
# Normalisation
# --------------------------------------------------------------------------

def _sort_word(word: Word, point: Mapping, witness: Mapping) -> tuple:
    values = [p.evaluate({**witness, **point}) for _, p in word]
    order = sorted(range(len(word)), key=lambda i: -values[i])
    for a, b in zip(order, order[1:]):
        if values[a] == values[b] and word[a][1] != word[b][1]:
            raise AmbiguousOrder(
                f"positions {word[a][1]} and {word[b][1]} tie at the witness"
            )
    order = sorted(range(len(word)), key=lambda i: (-values[i], i))
    sign = 1
    for x, y in itertools.combinations(range(len(order)), 2):
        if order[x] > order[y] and word[order[x]][0].parity and word[order[y]][0].parity:
            sign = -sign
    return sign, tuple(word[i] for i in order)


def _canonical_ineq(e: Affine, vars_) -> Affine:
    lead = next((e.coeff(v) for v in vars_ if e.coeff(v)), None)
    if lead is None:
        return e
    return e.scale(Fraction(1) / abs(lead))


def normalize_term(dom: Domain, word: Word, regime: Regime):
    """Canonical ``(sign, domain, word)`` or None for measure-zero terms.

    The returned sign already includes the domain orientation."""
    w = regime.witness
    if dom.vars:
        if not is_full_dimensional(dom, w):
            return None
        point = interior_point(dom, w)
    else:
        point = {}
    sign, word = _sort_word(word, point, w)
    if not dom.vars:
        return sign * dom.orientation, POINT, word
    ineqs = [dom.ineqs[i] for i in facet_indices(dom, w)]
    order = []
    for _, p in word:
        for v in sorted(p.symbols()):
            if v in dom.vars and v not in order:
                order.append(v)
    order += [v for v in dom.vars if v not in order]
    ren = {v: f"u{k + 1}" for k, v in enumerate(order)}
    new_vars = tuple(ren[v] for v in order)
    ineqs = [e.rename(ren) for e in ineqs]
    word = tuple((f, p.rename(ren)) for f, p in word)
    shift = _translation(word, new_vars)
    if shift:
        ineqs = [e.substitute(shift) for e in ineqs]
        word = tuple((f, p.substitute(shift)) for f, p in word)
    ineqs = sorted({_canonical_ineq(e, new_vars) for e in ineqs})
    return sign * dom.orientation, Domain(new_vars, tuple(ineqs), 1), word


def _translation(word: Word, vars_, anchor: str = "t") -> dict:
    """Unimodular change of variables pinning each integration variable.

    For every variable, the first field whose position involves that variable
    alone (among the integration variables) is moved to ``±v + anchor``; terms
    differing by such a translation then share one canonical form.
    """
    shift = {}
    for v in vars_:
        for _, p in word:
            inner = [x for x in p.symbols() if x in vars_]
            if inner != [v] or abs(p.coeff(v)) != 1:
                continue
            rest = Affine({k: c for k, c in p.coeffs.items() if k not in (v, anchor)}, p.const)
            if rest.coeffs or rest.const:
                shift[v] = Affine.sym(v) - rest.scale(1 / p.coeff(v))
            break
    return shift


def _sorted_words(c: Combination, regime: Regime) -> Combination:
    out = []
    for (dom, word), coeff in c.items():
        if dom.vars and not is_full_dimensional(dom, regime.witness):
            continue
        point = interior_point(dom, regime.witness) if dom.vars else {}
        sign, word = _sort_word(word, point, regime.witness)
        out.append(((dom, word), coeff * sign))
    return Combination(out)


def normalize(c: Combination, regime: Regime | None = None) -> Combination:
    """Stokes rewriting, position sorting with Koszul signs, canonical domains, merging."""
    regime = regime or Regime()
    c = stokes(_sorted_words(c, regime), regime)
    out = []
    for (dom, word), coeff in c.items():
        res = normalize_term(dom, word, regime)
        if res is None:
            continue
        sign, nd, nw = res
        out.append(((nd, nw), coeff * sign))
    return Combination(out)
