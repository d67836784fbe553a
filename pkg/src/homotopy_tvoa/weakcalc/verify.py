"""Identity checks for the nonlocal operations.

Every identity is written as ``lhs - rhs`` over fresh fields of every parity
pattern.  A check first normalises the difference; anything left over is
passed to the moment test, which decides weak vanishing.  When a literal
transcription fails, the smallest set of term sign flips that repairs it is
searched and reported (never silently adopted).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .moments import moments
from .ops import (
    ExprSum,
    Op,
    Q,
    apply_Q,
    evaluate,
    fields,
    kn_inequalities,
    m,
    make,
    mtilde,
    n,
    nprime,
    pair,
    q_boundary,
)
from .terms import Affine, Combination, Domain, Regime, WeakCalcError, normalize

IDENTITIES = ("prop3.1", "lemma3.1", "prop3.2", "lemma3.2", "pentagon-stokes", "prop3.3")
ARITY = {"prop3.1": 2, "lemma3.1": 2, "prop3.2": 3, "lemma3.2": 3,
         "pentagon-stokes": 4, "prop3.3": 4}

T = Affine.sym("t")
P6 = ("rho", "alpha1", "alpha2", "eps1", "eps2", "xi")


def _s(k: int) -> int:
    return -1 if k % 2 else 1


def _A(name):
    return Affine.sym(name)


# --------------------------------------------------------------------------
# Transcriptions
# --------------------------------------------------------------------------

def identity_terms(identity: str, parities) -> list:
    """``[(label, coeff, ExprSum | Combination)]`` whose sum is ``lhs - rhs``."""
    args = fields(parities)
    par = [a.sym.parity for a in args]
    if identity == "prop3.1":
        a, b = args
        return [("Q(A,B)_eps", 1, ExprSum.of(Q(pair(a, b, "eps")))),
                ("(QA,B)_eps", -1, ExprSum.of(pair(Q(a), b, "eps"))),
                ("(A,QB)_eps", -_s(par[0]), ExprSum.of(pair(a, Q(b), "eps")))]
    if identity == "lemma3.1":
        a, b = args
        return [("(A,B)_eps", 1, ExprSum.of(pair(a, b, "eps"))),
                ("(B,A)_-eps", -_s(par[0] * par[1]), ExprSum.of(pair(b, a, "-eps"))),
                ("D m_eps", -1, q_boundary("m", (a, b), ("eps",)))]
    if identity == "prop3.2":
        a, b, c = args
        return [("((A,B)_a1,C)_rho", 1, ExprSum.of(pair(pair(a, b, "alpha1"), c, "rho"))),
                ("(A,(B,C)_a2)_rho", -1, ExprSum.of(pair(a, pair(b, c, "alpha2"), "rho"))),
                ("D n", -1, q_boundary("n", (a, b, c), ("rho", "alpha1", "alpha2")))]
    if identity == "lemma3.2":
        a, b, c = args
        s_all = _s(par[0] * par[1] + par[0] * par[2] + par[1] * par[2])
        return [
            ("n'(A,B,C)", 1, ExprSum.of(nprime(a, b, c, "rho", "eps1", "eps2"))),
            ("n'(C,B,A)", s_all, ExprSum.of(nprime(c, b, a, "-rho", "-eps2", "-eps1"))),
            ("m((B,A)_-e1,C)", -_s(par[0] * par[1]), ExprSum.of(m(pair(b, a, "-eps1"), c, "rho"))),
            ("m(A,(B,C)_e2)", 1, ExprSum.of(m(a, pair(b, c, "eps2"), "rho"))),
            ("D- mtilde", -1, q_boundary("mtilde", (a, b, c), ("rho", "eps1", "eps2"), sign=-1)),
        ]
    if identity == "prop3.3":
        return [("D- p", 1, q_boundary("p", args, P6, sign=-1))] + [
            (label, -c, e) for label, c, e in prop33_rhs(args)
        ]
    if identity == "pentagon-stokes":
        out = [("D- p'", 1, q_boundary("pprime", args, P6, sign=-1))]
        for k, comb in six_terms(args).items():
            out.append((f"term ({k})", -1, comb))
        return out
    raise WeakCalcError(f"unknown identity {identity!r}")


def prop33_rhs(args) -> list:
    a1, a2, a3, a4 = args
    s1 = a1.sym.parity
    return [
        ("(A1,n(A2,A3,A4))_rho", _s(s1),
         ExprSum.of(pair(a1, n(a2, a3, a4, "eps2", "xi", "eps1"), "rho"))),
        ("n(A1,A2,(A3,A4))", -1, ExprSum.of(n(a1, a2, pair(a3, a4, "eps1"), "rho", "alpha1", "eps2"))),
        ("n(A1,(A2,A3),A4)", 1, ExprSum.of(n(a1, pair(a2, a3, "xi"), a4, "rho", "alpha2", "eps2"))),
        ("n((A1,A2),A3,A4)", -1, ExprSum.of(n(pair(a1, a2, "alpha1"), a3, a4, "rho", "alpha2", "eps1"))),
        ("(n(A1,A2,A3),A4)_rho", 1,
         ExprSum.of(pair(n(a1, a2, a3, "alpha2", "alpha1", "xi"), a4, "rho"))),
    ]


def _interval_term(word, var, lo, hi, coeff, regime):
    from .terms import interval_domain
    dom, empty = interval_domain(var, Affine.of(lo), Affine.of(hi), regime.witness)
    if empty:
        return Combination()
    return Combination.word(word, coeff, dom)


def six_terms(args, regime: Regime | None = None) -> dict:
    """The six displayed boundary terms of ``Q p'`` over the pentagon."""
    regime = regime or Regime()
    a1, a2, a3, a4 = (x.sym for x in args)
    s1, s2 = a1.parity, a2.parity
    y, x = _A("y"), _A("x")
    rho, e1, e2, al1, al2, xi = (_A(k) for k in ("rho", "eps1", "eps2", "alpha1", "alpha2", "xi"))
    b = lambda f: f.with_(b=1)
    return {
        1: _interval_term(((a1, rho + T), (a2, e2 + T), (b(a3), y + T), (a4, T)),
                          "y", e1, e2 - xi, _s(s1 + s2), regime),
        2: _interval_term(((a1, rho + T), (a2, rho - al1 + T), (b(a3), y + T), (a4, T)),
                          "y", e1, rho - al2, -_s(s1 + s2), regime),
        3: _interval_term(((a1, rho + T), (b(a2), x + T), (a3, rho - al2 + T), (a4, T)),
                          "x", rho - al2 + xi, rho - al1, _s(s1), regime),
        4: _interval_term(((a1, rho + T), (b(a2), x + T), (a3, e1 + T), (a4, T)),
                          "x", e2, rho - al1, -_s(s1), regime),
        5: _interval_term(((a1, rho + T), (a2, y + xi + T), (b(a3), y + T), (a4, T)),
                          "y", e2 - xi, rho - al2, _s(s1 + s2), regime),
        6: _interval_term(((a1, rho + T), (b(a2), x + T), (a3, x - xi + T), (a4, T)),
                          "x", e2, rho - al2 + xi, _s(s1), regime),
    }


# edge of the pentagon (by the parameter part of its inequality) -> displayed terms
PENTAGON_EDGES = {
    "x >= eps2": (1,),
    "x <= rho-alpha1": (2,),
    "y <= rho-alpha2": (3,),
    "y >= eps1": (4,),
    "x - y >= xi": (5, 6),
}


def _edge_name(e: Affine) -> str:
    rest = Affine({k: v for k, v in e.coeffs.items() if not k.startswith("s")}, e.const)
    table = {
        Affine.parse("-eps2"): "x >= eps2",
        Affine.parse("rho-alpha1"): "x <= rho-alpha1",
        Affine.parse("rho-alpha2"): "y <= rho-alpha2",
        Affine.parse("-eps1"): "y >= eps1",
        Affine.parse("-xi"): "x - y >= xi",
    }
    return table.get(rest, str(e))


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------

@dataclass
class VerifyReport:
    identity: str
    status: str
    residual: Combination
    syntactic: bool = True
    details: dict = dc_field(default_factory=dict)
    sign_flips: list | None = None

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict:
        return {
            "identity": self.identity,
            "status": self.status,
            "syntactic": self.syntactic,
            "residual": self.residual.to_json(),
            "sign_flips": self.sign_flips,
            "details": self.details,
        }


def _as_comb(x, regime) -> Combination:
    if isinstance(x, Combination):
        return x
    if isinstance(x, ExprSum):
        return x.evaluate(T, regime)
    return evaluate(x, T, regime)


def _sum_moments(parts, regime, order):
    total = {}
    for coeff, mom in parts:
        for k, v in mom.items():
            total[k] = total.get(k, 0) + v * coeff
    return {k: v for k, v in total.items() if v}


def parity_patterns(k: int):
    return list(itertools.product((0, 1), repeat=k))


def verify(identity: str, regime: Regime | None = None, order: int = 2,
           patterns=None, search_flips: bool = True) -> VerifyReport:
    """Check an identity on fresh fields of every parity pattern."""
    if identity not in IDENTITIES:
        raise WeakCalcError(f"unknown identity {identity!r}")
    regime = regime or Regime()
    residual = Combination()
    syntactic = True
    failing = []
    details = {}
    for pat in patterns or parity_patterns(ARITY[identity]):
        terms = identity_terms(identity, pat)
        combs = [(label, c, _as_comb(e, regime)) for label, c, e in terms]
        total = Combination()
        for _, c, comb in combs:
            total = total + comb.scale(c)
        norm = normalize(total, regime)
        if not norm:
            continue
        syntactic = False
        if not moments(norm, regime, order):
            continue
        residual = residual + norm
        moms = [moments(normalize(comb, regime), regime, order) for _, _, comb in combs]
        failing.append((pat, combs, moms))
    if identity == "pentagon-stokes":
        edge = pentagon_edges_check(regime)
        details["edges"] = edge
        if not all(v["ok"] for v in edge.values()):
            failing.append(("edges", [], []))
    status = "pass" if not failing else "fail"
    flips = None
    if failing and search_flips:
        flips = minimal_sign_flips(failing, order)
    details["patterns_checked"] = len(patterns or parity_patterns(ARITY[identity]))
    return VerifyReport(identity, status, residual, syntactic, details, flips)


def minimal_sign_flips(failing, order, max_size: int = 2):
    """Smallest sets of term labels whose sign flip makes every failing pattern vanish."""
    failing = [f for f in failing if f[1]]
    if not failing:
        return None
    labels = [label for label, _, _ in failing[0][1]]
    for size in range(1, max_size + 1):
        found = []
        for subset in itertools.combinations(range(len(labels)), size):
            ok = True
            for _, combs, moms in failing:
                parts = [(-c if i in subset else c, mom)
                         for i, ((_, c, _), mom) in enumerate(zip(combs, moms))]
                if _sum_moments(parts, None, order):
                    ok = False
                    break
            if ok:
                found.append([labels[i] for i in subset])
        if found:
            return found
    return []


def verify_all_witnesses(identity: str, regimes, **kw) -> list:
    return [verify(identity, r, **kw) for r in regimes]


# --------------------------------------------------------------------------
# Pentagon: edge-by-edge comparison
# --------------------------------------------------------------------------

def pentagon_edges_check(regime: Regime | None = None, patterns=None) -> dict:
    """Compare the Stokes boundary of ``p'`` with the displayed terms, edge by edge."""
    from .terms import derive_Q, stokes

    regime = regime or Regime()
    result = {name: {"ok": True, "terms": list(ts)} for name, ts in PENTAGON_EDGES.items()}
    for pat in patterns or parity_patterns(4):
        args = fields(pat)
        trace = []
        stokes(derive_Q(evaluate(make("pprime", args, P6), T, regime)), regime, trace)
        got = {}
        for e, comb in trace:
            name = _edge_name(e)
            got[name] = got.get(name, Combination()) + comb
        shown = six_terms(args, regime)
        for name, nums in PENTAGON_EDGES.items():
            want = Combination()
            for k in nums:
                want = want + shown[k]
            diff = normalize(got.get(name, Combination()) - want, regime)
            if diff:
                result[name]["ok"] = False
                result[name].setdefault("residual", []).extend(diff.to_lines())
        unknown = set(got) - set(PENTAGON_EDGES)
        if unknown:
            raise WeakCalcError(f"unexpected boundary pieces {sorted(unknown)}")
    return result


# --------------------------------------------------------------------------
# Scripted rearrangement leading to the pentagon relation
# --------------------------------------------------------------------------

@dataclass
class DerivationStep:
    label: str
    ok: bool
    residual: list


@dataclass
class DerivationReport:
    steps: list
    m_terms_cancel: bool
    leftover_m_terms: list
    closes: bool

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.steps) and self.m_terms_cancel and self.closes

    def as_dict(self):
        return {
            "ok": self.ok,
            "steps": [{"label": s.label, "ok": s.ok, "residual": s.residual} for s in self.steps],
            "m_terms_cancel": self.m_terms_cancel,
            "leftover_m_terms": self.leftover_m_terms,
            "closes": self.closes,
        }


def d_minus(kind, args, params=P6) -> ExprSum:
    return q_boundary(kind, args, params, sign=-1)


def _E(op, c=1):
    return ExprSum.of(op, c)


def rearrangement(args) -> list:
    """``[(label, lhs, rhs)]``: each step is an equality to be checked weakly."""
    a1, a2, a3, a4 = args
    s1, s2, s3 = (x.sym.parity for x in args[:3])
    st = []
    t56 = _E(nprime(a1, pair(a2, a3, "xi"), a4, "rho", "alpha2", "eps2")) + _E(
        pair(a1, pair(m(a2, a3, "xi"), a4, "eps2"), "rho"), _s(s1))
    t56b = (_E(n(a1, pair(a2, a3, "xi"), a4, "rho", "alpha2", "eps2"))
            - _E(pair(m(a1, pair(a2, a3, "xi"), "alpha2"), a4, "rho"))
            + _E(pair(a1, pair(m(a2, a3, "xi"), a4, "eps2"), "rho"), _s(s1)))
    st.append(("terms (5)+(6)", ("shown", (5, 6)), t56))
    st.append(("(5)+(6) via n", t56, t56b))

    y21 = pair(a2, a1, "-alpha1")
    t2 = _E(nprime(y21, a3, a4, "rho", "alpha2", "eps1"), -_s(s1 * s2))
    t2b = (_E(n(y21, a3, a4, "rho", "alpha2", "eps1"), -_s(s1 * s2))
           + _E(pair(m(y21, a3, "alpha2"), a4, "rho"), _s(s1 * s2)))
    t2c = (_E(n(pair(a1, a2, "alpha1"), a3, a4, "rho", "alpha2", "eps1"), -1)
           + _E(pair(m(y21, a3, "alpha2"), a4, "rho"), _s(s1 * s2))
           + _E(pair(pair(m(a1, a2, "alpha1"), a3, "alpha2"), a4, "rho"))
           - _E(pair(m(a1, a2, "alpha1"), pair(a3, a4, "eps1"), "rho"))
           - d_minus("o1", args))
    st.append(("term (2)", ("shown", (2,)), t2))
    st.append(("term (2) via n", t2, t2b))
    st.append(("term (2) via lemma 3.1", t2b, t2c))

    s_all = _s(s1 * s2 + s3 * s2 + s1 * s3)
    t3 = _E(pair(nprime(a3, a2, a1, "-alpha2", "-xi", "-alpha1"), a4, "rho"), -s_all)
    t3b = (_E(pair(n(a1, a2, a3, "alpha2", "alpha1", "xi"), a4, "rho"))
           - _E(pair(m(y21, a3, "alpha2"), a4, "rho"), _s(s1 * s2))
           + _E(pair(m(a1, pair(a2, a3, "xi"), "alpha2"), a4, "rho"))
           - _E(pair(pair(m(a1, a2, "alpha1"), a3, "alpha2"), a4, "rho"))
           - d_minus("o2", args))
    st.append(("term (3)", ("shown", (3,)), t3))
    st.append(("term (3) via lemma 3.2", t3, t3b))

    t14 = (_E(pair(a1, n(a2, a3, a4, "eps2", "xi", "eps1"), "rho"), _s(s1))
           - _E(n(a1, a2, pair(a3, a4, "eps1"), "rho", "alpha1", "eps2"))
           - _E(pair(a1, pair(m(a2, a3, "xi"), a4, "eps2"), "rho"), _s(s1))
           + _E(pair(m(a1, a2, "alpha1"), pair(a3, a4, "eps1"), "rho")))
    st.append(("terms (1)+(4)", ("shown", (1, 4)), t14))
    return st, [t56b, t2c, t3b, t14]


def derive_prop33(regime: Regime | None = None, order: int = 2, patterns=None) -> DerivationReport:
    """Run the rearrangement step by step and check the ``m``-term cancellation."""
    regime = regime or Regime()
    steps = {}
    cancel = True
    closes = True
    leftovers = []
    for pat in patterns or parity_patterns(4):
        args = fields(pat)
        shown = six_terms(args, regime)
        script, finals = rearrangement(args)
        for label, lhs, rhs in script:
            if isinstance(lhs, tuple) and lhs[0] == "shown":
                left = Combination()
                for k in lhs[1]:
                    left = left + shown[k]
            else:
                left = _as_comb(lhs, regime)
            diff = normalize(left - _as_comb(rhs, regime), regime)
            ok = True
            res = []
            if diff and moments(diff, regime, order):
                ok = False
                res = diff.to_lines()
            prev = steps.get(label)
            if prev is None:
                steps[label] = DerivationStep(label, ok, [f"{pat}: {r}" for r in res])
            elif not ok:
                prev.ok = False
                prev.residual += [f"{pat}: {r}" for r in res]
        total = ExprSum()
        for f in finals:
            total = total + f
        m_part = total.filter(lambda op: op.contains("m"))
        if m_part:
            cancel = False
            leftovers.append(f"{pat}: {m_part}")
        rest = total.filter(lambda op: not op.contains("m"))
        target = ExprSum()
        for _, c, e in prop33_rhs(args):
            target = target + e.scale(c)
        target = target - d_minus("o1", args) - d_minus("o2", args)
        if (rest - target):
            closes = False
    return DerivationReport(list(steps.values()), cancel, leftovers, closes)


# --------------------------------------------------------------------------
# Boundary of mu'_n over the associahedron
# --------------------------------------------------------------------------

# Loday parameters at which the pentagon is the realisation of K_4
K4_PENTAGON = {"alpha1": "1/6*rho", "xi": "1/6*rho", "eps1": "1/6*rho",
               "alpha2": "1/2*rho", "eps2": "1/2*rho"}
# facet bracket of K_4 -> displayed boundary terms of p'
K4_FACETS = {(2, 4): (1,), (1, 2): (2,), (1, 3): (3,), (3, 4): (4,), (2, 3): (5, 6)}


def _reference_terms(n_, args, regime) -> dict | None:
    if n_ == 3:
        a, b, c = (x.sym for x in args)
        rho = Affine.sym("rho")
        return {
            (1, 2): Combination.word(((a, rho + T), (b, rho.scale(Fraction(2, 3)) + T), (c, T))),
            (2, 3): Combination.word(((a, rho + T), (b, rho.scale(Fraction(1, 3)) + T), (c, T)), -1),
        }
    if n_ == 4:
        sub = {k: Affine.parse(v) for k, v in K4_PENTAGON.items()}
        shown = {k: c.substitute(sub) for k, c in six_terms(args, _k4_regime(regime)).items()}
        out = {}
        for br, nums in K4_FACETS.items():
            acc = Combination()
            for k in nums:
                acc = acc + shown[k]
            out[br] = acc
        return out
    return None


def _k4_regime(regime):
    w = dict(regime.witness)
    rho = w["rho"]
    for k, v in K4_PENTAGON.items():
        w[k] = Affine.parse(v).evaluate({"rho": rho})
    # the Loday values sit outside the default scale classes; only the
    # witness values matter for orienting intervals
    return Regime(w, classes=(("xi", "eps1", "alpha1"), ("rho",), ("t",)))


def boundary_expand(n_: int, regime: Regime | None = None, parities=None) -> dict:
    """Stokes boundary of ``mu'_n`` over the realisation of ``K_n``, sorted by facet.

    Each facet of ``K_n`` is a bracket ``[i, j]`` of consecutive inputs and
    stands for the ``A_infinity`` relation term where ``A_i..A_j`` are
    composed first.  For ``n = 3, 4`` the facet terms are compared with the
    known boundary terms (the pair terms of the homotopy associativity
    relation, and the six pentagon terms); a facet is *matched* when they
    agree.  For larger ``n`` no reference exists: nonzero facet terms are
    listed as unmatched candidates.
    """
    from .moments import moments as _moments
    from .terms import derive_Q, stokes

    if not 3 <= n_ <= 6:
        raise WeakCalcError("boundary_expand supports 3 <= n <= 6")
    regime = regime or Regime()
    parities = tuple(parities or (0,) * n_)
    args = fields(parities)
    rho = Affine.sym("rho")
    op = Op("mu", tuple(args), (rho,))
    trace = []
    stokes(derive_Q(evaluate(op, T, regime)), regime, trace)
    names = [f"s{k}" for k in range(1, n_ - 1)]
    facets = {e: br for br, e in kn_inequalities(n_, rho, names)}
    by_facet = {}
    for e, comb in trace:
        br = facets.get(e)
        if br is None:
            raise WeakCalcError(f"boundary piece on unknown facet {e}")
        by_facet[br] = by_facet.get(br, Combination()) + comb
    ref = _reference_terms(n_, args, regime)
    report = {"n": n_, "parities": list(parities), "facets": {}, "matched": [],
              "unmatched": []}
    for br, _ in kn_inequalities(n_, rho, names):
        i, j = br
        comb = normalize(by_facet.get(br, Combination()), regime)
        label = f"[{i},{j}]: mu_{n_ - (j - i)}(.., mu_{j - i + 1}(A{i}..A{j}), ..)"
        entry = {"bracket": [i, j], "terms": comb.to_lines(), "relation_term": label}
        if ref is not None:
            diff = normalize(comb - ref.get(br, Combination()), regime)
            matched = not diff or not _moments(diff, regime, 1)
        else:
            matched = False
        entry["matched"] = matched
        (report["matched"] if matched else report["unmatched"]).append(label)
        report["facets"][f"[{i},{j}]"] = entry
    report["facet_count"] = len(report["facets"])
    report["reference"] = ref is not None
    return report
