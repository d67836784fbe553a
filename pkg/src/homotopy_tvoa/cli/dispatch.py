"""Dispatch table: one handler per module operation.

A handler receives the check's string parameters, a seeded ``random.Random``
and the backend name, and returns an :class:`Outcome`.  Handlers never see
floating point; numbers arrive as ``p/q`` strings.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .. import ainfty, polytopes
from ..models import bc, derham
from .checkspec import Check, parse_rational

PASS, FAIL, DEGENERATE = "pass", "fail", "degenerate"


class Degenerate(Exception):
    """Parameters violate a regime; the check is reported as degenerate."""


@dataclass
class Outcome:
    status: str
    residual: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    result: str = ""


def _q(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# --------------------------------------------------------------------------
# Parameter helpers
# --------------------------------------------------------------------------

class _Params:
    """Typed access to string parameters; records what was actually used."""

    def __init__(self, raw: dict):
        self.raw = dict(raw)
        self.used: dict = {}

    def str(self, key, default=None, choices=None):
        if key not in self.raw:
            if default is None:
                raise ValueError(f"missing parameter {key!r}")
            value = default
        else:
            value = self.raw[key]
        if choices is not None and value not in choices:
            raise ValueError(f"{key}={value!r}: expected one of {', '.join(choices)}")
        self.used[key] = value
        return value

    def int(self, key, default=None) -> int:
        value = self.str(key, None if default is None else str(default))
        try:
            return int(value)
        except ValueError:
            raise ValueError(f"{key}={value!r} is not an integer") from None

    def rational(self, key, default=None) -> Fraction:
        value = self.str(key, None if default is None else _q(default))
        out = parse_rational(value)
        self.used[key] = _q(out)
        return out

    def opt_rational(self, key):
        return self.rational(key) if key in self.raw else None

    def ints(self, key, default=None) -> list:
        value = self.str(key, default)
        return [int(v) for v in value.split(",") if v.strip()]

    def has(self, key) -> bool:
        return key in self.raw


# --------------------------------------------------------------------------
# ainfty
# --------------------------------------------------------------------------

def _structure(p: _Params):
    name = p.str("structure", "dga-lambda", ainfty.BUILTINS)
    return ainfty.builtin_structure(name)


def _report_outcome(report, p: _Params) -> Outcome:
    expect = p.str("expect", "pass", ("pass", "fail"))
    got = "pass" if report.ok else "fail"
    residual = [f"{inp}: {res}" for inp, res in sorted(report.residuals.items(), key=str)][:20]
    return Outcome(PASS if got == expect else FAIL, residual if got != expect else [],
                   result=f"{len(report.residuals)} nonzero residuals")


def h_koszul_sign(p, rng):
    sign = ainfty.koszul_sign(p.ints("degrees"), p.ints("permutation"))
    expect = p.opt_rational("expect")
    ok = expect is None or expect == sign
    return Outcome(PASS if ok else FAIL, [] if ok else [f"sign {sign}, expected {expect}"],
                   result=str(sign))


def h_block_insert(p, rng):
    A = _structure(p)
    mu = A.op(p.int("arity", A.n_max))
    if mu is None:
        raise ValueError("structure has no operation of that arity")
    table = ainfty.block_insert(mu, p.int("l", 0), p.int("m", mu.arity),
                                p.str("convention", A.convention, ainfty.CONVENTIONS))
    return Outcome(PASS, result=f"{len(table)} nonzero images")


def h_check_relations(p, rng):
    A = _structure(p)
    conv = p.str("convention", A.convention, ainfty.CONVENTIONS)
    return _report_outcome(ainfty.check_relations(A, p.int("n", 3), conv), p)


def h_desuspend(p, rng):
    B = ainfty.desuspend(_structure(p))
    report = ainfty.bar_square_residual(B, p.int("N", 3))
    out = _report_outcome(report, p)
    out.result = "degrees " + ", ".join(f"{a}:{d}" for a, d in B.space.degrees.items())
    return out


def h_bar_square_residual(p, rng):
    return _report_outcome(ainfty.bar_square_residual(_structure(p), p.int("N", 6)), p)


def h_builtin_structure(p, rng):
    A = ainfty.builtin_structure(p.str("name", "dga-lambda", ainfty.BUILTINS))
    ok = ainfty.loads(ainfty.dumps(A)).ops.keys() == A.ops.keys()
    return Outcome(PASS if ok else FAIL, [] if ok else ["text round trip changed the structure"],
                   result=f"labels {','.join(A.space.labels)}; ops {','.join(map(str, A.ops))}")


# --------------------------------------------------------------------------
# polytopes
# --------------------------------------------------------------------------

def h_associahedron_faces(p, rng):
    n = p.int("n")
    L = polytopes.associahedron_faces(n)
    fv = L.f_vector()
    bad = []
    if n >= 3:
        if fv[0] != polytopes.catalan(n - 1):
            bad.append(f"{fv[0]} vertices, expected {polytopes.catalan(n - 1)}")
        if len(L.facets) != n * (n - 1) // 2 - 1:
            bad.append(f"{len(L.facets)} facets, expected {n * (n - 1) // 2 - 1}")
        chi = L.boundary_euler_characteristic()
        if chi != 1 + (-1) ** (n - 3):
            bad.append(f"boundary Euler characteristic {chi}, expected {1 + (-1) ** (n - 3)}")
    return Outcome(FAIL if bad else PASS, bad, result="f-vector " + ",".join(map(str, fv)))


def _parse_brackets(text: str, n: int):
    out = set()
    for part in text.split(","):
        if part.strip():
            i, j = (int(x) for x in part.split("-"))
            out.add((i, j))
    return polytopes.PlanarTree(n, frozenset(out))


def h_face_boundary(p, rng):
    n = p.int("n")
    face = _parse_brackets(p.str("brackets", "-"), n) if p.has("brackets") else polytopes.corolla(n)
    terms = polytopes.face_boundary(face)
    sq = polytopes.boundary_squared(face) if face.dim >= 2 else {}
    bad = [f"{c:+d} {h}" for h, c in sorted(sq.items())]
    return Outcome(FAIL if bad else PASS, bad,
                   result=" ".join(f"{'+' if s > 0 else '-'}{g}" for s, g in terms))


_PENTAGON_DEFAULTS = {"rho": Fraction(1), "alpha2": Fraction(1, 10), "eps2": Fraction(1, 10),
                      "alpha1": Fraction(1, 100), "eps1": Fraction(1, 100), "xi": Fraction(1, 100)}


def _pentagon_params(p: _Params) -> polytopes.PentagonParams:
    vals = {k: p.rational(k, v) for k, v in _PENTAGON_DEFAULTS.items()}
    pp = polytopes.PentagonParams.from_mapping(vals)
    bad = pp.violations()
    if bad:
        raise Degenerate("pentagon regime violated: " + ", ".join(bad))
    return pp


def _fmt_point(v) -> str:
    return "(" + ",".join(_q(x) for x in v) + ")"


def h_pentagon_P(p, rng):
    P = polytopes.pentagon_P(_pentagon_params(p))
    verts = P.vertices()
    ok = len(verts) == 5
    return Outcome(PASS if ok else FAIL, [] if ok else [f"{len(verts)} vertices"],
                   result="vertices " + " ".join(_fmt_point(v) for v in verts))


def h_kn_domain(p, rng):
    n = p.int("n")
    rho = p.rational("rho", 1)
    if rho <= 0:
        raise Degenerate("rho must be positive")
    K = polytopes.kn_domain(n, rho)
    count = len(K.realization.vertices())
    ok = count == polytopes.catalan(n - 1)
    return Outcome(PASS if ok else FAIL,
                   [] if ok else [f"{count} vertices, expected {polytopes.catalan(n - 1)}"],
                   result=f"{count} vertices, {len(K.facet_brackets)} facets")


def h_integrate(p, rng):
    kind = p.str("domain", "pentagon", ("pentagon", "kn"))
    if kind == "pentagon":
        D = polytopes.pentagon_P(_pentagon_params(p))
    else:
        rho = p.rational("rho", 1)
        if rho <= 0:
            raise Degenerate("rho must be positive")
        D = polytopes.kn_domain(p.int("n", 4), rho).realization
    f_text = p.str("f", "1")
    if f_text == "1":
        value = polytopes.integrate(D)
    else:
        R, _ = polytopes.poly_ring(D.variables)
        value = polytopes.integrate(D, R.from_expr(f_text))
    expect = p.opt_rational("expect")
    bad = []
    if expect is not None and value != expect:
        bad.append(f"integral {value}, expected {_q(expect)}")
    if kind == "pentagon" and f_text == "1":
        area = polytopes.shoelace_area(D.polygon())
        if area != value:
            bad.append(f"shoelace area {area} differs from {value}")
    return Outcome(FAIL if bad else PASS, bad, result=str(value))


def h_moduli_cell_count(p, rng):
    n = p.int("n")
    value = polytopes.moduli_cell_count(n)
    expect = p.opt_rational("expect")
    ok = expect is None or expect == value
    return Outcome(PASS if ok else FAIL, [] if ok else [f"{value}, expected {expect}"],
                   result=str(value))


# --------------------------------------------------------------------------
# weakcalc
# --------------------------------------------------------------------------

def _regime(p: _Params):
    from ..weakcalc import Regime, alternative_regimes
    from ..weakcalc.terms import DEFAULT_WITNESS

    k = p.int("witness", 0)
    if k:
        regs = alternative_regimes()
        if not 1 <= k <= len(regs):
            raise ValueError(f"witness must be in 0..{len(regs)}")
        base = dict(regs[k - 1].witness)
    else:
        base = dict(DEFAULT_WITNESS)
    for name in DEFAULT_WITNESS:
        key = f"w_{name}"
        if p.has(key):
            base[name] = p.rational(key)
    try:
        regime = Regime(base)
    except ValueError as exc:
        raise Degenerate(str(exc)) from None
    return regime


def _witness_params(regime) -> dict:
    return {f"w_{k}": _q(v) for k, v in sorted(regime.witness.items())}


def _parities(p: _Params, arity: int, rng) -> tuple:
    if p.str("parities", "random") == "random":
        pat = tuple(rng.randint(0, 1) for _ in range(arity))
        p.used["parities"] = ",".join(map(str, pat))
        return pat
    pat = tuple(p.ints("parities"))
    if len(pat) != arity or any(x not in (0, 1) for x in pat):
        raise ValueError(f"parities must be {arity} values in {{0,1}}")
    return pat


def _built(p: _Params, rng):
    from .. import weakcalc as wc

    opname = p.str("op", None, wc.OPERATIONS)
    if opname in ("mu", "nu"):
        arity, names = p.int("arity", 3), ("rho",)
    else:
        arity, names = wc.SIGNATURES[opname]
    regime = _regime(p)
    args = wc.fields(_parities(p, arity, rng))
    params = {k: p.str(k) for k in names if p.has(k)}
    try:
        comb = wc.build(opname, args, params, at=p.str("at", "t"), regime=regime)
    except wc.RegimeViolation as exc:
        raise Degenerate(str(exc)) from None
    return comb, regime


def h_build(p, rng):
    comb, regime = _built(p, rng)
    p.used.update(_witness_params(regime))
    return Outcome(PASS, result=f"{len(comb)} terms")


def h_apply_Q(p, rng):
    from .. import weakcalc as wc

    comb, regime = _built(p, rng)
    p.used.update(_witness_params(regime))
    once = wc.apply_Q(comb, regime)
    twice = wc.normalize(wc.apply_Q(once, regime), regime)
    order = p.int("order", 2)
    bad = [] if not twice or not wc.moments(twice, regime, order) else twice.to_lines()[:20]
    return Outcome(FAIL if bad else PASS, bad, result=f"Q gives {len(wc.normalize(once, regime))} terms")


def h_normalize(p, rng):
    from .. import weakcalc as wc

    comb, regime = _built(p, rng)
    p.used.update(_witness_params(regime))
    once = wc.normalize(comb, regime)
    again = wc.normalize(once, regime)
    ok = once == again
    return Outcome(PASS if ok else FAIL, [] if ok else ["normalize is not idempotent"],
                   result=f"{len(once)} normal-form terms")


def _random_inputs(p: _Params, rng, arity: int, key: str = "inputs") -> list:
    text = p.str(key, "random")
    if text == "random":
        deg = p.int("max_degree", 4)
        out = [derham.random_element(rng, rng.randint(0, 1), deg) for _ in range(arity)]
        # record the draw so a report is reproducible from its params alone
        drawn = ";".join(derham.format_element(a) for a in out)
        prev = p.used.get("drawn")
        p.used["drawn"] = drawn if prev is None else f"{prev} / {drawn}"
        return out
    parts = [s for s in text.split(";")]
    if len(parts) != arity:
        raise ValueError(f"expected {arity} inputs separated by ';'")
    return [derham.parse_element(s) for s in parts]


_MODEL_DEFAULTS = {"eps": Fraction(1, 10), **_PENTAGON_DEFAULTS}
_IDENTITY_PARAMS = {
    "lemma3.1": ("eps",),
    "prop3.2": ("rho", "alpha1", "alpha2"),
    "lemma3.2": ("rho", "eps1", "eps2"),
    "prop3.3": ("rho", "alpha1", "alpha2", "eps1", "eps2", "xi"),
}


def h_model_residual(p, rng):
    identity = p.str("identity", None, derham.IDENTITIES)
    params = {k: p.rational(k, _MODEL_DEFAULTS[k]) for k in _IDENTITY_PARAMS[identity]}
    t = p.rational("t", 2)
    count = p.int("count", 10) if p.str("inputs", "random") == "random" else 1
    try:
        derham._check_regime(identity, params)
    except derham.ModelError as exc:
        raise Degenerate(str(exc)) from None
    functionals = derham.standard_functionals()
    bad = []
    for k in range(count):
        inputs = _random_inputs(p, rng, derham.IDENTITY_ARITY[identity])
        res = derham.model_residual(identity, inputs, params, t)
        if res:
            shown = ";".join(derham.format_element(a) for a in inputs)
            bad.append(f"instance {k} ({shown}): residual {derham.format_element(res)}")
            continue
        for fn in functionals:
            if fn(res) != 0:
                bad.append(f"instance {k}: functional {fn.name} gives {fn(res)}")
    return Outcome(FAIL if bad else PASS, bad[:20],
                   result=f"{count} instances, {len(functionals)} functionals")


def h_verify(p, rng, backend):
    from .. import weakcalc as wc

    identity = p.str("identity")
    if backend == "derham":
        if identity not in derham.IDENTITIES:
            raise ValueError(f"identity {identity!r} has no de Rham model check")
        return h_model_residual(p, rng)
    regime = _regime(p)
    p.used.update(_witness_params(regime))
    if identity == "prop3.3-derivation":
        rep = wc.derive_prop33(regime, p.int("order", 2))
        bad = [f"step {s.label} fails" for s in rep.steps if not s.ok]
        if not rep.m_terms_cancel:
            bad.append("m-containing terms do not cancel: " + "; ".join(map(str, rep.leftover_m_terms)))
        if not rep.closes:
            bad.append("rearranged terms do not close up")
        return Outcome(PASS if rep.ok else FAIL, bad, result=f"{len(rep.steps)} steps")
    rep = wc.verify(identity, regime, p.int("order", 2))
    residual = rep.residual.to_lines()[:20]
    if rep.sign_flips:
        residual.append("sign flips that would repair it: " + "; ".join(map(str, rep.sign_flips)))
    how = "syntactic" if rep.syntactic else "moments"
    return Outcome(PASS if rep.ok else FAIL, [] if rep.ok else residual or ["edge check failed"],
                   result=f"{how}, {rep.details.get('patterns_checked', 0)} parity patterns")


def h_boundary_expand(p, rng):
    from .. import weakcalc as wc

    n = p.int("n")
    regime = _regime(p)
    pat = tuple(p.ints("parities", ",".join("0" * n)))
    rep = wc.boundary_expand(n, regime, pat)
    well_formed = rep["facet_count"] == n * (n - 1) // 2 - 1
    bad = [] if well_formed else [f"{rep['facet_count']} facets"]
    if rep["reference"]:
        bad += [f"unmatched {u}" for u in rep["unmatched"]]
    return Outcome(FAIL if bad else PASS, bad,
                   result=f"{len(rep['matched'])} matched, {len(rep['unmatched'])} unmatched"
                          + ("" if rep["reference"] else " (no reference)"))


# --------------------------------------------------------------------------
# models
# --------------------------------------------------------------------------

def h_derham_apply(p, rng):
    op = p.str("op", None, ("q", "beta", "ell", "translate", "mul"))
    arity = 2 if op == "mul" else 1
    args = _random_inputs(p, rng, arity)
    if op == "translate":
        out = derham.translate(p.rational("t", 0), args[0])
    else:
        out = derham.derham_apply(op, *args)
    bad = []
    # cheap structural checks
    if op == "q" and derham.q(out):
        bad.append("q^2 is not zero")
    if op == "beta" and derham.beta(out):
        bad.append("beta^2 is not zero")
    return Outcome(FAIL if bad else PASS, bad, result=derham.format_element(out))


def h_eval_op(p, rng):
    opname = p.str("op", None, tuple(derham.OPS))
    arity, names = derham.OPS[opname]
    keys = tuple(_PENTAGON_DEFAULTS) if names == ("pentagon",) else names
    params = {k: p.rational(k, _MODEL_DEFAULTS[k]) for k in keys}
    inputs = _random_inputs(p, rng, arity)
    try:
        out = derham.eval_op(opname, inputs, params, p.rational("t", 0))
    except derham.ModelError as exc:
        if "regime" in str(exc):
            raise Degenerate(str(exc)) from None
        raise
    return Outcome(PASS, result=derham.format_element(out))


def h_lz_model(p, rng):
    opname = p.str("op", None, ("pair", "m", "n"))
    inputs = _random_inputs(p, rng, 3 if opname == "n" else 2)
    out = derham.lz_model(opname, inputs)
    return Outcome(PASS, result=derham.format_element(out))


def h_bc_axioms_check(p, rng):
    rep = bc.bc_axioms_check(p.int("cutoff", 4))
    choice = ", ".join(f"{k}={v}" for k, v in rep.best.choice.items())
    if rep.ok:
        return Outcome(PASS, result=f"passing assignment {choice} ({rep.tried} tried)")
    residual = [f"no assignment passes; best ({choice}) fails {', '.join(rep.failing_axioms)}"]
    residual += rep.discrepancies[:20]
    return Outcome(FAIL, residual, result=f"{rep.tried} assignments tried")


def h_bc_lz(p, rng):
    opname = p.str("op", None, ("pair", "m", "n"))
    states = [s for s in p.str("states").split(";")]
    out = bc.bc_lz(opname, states, p.int("cutoff", 4))
    return Outcome(PASS, result=bc.format_vector(out))


def h_bc_verify_prop21(p, rng):
    rep = bc.bc_verify_prop21(p.int("cutoff", 4), p.int("pair_weight", 2),
                              p.int("triple_weight", 1))
    return Outcome(PASS if rep.ok else FAIL, rep.failures[:20],
                   result=f"{rep.pairs} pairs, {rep.triples} triples")


# --------------------------------------------------------------------------
# Table
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Entry:
    handler: object
    backends: tuple = ("symbolic",)
    takes_backend: bool = False


DISPATCH = {
    "ainfty.koszul_sign": Entry(h_koszul_sign),
    "ainfty.block_insert": Entry(h_block_insert),
    "ainfty.check_relations": Entry(h_check_relations),
    "ainfty.desuspend": Entry(h_desuspend),
    "ainfty.bar_square_residual": Entry(h_bar_square_residual),
    "ainfty.builtin_structure": Entry(h_builtin_structure),
    "polytopes.associahedron_faces": Entry(h_associahedron_faces),
    "polytopes.face_boundary": Entry(h_face_boundary),
    "polytopes.pentagon_P": Entry(h_pentagon_P),
    "polytopes.kn_domain": Entry(h_kn_domain),
    "polytopes.integrate": Entry(h_integrate),
    "polytopes.moduli_cell_count": Entry(h_moduli_cell_count),
    "weakcalc.build": Entry(h_build),
    "weakcalc.apply_Q": Entry(h_apply_Q),
    "weakcalc.normalize": Entry(h_normalize),
    "weakcalc.verify": Entry(h_verify, ("symbolic", "derham"), True),
    "weakcalc.boundary_expand": Entry(h_boundary_expand),
    "models.derham_apply": Entry(h_derham_apply, ("derham",)),
    "models.eval_op": Entry(h_eval_op, ("derham",)),
    "models.model_residual": Entry(h_model_residual, ("derham",)),
    "models.lz_model": Entry(h_lz_model, ("derham",)),
    "models.bc_axioms_check": Entry(h_bc_axioms_check, ("bc",)),
    "models.bc_lz": Entry(h_bc_lz, ("bc",)),
    "models.bc_verify_prop21": Entry(h_bc_verify_prop21, ("bc",)),
}

VERIFY_IDENTITIES = ("prop3.1", "lemma3.1", "prop3.2", "lemma3.2", "pentagon-stokes",
                     "prop3.3", "prop3.3-derivation")


def validate(check: Check) -> None:
    """Static checks run at parse time (unknown operations and identities)."""
    entry = DISPATCH.get(check.op)
    if entry is None:
        raise ValueError(f"unknown operation {check.op!r}")
    backend = check.backend or entry.backends[0]
    if backend not in entry.backends:
        raise ValueError(f"{check.op} does not run on backend {backend!r}")
    params = check.param_dict()
    identity = params.get("identity")
    if check.op == "weakcalc.verify":
        known = derham.IDENTITIES if backend == "derham" else VERIFY_IDENTITIES
        if identity not in known:
            raise ValueError(f"unknown identity {identity!r}")
    if check.op == "models.model_residual" and identity not in derham.IDENTITIES:
        raise ValueError(f"unknown identity {identity!r}")
    for key in ("structure", "name"):
        if check.module == "ainfty" and key in params and params[key] not in ainfty.BUILTINS:
            raise ValueError(f"unknown structure {params[key]!r}")


def run_check(check: Check, seed: int) -> dict:
    """Run one check; every failure mode becomes a status, never an exception."""
    rng = random.Random(f"{seed}:{check.id}")
    entry = DISPATCH.get(check.op)
    p = _Params(check.param_dict())
    backend = check.backend or (entry.backends[0] if entry else "symbolic")
    try:
        if entry is None:
            raise ValueError(f"unknown operation {check.op!r}")
        if entry.takes_backend:
            out = entry.handler(p, rng, backend)
        else:
            out = entry.handler(p, rng)
        unused = sorted(set(p.raw) - set(p.used))
        if unused:
            out = Outcome(FAIL, [f"unused parameters: {', '.join(unused)}"], out.params, out.result)
    except Degenerate as exc:
        out = Outcome(DEGENERATE, [str(exc)])
    except Exception as exc:  # backend failure is a failed check, not a crash
        out = Outcome(FAIL, [f"{type(exc).__name__}: {exc}"])
    params = dict(sorted({**p.used, **out.params}.items()))
    params["backend"] = backend
    return {
        "id": check.id,
        "op": check.op,
        "status": out.status,
        "residual": list(out.residual),
        "params": params,
        "result": out.result,
    }
