"""Symbolic calculus of nonlocal vertex operators in the weak sense."""
from __future__ import annotations

from fractions import Fraction

from ..polytopes import PentagonParams
from .moments import moments, weakly_zero
from .ops import (
    SIGNATURES,
    ExprSum,
    Op,
    Q,
    apply_Q,
    evaluate,
    extent,
    field,
    fields,
    make,
    q_boundary,
)
from .terms import (
    Affine,
    AmbiguousOrder,
    Combination,
    Domain,
    FieldSym,
    Regime,
    WeakCalcError,
    alternative_regimes,
    normalize,
)
from .verify import (
    IDENTITIES,
    VerifyReport,
    boundary_expand,
    derive_prop33,
    pentagon_edges_check,
    verify,
)

OPERATIONS = tuple(SIGNATURES) + ("mu", "nu")

# Operations exposed to the command line.
API = ("build", "apply_Q", "normalize", "verify", "boundary_expand")


class RegimeViolation(WeakCalcError):
    pass


def _check_params(opname: str, params: dict) -> None:
    numeric = {k: v for k, v in params.items() if v.is_constant()}
    if opname in ("pprime", "p", "o1", "o2") and len(numeric) == 6:
        bad = PentagonParams.from_mapping({k: v.const for k, v in numeric.items()}).violations()
        if bad:
            raise RegimeViolation("pentagon parameters violate: " + ", ".join(bad))
    if opname in ("n", "nprime", "mtilde"):
        first = next(iter(params.values()))
        if first.is_constant() and first.const == 0:
            raise RegimeViolation(f"{opname} needs a nonzero length")
    if opname in ("mu", "nu"):
        rho = params.get("rho")
        if rho is not None and rho.is_constant() and rho.const <= 0:
            raise RegimeViolation("rho must be positive")


def build(opname: str, args, params=None, at="t", regime: Regime | None = None) -> Combination:
    """Evaluate operation ``opname`` on ``args`` (fields or expressions) at ``at``.

    ``params`` maps parameter names to numbers or affine expressions; missing
    names default to the symbol of the same name.  Arguments may be
    :class:`Op` trees or :class:`FieldSym` values.
    """
    regime = regime or Regime()
    args = [Op("field", sym=a) if isinstance(a, FieldSym) else a for a in args]
    params = dict(params or {})
    if opname in ("mu", "nu"):
        names = ("rho",)
    elif opname in SIGNATURES:
        arity, names = SIGNATURES[opname]
        if len(args) != arity:
            raise WeakCalcError(f"{opname} takes {arity} arguments, got {len(args)}")
    else:
        raise WeakCalcError(f"unknown operation {opname!r}")
    unknown = set(params) - set(names)
    if unknown:
        raise WeakCalcError(f"unknown parameters for {opname}: {sorted(unknown)}")
    bound = {k: Affine.of(params.get(k, k)) if not isinstance(params.get(k, k), (int, Fraction))
             else Affine({}, params[k]) for k in names}
    _check_params(opname, bound)
    return evaluate(make(opname, args, tuple(bound[k] for k in names)), at, regime)


__all__ = [
    "API", "Affine", "AmbiguousOrder", "Combination", "Domain", "ExprSum", "FieldSym",
    "IDENTITIES", "OPERATIONS", "Op", "Q", "Regime", "RegimeViolation", "VerifyReport",
    "WeakCalcError", "alternative_regimes", "apply_Q", "boundary_expand", "build",
    "derive_prop33", "evaluate", "extent", "field", "fields", "make", "moments",
    "normalize", "pentagon_edges_check", "q_boundary", "verify", "weakly_zero",
]
