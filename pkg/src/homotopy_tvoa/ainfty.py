"""Graded spaces, sparse multilinear operations and A-infinity relation checks.

All coefficients are exact :class:`fractions.Fraction` values.  Tensors over
``V^{(x)k}`` are plain dicts mapping label tuples to coefficients.

Two sign conventions are carried for the relation

    sum_i (-1)^i  M_i o M_{n-i+1} = 0,   M_s = sum_l (-1)^{l(s+1)} 1^l (x) mu_s (x) 1^{m-s-l}

``"literal"`` uses the coefficient ``(-1)^{l(s+1)}`` verbatim.  ``"koszul"``
additionally multiplies by the Koszul sign ``(-1)^{|mu_s| (|a_1|+...+|a_l|)}``
picked up when ``mu_s`` passes the first ``l`` inputs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

CONVENTIONS = ("literal", "koszul")

Tensor = dict  # tuple[str, ...] -> Fraction


class AInfError(ValueError):
    pass


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _add_into(acc: dict, key, coeff) -> None:
    value = acc.get(key, 0) + coeff
    if value:
        acc[key] = value
    else:
        acc.pop(key, None)


# --------------------------------------------------------------------------
# Koszul signs
# --------------------------------------------------------------------------

def koszul_sign(degrees: Sequence[int], permutation: Sequence[int]) -> int:
    """Sign of reordering graded objects.

    ``permutation[k]`` is the index (into ``degrees``) of the object that ends
    up in position ``k``.  Every inversion between two odd objects costs -1.
    """
    if len(degrees) != len(permutation):
        raise AInfError(
            f"length mismatch: {len(degrees)} degrees, {len(permutation)} permutation entries"
        )
    if sorted(permutation) != list(range(len(degrees))):
        raise AInfError(f"not a permutation of 0..{len(degrees) - 1}: {list(permutation)}")
    odd = 0
    for i, j in itertools.combinations(range(len(permutation)), 2):
        p, q = permutation[i], permutation[j]
        if p > q and degrees[p] % 2 and degrees[q] % 2:
            odd += 1
    return _sign(odd)


# --------------------------------------------------------------------------
# Spaces, elements, operations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GradedSpace:
    degrees: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "degrees", dict(self.degrees))

    @property
    def labels(self) -> list[str]:
        return list(self.degrees)

    def degree(self, label: str) -> int:
        try:
            return self.degrees[label]
        except KeyError:
            raise AInfError(f"unknown basis label {label!r}") from None

    def tensor_degree(self, labels: Iterable[str]) -> int:
        return sum(self.degree(a) for a in labels)

    def basis_tensors(self, k: int):
        return itertools.product(self.labels, repeat=k)

    def shifted(self, by: int) -> "GradedSpace":
        return GradedSpace({a: d + by for a, d in self.degrees.items()})

    def __hash__(self):
        return hash(tuple(sorted(self.degrees.items())))


class Element:
    """Sparse linear combination of basis labels."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[str, object] | None = None):
        clean = {}
        for label, c in (coeffs or {}).items():
            c = Fraction(c)
            if c:
                clean[label] = c
        self._coeffs = clean

    @classmethod
    def basis(cls, label: str) -> "Element":
        return cls({label: 1})

    def items(self):
        return sorted(self._coeffs.items())

    def __iter__(self):
        return iter(sorted(self._coeffs))

    def __getitem__(self, label):
        return self._coeffs.get(label, Fraction(0))

    def __bool__(self):
        return bool(self._coeffs)

    def __len__(self):
        return len(self._coeffs)

    def __add__(self, other: "Element") -> "Element":
        acc = dict(self._coeffs)
        for a, c in other._coeffs.items():
            acc[a] = acc.get(a, 0) + c
        return Element(acc)

    def __neg__(self):
        return Element({a: -c for a, c in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "Element":
        k = Fraction(k)
        return Element({a: k * c for a, c in self._coeffs.items()})

    def __eq__(self, other):
        return isinstance(other, Element) and self._coeffs == other._coeffs

    def __hash__(self):
        return hash(tuple(self.items()))

    def __repr__(self):
        if not self._coeffs:
            return "0"
        return " + ".join(f"{c}*{a}" for a, c in self.items())


@dataclass(frozen=True)
class MultiOp:
    """Sparse multilinear map ``V^{(x)n} -> V`` of fixed degree.

    Entries not listed are zero.  Degree bookkeeping is checked on
    construction: every output label has degree ``sum(inputs) + degree``.
    """

    arity: int
    degree: int
    entries: Mapping[tuple, Element]
    space: GradedSpace

    def __post_init__(self):
        if self.arity < 1:
            raise AInfError("arity must be >= 1")
        clean = {}
        for inputs, out in self.entries.items():
            inputs = tuple(inputs)
            if len(inputs) != self.arity:
                raise AInfError(f"entry {inputs} has wrong arity for mu{self.arity}")
            if not isinstance(out, Element):
                out = Element(out)
            if not out:
                continue
            expected = self.space.tensor_degree(inputs) + self.degree
            for label in out:
                if self.space.degree(label) != expected:
                    raise AInfError(
                        f"mu{self.arity}{inputs} -> {label}: degree {self.space.degree(label)},"
                        f" expected {expected}"
                    )
            clean[inputs] = out
        object.__setattr__(self, "entries", clean)

    def __call__(self, *inputs: str) -> Element:
        return self.entries.get(tuple(inputs), Element())


@dataclass(frozen=True)
class AInfStructure:
    """A graded space with operations ``mu_n`` (``mu_1`` plays the role of Q).

    ``shifted`` marks a desuspended structure, in which every operation has
    degree 1 instead of ``2 - n``.
    """

    space: GradedSpace
    ops: Mapping[int, MultiOp]
    convention: str = "koszul"
    shifted: bool = False
    name: str = ""

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise AInfError(f"unknown sign convention {self.convention!r}")
        object.__setattr__(self, "ops", dict(sorted(self.ops.items())))
        for n, op in self.ops.items():
            if op.arity != n:
                raise AInfError(f"operation stored under {n} has arity {op.arity}")
            want = 1 if self.shifted else 2 - n
            if op.degree != want:
                raise AInfError(f"mu{n} must have degree {want}, got {op.degree}")

    @property
    def n_max(self) -> int:
        return max(self.ops, default=1)

    def op(self, n: int) -> MultiOp | None:
        return self.ops.get(n)

    def with_convention(self, convention: str) -> "AInfStructure":
        return AInfStructure(self.space, self.ops, convention, self.shifted, self.name)


# --------------------------------------------------------------------------
# Block insertion and relation checks
# --------------------------------------------------------------------------

def block_coefficient(s: int, l: int, passed_degree: int, op_degree: int, convention: str) -> int:
    """Coefficient of ``1^l (x) mu_s (x) 1^k`` acting on a basis tensor.

    ``passed_degree`` is the total degree of the first ``l`` inputs.
    """
    sign = _sign(l * (s + 1))
    if convention == "koszul":
        sign *= _sign(op_degree * passed_degree)
    return sign


def block_insert(mu: MultiOp, l: int, m: int, convention: str = "literal") -> dict:
    """The single summand ``1^l (x) mu (x) 1^{m-s-l}`` as a map on basis tensors.

    Returns a dict from input ``m``-tuples to output tensors of length
    ``m - s + 1`` (only nonzero images are listed).
    """
    s = mu.arity
    if not 0 <= l <= m - s:
        raise AInfError(f"l={l} out of range 0..{m - s} for mu{s} on V^(x){m}")
    result = {}
    for tup in mu.space.basis_tensors(m):
        image = _apply_block(mu, l, tup, convention)
        if image:
            result[tup] = image
    return result


def _apply_block(mu: MultiOp, l: int, tup: tuple, convention: str) -> dict:
    s = mu.arity
    out = mu(*tup[l:l + s])
    if not out:
        return {}
    coeff = block_coefficient(s, l, mu.space.tensor_degree(tup[:l]), mu.degree, convention)
    head, tail = tup[:l], tup[l + s:]
    return {head + (a,) + tail: coeff * c for a, c in out.items()}


def apply_M(A: AInfStructure, s: int, tensor: Tensor, convention: str | None = None) -> Tensor:
    """``M_s`` applied to a tensor of uniform length ``m >= s``."""
    convention = convention or A.convention
    mu = A.op(s)
    acc: dict = {}
    if mu is None:
        return acc
    for tup, c in tensor.items():
        for l in range(len(tup) - s + 1):
            for key, v in _apply_block(mu, l, tup, convention).items():
                _add_into(acc, key, c * v)
    return acc


@dataclass
class ResidualReport:
    """Outcome of a relation check: offending basis tuples and their residuals."""

    kind: str
    n: int
    convention: str
    residuals: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.residuals

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "convention": self.convention,
            "ok": self.ok,
            "residuals": [
                {"input": list(k), "residual": {"/".join(o) if isinstance(o, tuple) else o: str(c)
                                                for o, c in v.items()}}
                for k, v in sorted(self.residuals.items())
            ],
        }


def relation_value(A: AInfStructure, inputs: tuple, convention: str | None = None) -> Element:
    """Left-hand side of the n-th relation on one basis tuple, ``n = len(inputs)``."""
    convention = convention or A.convention
    n = len(inputs)
    total: dict = {}
    # i runs to n so that M_n o M_1 (the terms with Q on an input) is present;
    # without it the n=2 relation cannot express the Leibniz rule.
    for i in range(1, n + 1):
        inner = apply_M(A, n - i + 1, {inputs: Fraction(1)}, convention)
        if not inner:
            continue
        outer = apply_M(A, i, inner, convention)
        for key, c in outer.items():
            _add_into(total, key[0], _sign(i) * c)
    return Element(total)


def check_relations(A: AInfStructure, n: int, convention: str | None = None) -> ResidualReport:
    if n < 2:
        raise AInfError("relations are indexed by n >= 2")
    convention = convention or A.convention
    report = ResidualReport("relation", n, convention)
    for tup in A.space.basis_tensors(n):
        value = relation_value(A, tup, convention)
        if value:
            report.residuals[tup] = value
    return report


# --------------------------------------------------------------------------
# Desuspension and the bar differential
# --------------------------------------------------------------------------

def desuspension_exponent(degrees: Sequence[int]) -> int:
    """``(1-n)|a_1| + (2-n)|a_2| + ... + |a_{n-1}|`` for inputs of the given degrees."""
    n = len(degrees)
    return sum((j - n) * d for j, d in enumerate(degrees, start=1))


def desuspend(A: AInfStructure) -> AInfStructure:
    """Degree-1 operations on the shifted space ``|s^-1 a| = |a| - 1``.

    Basis labels are kept; only degrees move.  Each entry picks up the sign
    ``(-1)^{s(a)}`` computed from the unshifted input degrees.
    """
    if A.shifted:
        raise AInfError("structure is already desuspended")
    shifted_space = A.space.shifted(-1)
    ops = {}
    for n, op in A.ops.items():
        entries = {}
        for inputs, out in op.entries.items():
            e = desuspension_exponent([A.space.degree(a) for a in inputs])
            entries[inputs] = out.scale(_sign(e))
        ops[n] = MultiOp(n, 1, entries, shifted_space)
    return AInfStructure(shifted_space, ops, "koszul", shifted=True, name=A.name + "~")


def bar_differential(B: AInfStructure, tensor: Tensor) -> Tensor:
    """``d = sum_s M~_s`` on a tensor of mixed lengths (Koszul signs, no extra factors)."""
    if not B.shifted:
        raise AInfError("bar differential needs a desuspended structure")
    acc: dict = {}
    for tup, c in tensor.items():
        for s, mu in B.ops.items():
            for l in range(len(tup) - s + 1):
                out = mu(*tup[l:l + s])
                if not out:
                    continue
                sign = _sign(B.space.tensor_degree(tup[:l]))
                head, tail = tup[:l], tup[l + s:]
                for a, v in out.items():
                    _add_into(acc, head + (a,) + tail, sign * c * v)
    return acc


def bar_square_residual(A: AInfStructure, N: int) -> ResidualReport:
    if N < 1:
        raise AInfError("N must be >= 1")
    B = A if A.shifted else desuspend(A)
    report = ResidualReport("bar-square", N, "koszul")
    for k in range(1, N + 1):
        for tup in B.space.basis_tensors(k):
            sq = bar_differential(B, bar_differential(B, {tup: Fraction(1)}))
            if sq:
                report.residuals[tup] = sq
    return report


# --------------------------------------------------------------------------
# Fixtures and text format
# --------------------------------------------------------------------------

def _structure(name, degrees, table, convention="koszul") -> AInfStructure:
    space = GradedSpace(degrees)
    ops = {}
    for n, entries in table.items():
        ops[n] = MultiOp(n, 2 - n, {k: Element(v) for k, v in entries.items()}, space)
    return AInfStructure(space, ops, convention, name=name)


def builtin_structure(name: str) -> AInfStructure:
    if name == "dga-lambda":
        # theta sits in degree -1 so that Q(theta) = 1 raises degree by one.
        return _structure(
            name,
            {"1": 0, "theta": -1},
            {
                1: {("theta",): {"1": 1}},
                2: {
                    ("1", "1"): {"1": 1},
                    ("1", "theta"): {"theta": 1},
                    ("theta", "1"): {"theta": 1},
                },
            },
        )
    if name == "mu3-only":
        return _structure(name, {"a": 1, "b": 2}, {3: {("a", "a", "a"): {"b": 1}}})
    if name == "nonassoc-counterexample":
        return _structure(
            name,
            {"e": 0, "f": 0},
            {2: {("e", "e"): {"f": 1}, ("f", "e"): {"e": 1}}},
        )
    raise AInfError(f"unknown builtin structure {name!r}")


BUILTINS = ("dga-lambda", "mu3-only", "nonassoc-counterexample")

# Operations exposed to the command line.
API = ("koszul_sign", "block_insert", "check_relations", "desuspend",
       "bar_square_residual", "builtin_structure")


def dumps(A: AInfStructure) -> str:
    lines = [f"# {A.name}" if A.name else "# structure", f"convention {A.convention}"]
    if A.shifted:
        lines.append("shifted")
    for label, d in A.space.degrees.items():
        lines.append(f"degree {label} {d}")
    for n, op in A.ops.items():
        for inputs, out in sorted(op.entries.items()):
            rhs = " ".join(f"{a}:{c.numerator}/{c.denominator}" for a, c in out.items())
            lines.append(f"mu{n}: {','.join(inputs)} -> {rhs}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> AInfStructure:
    degrees: dict = {}
    raw: dict = {}
    convention, shifted, name = "koszul", False, ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if lineno == 1:
                name = stripped[1:].strip()
            continue
        head, _, rest = stripped.partition(" ")
        try:
            if head == "convention":
                convention = rest.strip()
            elif head == "shifted":
                shifted = True
            elif head == "degree":
                label, d = rest.split()
                degrees[label] = int(d)
            elif stripped.startswith("mu"):
                lhs, rhs = stripped.split("->")
                arity_s, inputs_s = lhs.split(":")
                n = int(arity_s.strip()[2:])
                inputs = tuple(x.strip() for x in inputs_s.split(","))
                out = {}
                for tok in rhs.split():
                    label, coeff = tok.rsplit(":", 1)
                    out[label] = Fraction(coeff)
                raw.setdefault(n, {})[inputs] = out
            else:
                raise ValueError(f"unrecognised directive {head!r}")
        except ValueError as exc:
            raise AInfError(f"line {lineno}: {exc}") from None
    space = GradedSpace(degrees)
    ops = {
        n: MultiOp(n, 1 if shifted else 2 - n, {k: Element(v) for k, v in entries.items()}, space)
        for n, entries in raw.items()
    }
    return AInfStructure(space, ops, convention, shifted, name)
