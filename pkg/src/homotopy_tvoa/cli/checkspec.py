"""Line-oriented check specifications.

Grammar (one check per line, ``#`` starts a comment)::

    check <id>: <module>.<name> [param] [key=value ...] [backend <name>]

Values are kept as strings; anything that looks numeric must be an exact
rational (``3``, ``-1/10``).  Errors carry 1-based line and column.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

BACKENDS = ("symbolic", "derham", "bc")
_ID = re.compile(r"[A-Za-z0-9_.\-]+$")
# values that look like a number or a fraction must parse as one
_NUMERIC = re.compile(r"[-+]?\d+(/.*)?")


class CheckSpecError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Check:
    id: str
    module: str
    name: str
    params: tuple = ()
    backend: str | None = None
    line: int = 0

    @property
    def op(self) -> str:
        return f"{self.module}.{self.name}"

    def param_dict(self) -> dict:
        return dict(self.params)


@dataclass
class CheckSpec:
    checks: list = field(default_factory=list)

    def __len__(self):
        return len(self.checks)

    def ids(self) -> list:
        return [c.id for c in self.checks]


def parse_rational(text: str) -> Fraction:
    if not re.fullmatch(r"[-+]?\d+(/\d+)?", text):
        raise ValueError(f"malformed rational {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ValueError(f"zero denominator in {text!r}") from None


def _tokens(line: str):
    """Whitespace-separated tokens with their 1-based start columns."""
    for mt in re.finditer(r"\S+", line):
        yield mt.group(0), mt.start() + 1


def parse_checkspec(text: str, validate=None) -> CheckSpec:
    """Parse a check specification.

    ``validate(check)`` may raise ``ValueError`` to reject a check (for
    instance an unknown operation or identity); the message is reported at
    the check's line.
    """
    spec = CheckSpec()
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        toks = list(_tokens(line))
        word, col = toks[0]
        if word != "check":
            raise CheckSpecError(f"expected 'check', found {word!r}", lineno, col)
        if len(toks) < 3:
            raise CheckSpecError("expected 'check <id>: <module>.<name>'", lineno, len(line) + 1)
        ident, col = toks[1]
        if not ident.endswith(":"):
            raise CheckSpecError("expected ':' after the check id", lineno, col + len(ident))
        ident = ident[:-1]
        if not ident or not _ID.match(ident):
            raise CheckSpecError(f"invalid check id {ident!r}", lineno, col)
        if ident in seen:
            raise CheckSpecError(f"duplicate id {ident!r} (first on line {seen[ident]})", lineno, col)
        target, col = toks[2]
        if "." not in target:
            raise CheckSpecError(f"expected <module>.<name>, found {target!r}", lineno, col)
        module, name = target.split(".", 1)
        params = []
        keys = set()
        backend = None
        rest = toks[3:]
        i = 0
        while i < len(rest):
            tok, col = rest[i]
            if tok == "param":
                i += 1
                continue
            if tok == "backend":
                if i + 1 >= len(rest):
                    raise CheckSpecError("expected a backend name", lineno, col + len(tok) + 1)
                backend, bcol = rest[i + 1]
                if backend not in BACKENDS:
                    raise CheckSpecError(f"unknown backend {backend!r}", lineno, bcol)
                i += 2
                continue
            if "=" not in tok:
                raise CheckSpecError(f"expected key=value, found {tok!r}", lineno, col)
            key, value = tok.split("=", 1)
            if not key or not value:
                raise CheckSpecError(f"empty key or value in {tok!r}", lineno, col)
            if key in keys:
                raise CheckSpecError(f"repeated parameter {key!r}", lineno, col)
            if _NUMERIC.fullmatch(value) and not any(ch in value for ch in ",;|["):
                try:
                    parse_rational(value)
                except ValueError:
                    raise CheckSpecError(f"malformed rational {value!r}", lineno,
                                         col + len(key) + 1) from None
            keys.add(key)
            params.append((key, value))
            i += 1
        check = Check(ident, module, name, tuple(params), backend, lineno)
        if validate is not None:
            try:
                validate(check)
            except ValueError as exc:
                raise CheckSpecError(str(exc), lineno, toks[2][1]) from None
        seen[ident] = lineno
        spec.checks.append(check)
    return spec


def format_check(check: Check) -> str:
    parts = [f"check {check.id}: {check.op}"]
    parts += [f"{k}={v}" for k, v in check.params]
    if check.backend:
        parts += ["backend", check.backend]
    return " ".join(parts)
