"""Small exact linear algebra over Fractions (dimensions here never exceed ~8)."""
from __future__ import annotations

from fractions import Fraction


def rank(rows) -> int:
    return len(_echelon([list(map(Fraction, r)) for r in rows])[1])


def _echelon(m):
    m = [row[:] for row in m]
    pivots = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def det(m) -> Fraction:
    m = [list(map(Fraction, row)) for row in m]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] / m[c][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return d


def solve(a, b):
    """Unique solution of the square system ``a x = b`` or None if singular."""
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(v)] for row, v in zip(a, b)]
    red, pivots = _echelon(aug)
    if pivots != list(range(n)):
        return None
    return [red[i][n] for i in range(n)]


def coordinates(basis, vec):
    """Coefficients of ``vec`` in the (column) ``basis``; None if not in the span."""
    d = len(basis)
    dim = len(vec)
    aug = [[Fraction(basis[j][i]) for j in range(d)] + [Fraction(vec[i])] for i in range(dim)]
    red, pivots = _echelon(aug)
    if d in pivots or len(pivots) != d:
        return None
    return [red[i][d] for i in range(d)]
