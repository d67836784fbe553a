"""Associahedra, the pentagon domain, exact H-polytopes and polynomial integration.

Faces of ``K_n`` are planar rooted trees with ``n`` leaves, stored as the set
of their nontrivial brackets: intervals ``(i, j)`` of consecutive leaves with
``2 <= j - i + 1 <= n - 1``.  A face with ``k`` brackets has dimension
``n - 2 - k``; binary trees (``n - 2`` brackets) are the vertices.

Geometry uses a Loday-type realization transported into position space:
points ``rho = t_1 > t_2 > ... > t_n = 0`` with facet inequalities
``t_i - t_j >= rho * C(j-i+1, 2) / C(n, 2)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from sympy import QQ
from sympy.polys.rings import PolyElement, ring

from . import linalg

MAX_N = 10


class PolytopeError(ValueError):
    pass


class DegeneratePolytope(PolytopeError):
    pass


# --------------------------------------------------------------------------
# Planar trees and the face lattice
# --------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class PlanarTree:
    n: int
    brackets: frozenset

    @property
    def dim(self) -> int:
        return self.n - 2 - len(self.brackets)

    @property
    def is_binary(self) -> bool:
        return self.dim == 0

    def sort_key(self):
        return (self.dim, tuple(sorted(self.brackets)))

    def __str__(self) -> str:
        opens = {i: 0 for i in range(1, self.n + 1)}
        closes = dict(opens)
        for i, j in self.brackets:
            opens[i] += 1
            closes[j] += 1
        parts = []
        for leaf in range(1, self.n + 1):
            parts.append("(" * opens[leaf] + str(leaf) + ")" * closes[leaf])
        return "(" + " ".join(parts) + ")"


def corolla(n: int) -> PlanarTree:
    return PlanarTree(n, frozenset())


def compatible(b1: tuple, b2: tuple) -> bool:
    (i, j), (k, l) = b1, b2
    return j < k or l < i or (i <= k and l <= j) or (k <= i and j <= l)


@lru_cache(maxsize=None)
def _subtrees(size: int) -> tuple:
    """All bracket sets (relative to leaf 1, root bracket excluded) of trees on ``size`` leaves."""
    if size == 1:
        return (frozenset(),)
    out = []
    for cuts in _compositions(size):
        if len(cuts) < 2:
            continue
        choices = []
        start = 1
        for block in cuts:
            if block == 1:
                choices.append([frozenset()])
            else:
                inner = [
                    frozenset((i + start - 1, j + start - 1) for i, j in t) | {(start, start + block - 1)}
                    for t in _subtrees(block)
                ]
                choices.append(inner)
            start += block
        for combo in itertools.product(*choices):
            out.append(frozenset().union(*combo))
    return tuple(out)


def _compositions(n: int):
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def _check_n(n: int, lo: int = 2):
    if not lo <= n <= MAX_N:
        raise PolytopeError(f"n={n} outside supported range {lo}..{MAX_N}")


@dataclass(frozen=True)
class FaceLattice:
    n: int
    faces: tuple  # PlanarTree, sorted by (dim, brackets)

    @property
    def top(self) -> PlanarTree:
        return corolla(self.n)

    def by_dim(self, d: int) -> list:
        return [f for f in self.faces if f.dim == d]

    @property
    def vertices(self) -> list:
        return self.by_dim(0)

    @property
    def facets(self) -> list:
        return self.by_dim(self.n - 3) if self.n >= 3 else []

    def f_vector(self) -> list:
        counts = [0] * (self.n - 1)
        for f in self.faces:
            counts[f.dim] += 1
        return counts

    def incidence(self, face: PlanarTree) -> list:
        """Codimension-one subfaces of ``face`` (single bracket insertions)."""
        return [
            PlanarTree(self.n, face.brackets | {b})
            for b in _insertable(self.n, face.brackets)
        ]

    def boundary_euler_characteristic(self) -> int:
        return sum((-1) ** f.dim for f in self.faces if f.dim < self.n - 2)


def _all_brackets(n: int):
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if j - i + 1 < n]


def _insertable(n: int, brackets) -> list:
    return [
        b for b in _all_brackets(n)
        if b not in brackets and all(compatible(b, c) for c in brackets)
    ]


def associahedron_faces(n: int) -> FaceLattice:
    _check_n(n)
    faces = [PlanarTree(n, b) for b in _subtrees(n)]
    faces.sort(key=PlanarTree.sort_key)
    return FaceLattice(n, tuple(faces))


def binary_trees(n: int) -> list:
    return [PlanarTree(n, b) for b in _subtrees(n) if len(b) == n - 2] if n >= 2 else []


# --------------------------------------------------------------------------
# Realization in position space and oriented boundaries
# --------------------------------------------------------------------------

def facet_gap(n: int, bracket: tuple, rho=Fraction(1)) -> Fraction:
    i, j = bracket
    size = j - i + 1
    return Fraction(rho) * Fraction(size * (size - 1), n * (n - 1))


def loday_point(tree: PlanarTree, rho=Fraction(1)) -> tuple:
    """Positions ``(t_2, ..., t_{n-1})`` of a binary tree's vertex."""
    if not tree.is_binary:
        raise PolytopeError("only binary trees are vertices")
    n = tree.n
    brackets = set(tree.brackets) | {(1, n)}
    gaps = []
    for g in range(1, n):
        a, b = min(
            (br for br in brackets if br[0] <= g and g + 1 <= br[1]),
            key=lambda br: br[1] - br[0],
        )
        gaps.append((g - a + 1) * (b - g))
    scale = Fraction(rho) / Fraction(n * (n - 1), 2)
    # t_k = sum of gaps k..n-1
    ts = []
    for k in range(2, n):
        ts.append(scale * sum(gaps[k - 1:]))
    return tuple(ts)


@dataclass
class _Geometry:
    n: int
    points: dict  # vertex tree -> point

    def face_vertices(self, face: PlanarTree) -> list:
        return sorted(p for t, p in self.points.items() if face.brackets <= t.brackets)


@lru_cache(maxsize=None)
def _geometry(n: int) -> _Geometry:
    return _Geometry(n, {t: loday_point(t) for t in binary_trees(n)})


def _centroid(points):
    k = len(points)
    return tuple(sum(c) / k for c in zip(*points))


@lru_cache(maxsize=None)
def _orientation_basis(face: PlanarTree) -> tuple:
    """Canonical ordered basis of the direction space of a face.

    The top face uses the coordinate basis ``dt_2, ..., dt_{n-1}``; lower faces
    take differences from the lexicographically first vertex, greedily.
    """
    n = face.n
    if face.dim == n - 2:
        return tuple(tuple(Fraction(int(i == k)) for i in range(n - 2)) for k in range(n - 2))
    verts = _geometry(n).face_vertices(face)
    v0 = verts[0]
    basis = []
    for v in verts[1:]:
        cand = tuple(a - b for a, b in zip(v, v0))
        if linalg.rank(basis + [cand]) > len(basis):
            basis.append(cand)
        if len(basis) == face.dim:
            break
    return tuple(basis)


def face_boundary(face: PlanarTree) -> list:
    """Oriented codimension-one faces of ``face`` as ``(sign, subface)`` pairs.

    Orientation is induced from the realization: ``[F : G]`` is the sign of the
    basis (outward vector, basis(G)) relative to basis(F).  Any such geometric
    choice satisfies the boundary-squared identity.
    """
    if face.dim < 1:
        raise PolytopeError("vertices have empty boundary")
    _check_n(face.n, 3)
    geo = _geometry(face.n)
    basis_f = _orientation_basis(face)
    centre_f = _centroid(geo.face_vertices(face))
    out = []
    for b in sorted(_insertable(face.n, face.brackets)):
        sub = PlanarTree(face.n, face.brackets | {b})
        centre_g = _centroid(geo.face_vertices(sub))
        outward = tuple(a - c for a, c in zip(centre_g, centre_f))
        frame = [outward] + list(_orientation_basis(sub))
        coords = [linalg.coordinates(basis_f, v) for v in frame]
        d = linalg.det([list(col) for col in zip(*coords)])
        if d == 0:
            raise PolytopeError(f"degenerate orientation for {sub}")
        out.append((1 if d > 0 else -1, sub))
    return out


def boundary_squared(face: PlanarTree) -> dict:
    """Coefficients of the double boundary; all zero when orientations are coherent."""
    acc: dict = {}
    for s1, g in face_boundary(face):
        if g.dim == 0:
            continue
        for s2, h in face_boundary(g):
            acc[h] = acc.get(h, 0) + s1 * s2
    return {h: c for h, c in acc.items() if c}


def moduli_cell_count(n: int) -> int:
    if n < 3:
        raise PolytopeError("n must be >= 3")
    return math.factorial(n) // 2


def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


# --------------------------------------------------------------------------
# H-polytopes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HPolytope:
    """``{x : a . x <= b for (a, b) in inequalities}`` with exact coefficients."""

    variables: tuple
    inequalities: tuple

    def __post_init__(self):
        d = len(self.variables)
        ineqs = []
        for a, b in self.inequalities:
            a = tuple(Fraction(v) for v in a)
            if len(a) != d:
                raise PolytopeError("inequality arity does not match variables")
            ineqs.append((a, Fraction(b)))
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "inequalities", tuple(ineqs))

    @property
    def dim(self) -> int:
        return len(self.variables)

    def contains(self, point, strict=False) -> bool:
        for a, b in self.inequalities:
            v = sum(x * y for x, y in zip(a, point))
            if v > b or (strict and v == b):
                return False
        return True

    def vertices(self) -> list:
        d = self.dim
        found = set()
        for combo in itertools.combinations(self.inequalities, d):
            sol = linalg.solve([a for a, _ in combo], [b for _, b in combo])
            if sol is not None and self.contains(sol):
                found.add(tuple(sol))
        return sorted(found)

    def is_bounded(self) -> bool:
        d = self.dim
        box = [
            (tuple(Fraction(int(i == k)) * s for i in range(d)), Fraction(1))
            for k in range(d) for s in (1, -1)
        ]
        cone = HPolytope(self.variables, tuple((a, 0) for a, _ in self.inequalities) + tuple(box))
        return all(all(c == 0 for c in v) for v in cone.vertices())

    def affine_dim(self, points=None) -> int:
        pts = self.vertices() if points is None else points
        if not pts:
            return -1
        return linalg.rank([[a - b for a, b in zip(p, pts[0])] for p in pts[1:]] or [[0] * self.dim])

    def is_full_dimensional(self) -> bool:
        return self.affine_dim() == self.dim

    def edges(self) -> list:
        """Pairs of vertex indices spanning one-dimensional faces."""
        verts = self.vertices()
        tight = self._tight_sets(verts)
        out = set()
        for i, j in itertools.combinations(range(len(verts)), 2):
            common = [a for a, t in zip(self.inequalities, tight) if i in t and j in t]
            if common and linalg.rank([a for a, _ in common]) == self.dim - 1:
                out.add((i, j))
        return sorted(out)

    def _tight_sets(self, verts):
        return [
            frozenset(k for k, v in enumerate(verts) if sum(x * y for x, y in zip(a, v)) == b)
            for a, b in self.inequalities
        ]

    def triangulation(self) -> tuple:
        """Deterministic pulling triangulation from the lexicographically first vertex.

        Returns ``(vertices, simplices)`` with simplices as index lists.
        """
        if not self.is_bounded():
            raise PolytopeError("cannot triangulate an unbounded polytope")
        verts = self.vertices()
        if self.affine_dim(verts) != self.dim:
            raise DegeneratePolytope("polytope is not full-dimensional")
        tight = self._tight_sets(verts)

        def aff(points):
            pts = sorted(points)
            p0 = verts[pts[0]]
            rows = [[a - b for a, b in zip(verts[p], p0)] for p in pts[1:]]
            return linalg.rank(rows) if rows else 0

        def tri(points: frozenset, dim: int):
            v0 = min(points)
            if dim == 0:
                return [[v0]]
            facets = set()
            for t in tight:
                f = t & points
                if f != points and v0 not in f and len(f) >= dim and aff(f) == dim - 1:
                    facets.add(f)
            out = []
            for f in sorted(facets, key=sorted):
                out.extend([v0] + s for s in tri(f, dim - 1))
            return out

        return verts, tri(frozenset(range(len(verts))), self.dim)

    def volume(self) -> Fraction:
        verts, simplices = self.triangulation()
        total = Fraction(0)
        for s in simplices:
            total += abs(_simplex_det(verts, s)) / math.factorial(self.dim)
        return total

    def polygon(self) -> list:
        """Vertices of a two-dimensional polytope in cyclic order."""
        if self.dim != 2:
            raise PolytopeError("polygon() needs a two-dimensional polytope")
        verts = self.vertices()
        return [verts[i] for i in _cyclic_order(verts, list(range(len(verts))))]

    def vertex_text(self) -> str:
        lines = [" ".join(self.variables)]
        for v in self.vertices():
            lines.append(" ".join(f"{c.numerator}/{c.denominator}" for c in v))
        return "\n".join(lines) + "\n"

    def to_off(self) -> str:
        """OFF mesh (decimal coordinates, padded to 3D) for plotting; dimension <= 3."""
        if self.dim > 3:
            raise PolytopeError("OFF export supports dimension <= 3")
        verts = self.vertices()
        faces = self._polygons(verts)
        lines = ["OFF", f"{len(verts)} {len(faces)} 0"]
        for v in verts:
            coords = [float(c) for c in v] + [0.0] * (3 - self.dim)
            lines.append(" ".join(f"{c:.12g}" for c in coords))
        for f in faces:
            lines.append(" ".join(str(x) for x in [len(f)] + f))
        return "\n".join(lines) + "\n"

    def _polygons(self, verts):
        if self.dim <= 1:
            return [list(range(len(verts)))]
        if self.dim == 2:
            return [_cyclic_order(verts, list(range(len(verts))))]
        tight = self._tight_sets(verts)
        polys = []
        seen = set()
        for t in tight:
            if len(t) >= 3 and t not in seen:
                pts = [verts[i] for i in sorted(t)]
                if linalg.rank([[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]) == 2:
                    seen.add(t)
                    polys.append(_cyclic_order(verts, sorted(t)))
        return polys


def _cyclic_order(verts, idx):
    import numpy as np

    pts = np.array([[float(c) for c in verts[i]] for i in idx])
    centre = pts.mean(axis=0)
    rel = pts - centre
    if pts.shape[1] == 1:
        return idx
    if pts.shape[1] == 2:
        u, w = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    else:
        u = rel[0] / np.linalg.norm(rel[0])
        normal = next(np.cross(rel[0], r) for r in rel[1:] if np.linalg.norm(np.cross(rel[0], r)) > 1e-12)
        w = np.cross(normal / np.linalg.norm(normal), u)
    angles = np.arctan2(rel @ w, rel @ u)
    return [idx[k] for k in np.argsort(angles, kind="stable")]


def _simplex_det(verts, simplex) -> Fraction:
    v0 = verts[simplex[0]]
    cols = [[a - b for a, b in zip(verts[i], v0)] for i in simplex[1:]]
    return linalg.det([list(r) for r in zip(*cols)])


# --------------------------------------------------------------------------
# Named polytopes
# --------------------------------------------------------------------------

PENTAGON_PARAMS = ("xi", "alpha1", "alpha2", "eps1", "eps2", "rho")


@dataclass(frozen=True)
class PentagonParams:
    xi: Fraction
    alpha1: Fraction
    alpha2: Fraction
    eps1: Fraction
    eps2: Fraction
    rho: Fraction

    def __post_init__(self):
        for name in PENTAGON_PARAMS:
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    @classmethod
    def from_mapping(cls, m) -> "PentagonParams":
        return cls(**{k: Fraction(m[k]) for k in PENTAGON_PARAMS})

    def violations(self) -> list:
        """Regime conditions that fail; empty means the pentagon is nondegenerate."""
        bad = []
        for name in PENTAGON_PARAMS:
            if getattr(self, name) <= 0:
                bad.append(f"{name} > 0")
        small = {"xi": self.xi, "eps1": self.eps1, "alpha1": self.alpha1}
        mid = {"eps2": self.eps2, "alpha2": self.alpha2}
        for sn, sv in small.items():
            for mn, mv in mid.items():
                if not sv < mv:
                    bad.append(f"{sn} < {mn}")
        for mn, mv in mid.items():
            if not mv < self.rho:
                bad.append(f"{mn} < rho")
        exact = [
            (self.xi < self.eps2 - self.eps1, "xi < eps2 - eps1"),
            (self.xi < self.alpha2 - self.alpha1, "xi < alpha2 - alpha1"),
            (self.eps2 + self.alpha1 < self.rho, "eps2 + alpha1 < rho"),
            (self.eps1 + self.alpha2 < self.rho, "eps1 + alpha2 < rho"),
            (self.eps2 + self.alpha2 < self.rho + self.xi, "eps2 + alpha2 < rho + xi"),
        ]
        bad.extend(msg for ok, msg in exact if not ok)
        return bad


def pentagon_P(p: PentagonParams, check: bool = True) -> HPolytope:
    """``eps2 <= x <= rho - alpha1``, ``eps1 <= y <= rho - alpha2``, ``x - y >= xi``.

    ``x`` is the insertion point of the second argument, ``y`` of the third.
    """
    if check:
        bad = p.violations()
        if bad:
            raise DegeneratePolytope("pentagon regime violated: " + ", ".join(bad))
    return HPolytope(
        ("x", "y"),
        (
            ((-1, 0), -p.eps2),
            ((1, 0), p.rho - p.alpha1),
            ((0, -1), -p.eps1),
            ((0, 1), p.rho - p.alpha2),
            ((-1, 1), -p.xi),
        ),
    )


@dataclass(frozen=True)
class KnDomain:
    n: int
    rho: Fraction
    simplex: HPolytope
    realization: HPolytope
    facet_brackets: tuple  # bracket per realization inequality

    def vertex_points(self) -> dict:
        return {t: loday_point(t, self.rho) for t in binary_trees(self.n)}


def kn_domain(n: int, rho=Fraction(1)) -> KnDomain:
    """Order simplex ``rho > t_2 > ... > t_{n-1} > 0`` and a realization of ``K_n`` inside it."""
    if n < 3:
        raise PolytopeError("n must be >= 3")
    _check_n(n, 3)
    rho = Fraction(rho)
    if rho <= 0:
        raise PolytopeError("rho must be positive")
    names = tuple(f"t{k}" for k in range(2, n))
    d = n - 2

    def diff(i, j):
        # coefficients of t_i - t_j restricted to the free variables, plus constant part
        a = [Fraction(0)] * d
        const = Fraction(0)
        for k, s in ((i, 1), (j, -1)):
            if k == 1:
                const += s * rho
            elif k == n:
                pass
            else:
                a[k - 2] += s
        return a, const

    simplex = []
    for k in range(1, n):
        a, const = diff(k, k + 1)  # t_k - t_{k+1} >= 0
        simplex.append((tuple(-x for x in a), const))
    real, brackets = [], []
    for br in _all_brackets(n):
        i, j = br
        a, const = diff(i, j)
        real.append((tuple(-x for x in a), const - facet_gap(n, br, rho)))
        brackets.append(br)
    return KnDomain(n, rho, HPolytope(names, tuple(simplex)), HPolytope(names, tuple(real)), tuple(brackets))


# --------------------------------------------------------------------------
# Exact integration of polynomials
# --------------------------------------------------------------------------

def to_fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def to_qq(c):
    c = Fraction(c)
    return QQ(c.numerator, c.denominator)


def poly_ring(names: Sequence[str]):
    R, *gens = ring(",".join(names), QQ)
    return R, gens


@lru_cache(maxsize=None)
def _lambda_ring(symbols: tuple, d: int):
    names = [str(s) for s in symbols] + [f"_lam{i}" for i in range(d)]
    R2, *gens = ring(",".join(names), QQ)
    return R2, gens


def integrate_simplex(R, f: PolyElement, var_idx: Sequence[int], simplex_pts) -> PolyElement:
    """Integral of ``f`` over a d-simplex in the variables at ``var_idx``."""
    d = len(var_idx)
    v0 = simplex_pts[0]
    cols = [[a - b for a, b in zip(v, v0)] for v in simplex_pts[1:]]
    jac = abs(linalg.det([list(r) for r in zip(*cols)])) if d else Fraction(1)
    R2, gens2 = _lambda_ring(tuple(R.symbols), d)
    ngen = len(R.symbols)
    lams = gens2[ngen:]
    images = list(gens2[:ngen])
    for k, vi in enumerate(var_idx):
        img = R2(to_qq(v0[k]))
        for i in range(d):
            if cols[i][k]:
                img += to_qq(cols[i][k]) * lams[i]
        images[vi] = img
    pow_cache: dict = {}

    def power(i, e):
        key = (i, e)
        if key not in pow_cache:
            pow_cache[key] = images[i] ** e
        return pow_cache[key]

    sub = R2.zero
    for monom, coeff in f.terms():
        term = R2(coeff)
        for i, e in enumerate(monom):
            if e:
                term *= power(i, e)
        sub += term
    result = {}
    for monom, coeff in sub.terms():
        beta = monom[ngen:]
        w = Fraction(1)
        for b in beta:
            w *= math.factorial(b)
        w /= math.factorial(d + sum(beta))
        key = monom[:ngen]
        result[key] = result.get(key, QQ(0)) + coeff * to_qq(w * jac)
    return R.from_dict({k: v for k, v in result.items() if v})


def integrate(D: HPolytope, f=1):
    """Exact integral of a polynomial over a bounded H-polytope.

    ``f`` is a number or a sympy ``PolyElement`` whose ring contains the
    polytope's variables; other generators act as symbolic constants and the
    result is then a polynomial in them.  Pure numbers come back as Fractions.
    """
    verts, simplices = D.triangulation()
    if not isinstance(f, PolyElement):
        vol = sum(abs(_simplex_det(verts, s)) for s in simplices) / math.factorial(D.dim)
        return Fraction(f) * vol
    R = f.ring
    names = [str(s) for s in R.symbols]
    try:
        var_idx = [names.index(v) for v in D.variables]
    except ValueError:
        raise PolytopeError(f"integrand ring {names} lacks variables {D.variables}") from None
    total = R.zero
    for s in simplices:
        total += integrate_simplex(R, f, var_idx, [verts[i] for i in s])
    if total.is_ground:
        return to_fraction(total.LC) if total else Fraction(0)
    return total


def shoelace_area(points) -> Fraction:
    """Area of a simple polygon given in cyclic order (independent of triangulation)."""
    s = Fraction(0)
    for (x1, y1), (x2, y2) in zip(points, points[1:] + points[:1]):
        s += x1 * y2 - x2 * y1
    return abs(s) / 2


# Operations exposed to the command line.
API = ("associahedron_faces", "face_boundary", "pentagon_P", "kn_domain", "integrate",
       "moduli_cell_count")
