from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homotopy_tvoa.polytopes import (
    DegeneratePolytope,
    HPolytope,
    PentagonParams,
    PolytopeError,
    associahedron_faces,
    binary_trees,
    boundary_squared,
    catalan,
    corolla,
    face_boundary,
    integrate,
    kn_domain,
    loday_point,
    moduli_cell_count,
    pentagon_P,
    poly_ring,
    shoelace_area,
)

F = Fraction
STANDARD = PentagonParams(xi=F(1, 100), alpha1=F(1, 100), alpha2=F(1, 10),
                          eps1=F(1, 100), eps2=F(1, 10), rho=F(1))
STANDARD_VERTICES = {(F(1, 10), F(1, 100)), (F(99, 100), F(1, 100)), (F(99, 100), F(9, 10)),
                     (F(91, 100), F(9, 10)), (F(1, 10), F(9, 100))}


class TestFaceLattice:
    def test_k3_is_an_interval(self):
        L = associahedron_faces(3)
        assert L.f_vector() == [2, 1]

    def test_k4_is_a_pentagon(self):
        assert associahedron_faces(4).f_vector() == [5, 5, 1]

    @pytest.mark.parametrize("n,fv", [
        (5, [14, 21, 9, 1]),
        (6, [42, 84, 56, 14, 1]),
    ])
    def test_f_vectors(self, n, fv):
        assert associahedron_faces(n).f_vector() == fv

    @pytest.mark.parametrize("n", range(3, 9))
    def test_vertices_and_facets(self, n):
        L = associahedron_faces(n)
        assert len(L.vertices) == catalan(n - 1) == len(binary_trees(n))
        assert len(L.facets) == n * (n - 1) // 2 - 1

    @pytest.mark.parametrize("n", range(3, 9))
    def test_boundary_is_a_sphere(self, n):
        assert associahedron_faces(n).boundary_euler_characteristic() == 1 + (-1) ** (n - 3)

    def test_out_of_range(self):
        with pytest.raises(PolytopeError):
            associahedron_faces(11)

    def test_top_face_is_corolla(self):
        L = associahedron_faces(5)
        assert L.top == corolla(5) and L.top.dim == 3
        assert len(L.incidence(L.top)) == len(L.facets)


class TestFaceBoundary:
    def test_interval_endpoints_have_opposite_signs(self):
        terms = face_boundary(corolla(3))
        assert len(terms) == 2 and {s for s, _ in terms} == {1, -1}
        assert all(g.is_binary for _, g in terms)

    def test_pentagon_has_five_signed_edges(self):
        terms = face_boundary(corolla(4))
        assert len(terms) == 5 and all(g.dim == 1 for _, g in terms)

    @pytest.mark.parametrize("n", range(3, 7))
    def test_boundary_squared_vanishes_on_every_face(self, n):
        for face in associahedron_faces(n).faces:
            if face.dim >= 2:
                assert boundary_squared(face) == {}, face

    def test_vertex_has_no_boundary(self):
        with pytest.raises(PolytopeError):
            face_boundary(binary_trees(4)[0])


class TestPentagon:
    def test_standard_vertices(self):
        assert set(pentagon_P(STANDARD).vertices()) == STANDARD_VERTICES

    def test_standard_area(self):
        P = pentagon_P(STANDARD)
        area = integrate(P)
        assert area == F(9281, 20000)
        assert area == F(89, 100) ** 2 - F(81, 100) ** 2 / 2
        assert shoelace_area(P.polygon()) == area

    def test_area_by_monte_carlo(self):
        rng = np.random.default_rng(20261015)
        pts = rng.uniform(0, 1, size=(4_000_000, 2))
        x, y = pts[:, 0], pts[:, 1]
        inside = (x >= 0.1) & (x <= 0.99) & (y >= 0.01) & (y <= 0.9) & (x - y >= 0.01)
        assert abs(inside.mean() - 9281 / 20000) < 1e-3

    def test_edges_match_boundary_limits(self):
        P = pentagon_P(STANDARD)
        verts = P.vertices()
        edges = {frozenset((verts[i], verts[j])) for i, j in P.edges()}
        assert len(edges) == 5
        # the diagonal x - y = xi runs from (eps1 + xi, eps1) ... clipped by x >= eps2
        assert frozenset(((F(1, 10), F(9, 100)), (F(91, 100), F(9, 10)))) in edges

    def test_regime_violation_is_reported(self):
        bad = PentagonParams(xi=F(99, 100), alpha1=F(1, 100), alpha2=F(1, 10),
                             eps1=F(1, 100), eps2=F(1, 10), rho=F(1))
        assert bad.violations()
        with pytest.raises(DegeneratePolytope):
            pentagon_P(bad)

    @given(
        st.fractions(F(1, 1000), F(1, 50), max_denominator=1000),
        st.fractions(F(1, 1000), F(1, 50), max_denominator=1000),
        st.fractions(F(1, 1000), F(1, 50), max_denominator=1000),
        st.fractions(F(1, 12), F(1, 5), max_denominator=100),
        st.fractions(F(1, 12), F(1, 5), max_denominator=100),
    )
    def test_five_vertices_across_the_regime(self, xi, a1, e1, a2, e2):
        p = PentagonParams(xi=xi, alpha1=a1, alpha2=a2, eps1=e1, eps2=e2, rho=F(1))
        assert not p.violations()
        P = pentagon_P(p)
        assert len(P.vertices()) == 5
        assert integrate(P) == shoelace_area(P.polygon())


class TestKnDomain:
    def test_k3_is_the_unit_interval(self):
        K = kn_domain(3, 1)
        assert K.simplex.vertices() == [(F(0),), (F(1),)]
        assert integrate(K.simplex) == 1

    def test_k4_pentagon_inside_the_triangle(self):
        K = kn_domain(4, 1)
        verts = K.realization.vertices()
        assert len(verts) == 5
        assert all(K.simplex.contains(v, strict=True) for v in verts)

    @pytest.mark.parametrize("n", [5, 6])
    def test_realization_vertex_count(self, n):
        K = kn_domain(n, F(3, 2))
        verts = K.realization.vertices()
        assert len(verts) == catalan(n - 1)
        assert all(K.simplex.contains(v, strict=True) for v in verts)

    def test_loday_points_are_the_vertices(self):
        K = kn_domain(5, 1)
        assert set(K.vertex_points().values()) == set(K.realization.vertices())

    def test_rho_must_be_positive(self):
        with pytest.raises(PolytopeError):
            kn_domain(4, 0)

    def test_loday_point_scales_with_rho(self):
        t = binary_trees(5)[3]
        assert loday_point(t, 2) == tuple(2 * c for c in loday_point(t, 1))


class TestIntegrate:
    def test_linear_function_on_unit_interval(self):
        D = HPolytope(("x",), (((1,), 1), ((-1,), 0)))
        R, (x,) = poly_ring(("x",))
        assert integrate(D, x) == F(1, 2)

    def test_unbounded_is_an_error(self):
        D = HPolytope(("x",), (((-1,), 0),))
        with pytest.raises(PolytopeError):
            integrate(D)

    def test_symbolic_parameters_survive(self):
        D = HPolytope(("x",), (((1,), 1), ((-1,), 0)))
        R, (x, a) = poly_ring(("x", "a"))
        value = integrate(D, a * x ** 2 + 1)
        assert value == R(F(1, 3)) * a + 1

    @given(
        st.fractions(0, 3, max_denominator=9), st.fractions(F(1, 4), 2, max_denominator=9),
        st.fractions(0, 3, max_denominator=9), st.fractions(F(1, 4), 2, max_denominator=9),
        st.fractions(0, 1, max_denominator=9).filter(lambda s: 0 < s < 1),
        st.lists(st.integers(-4, 4), min_size=6, max_size=6),
    )
    def test_additive_under_box_splits(self, x0, w, y0, h, s, c):
        R, (x, y) = poly_ring(("x", "y"))
        f = c[0] + c[1] * x + c[2] * y + c[3] * x * y + c[4] * x ** 2 + c[5] * y ** 3

        def box(a, b, lo, hi):
            return HPolytope(("x", "y"), (((1, 0), b), ((-1, 0), -a), ((0, 1), hi), ((0, -1), -lo)))

        cut = x0 + s * w
        whole = integrate(box(x0, x0 + w, y0, y0 + h), f)
        parts = integrate(box(x0, cut, y0, y0 + h), f) + integrate(box(cut, x0 + w, y0, y0 + h), f)
        assert whole == parts

    @given(st.lists(st.integers(-5, 5), min_size=3, max_size=3),
           st.lists(st.integers(-5, 5), min_size=3, max_size=3),
           st.integers(-3, 3))
    def test_linear_in_the_integrand(self, c1, c2, k):
        P = pentagon_P(STANDARD)
        R, (x, y) = poly_ring(("x", "y"))
        f = c1[0] + c1[1] * x + c1[2] * x * y
        g = c2[0] + c2[1] * y ** 2 + c2[2] * x
        lhs = integrate(P, f + k * g)
        rhs = integrate(P, f) + k * integrate(P, g)
        assert lhs == rhs


@pytest.mark.parametrize("n,count", [(3, 3), (4, 12), (5, 60), (6, 360)])
def test_moduli_cell_count(n, count):
    assert moduli_cell_count(n) == count
