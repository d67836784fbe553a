import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from homotopy_tvoa.models import bc

BASIS3 = bc.basis(3)
BASIS2 = bc.basis(2)
MODES = [(k, n) for k in "bc" for n in range(-4, 5)]


def unit(mono):
    return {mono: Fraction(1)}


class TestFockSpace:
    def test_vacuum_is_killed_by_annihilators(self):
        vac = unit(bc.VACUUM)
        for n in range(0, 4):
            assert not bc.apply_mode(("b", n), vac)
        for n in range(1, 4):
            assert not bc.apply_mode(("c", n), vac)

    @pytest.mark.parametrize("m,k", list(itertools.product(range(-3, 4), repeat=2)))
    def test_anticommutator(self, m, k):
        for mono in BASIS2:
            v = unit(mono)
            bc_ = bc.apply_mode(("b", m), bc.apply_mode(("c", k), v))
            cb = bc.apply_mode(("c", k), bc.apply_mode(("b", m), v))
            expected = v if m + k == 0 else {}
            assert bc.add(bc_, cb) == expected

    @given(st.sampled_from(MODES), st.sampled_from(BASIS3))
    def test_modes_shift_the_weight(self, mode, mono):
        for out in bc.apply_mode(mode, unit(mono)):
            assert bc.weight(out) == bc.weight(mono) + bc.mode_weight(mode)
            assert bc.ghost(out) == bc.ghost(mono) + bc.mode_ghost(mode)

    def test_basis_counts_match_the_character(self):
        # 2 * prod_{n>=1} (1 + q^n)^2 = 2 + 4q + 6q^2 + 12q^3 + 18q^4 + ...
        assert [len(bc.basis(k)) for k in range(5)] == [2, 6, 12, 24, 42]
        assert all(bc.weight(m) <= 3 for m in BASIS3)

    @given(st.sampled_from(BASIS3))
    def test_text_round_trip(self, mono):
        assert bc.parse_state(bc.format_mono(mono)) == unit(mono)

    def test_parse_errors_carry_a_column(self):
        with pytest.raises(bc.BCError, match="column 6"):
            bc.parse_state("b[-1]x[2]|0>")
        with pytest.raises(bc.BCError, match=r"\|0>"):
            bc.parse_state("b[-1]")

    def test_pauli_exclusion(self):
        assert bc.parse_state("b[-1]b[-1]|0>") == {}

    def test_reordering_sign(self):
        assert bc.parse_state("c[-1]b[-1]|0>") == bc.scale(bc.parse_state("b[-1]c[-1]|0>"), -1)


class TestVertexOperators:
    def test_vacuum_acts_as_identity(self):
        for mono in BASIS2:
            assert bc.vo_apply(unit(bc.VACUUM), -1, unit(mono)) == unit(mono)

    def test_creation_property(self):
        for mono in BASIS2:
            assert bc.vo_apply(unit(mono), -1, unit(bc.VACUUM)) == unit(mono)

    @pytest.mark.parametrize("gen", ["b[-1]|0>", "c[0]|0>"])
    def test_borcherds_commutator(self, gen):
        """``[x_(m), A_(n)] = sum_i C(m, i) (x_(i) A)_(m+n-i)`` on weight <= 1 states."""
        x = bc.parse_state(gen)
        for a_mono, v_mono, m, n in itertools.product(bc.basis(1), bc.basis(1), range(0, 2), range(-2, 2)):
            a, v = unit(a_mono), unit(v_mono)
            sign = -1 if bc.parity(a_mono) else 1
            lhs = bc.add(bc.vo_apply(x, m, bc.vo_apply(a, n, v)),
                         bc.vo_apply(a, n, bc.vo_apply(x, m, v)), -sign)
            rhs = {}
            for i in range(0, m + 1):
                xa = bc.vo_apply(x, i, a)
                rhs = bc.add(rhs, bc.vo_apply(xa, m + n - i, v), bc._binom(m, i))
            assert lhs == rhs, (gen, a_mono, v_mono, m, n)

    def test_translation_covariance(self):
        data = bc.default_data(3)
        for a_mono, v_mono in itertools.product(bc.basis(1), bc.basis(1)):
            a, v = unit(a_mono), unit(v_mono)
            for n in range(-2, 2):
                lhs = bc.vo_apply(data.L_minus1(a), n, v)
                rhs = bc.scale(bc.vo_apply(a, n - 1, v), -n)
                assert lhs == rhs


class TestAxioms:
    def test_q_squares_to_zero(self):
        data = bc.default_data(4)
        for mono in bc.basis(4):
            assert not data.Q(data.Q(unit(mono)))

    def test_vacuum_eigenvalues(self):
        data = bc.default_data(4)
        vac = unit(bc.VACUUM)
        assert not data.F0(vac)
        assert not data.L_mode(0, vac)

    def test_q_g_commutator_gives_l(self):
        data = bc.default_data(3)
        for mono in bc.basis(3):
            v = unit(mono)
            for k in range(-2, 4):
                lhs = bc.add(data.Q(data.G_mode(k, v)), data.G_mode(k, data.Q(v)))
                assert lhs == data.L_mode(k, v)

    def test_g0_squared_obstruction(self):
        data = bc.default_data(4)
        v = bc.parse_state("b[-1]|0>")
        assert data.G_mode(0, data.G_mode(0, v)) == bc.scale(bc.parse_state("c[-1]|0>"), -2)

    def test_search_reports_failure_honestly(self):
        rep = bc.bc_axioms_check(4)
        assert not rep.ok and rep.data is None
        assert rep.failing_axioms == ["G_0^2"]
        assert rep.tried == 72
        assert rep.discrepancies and all("G_0^2" in d for d in rep.discrepancies)

    def test_cutoff_range(self):
        with pytest.raises(bc.BCError):
            bc.bc_axioms_check(7)


class TestLianZuckerman:
    def test_pair_with_vacuum(self):
        for mono in BASIS2:
            assert bc.bc_lz("pair", [unit(bc.VACUUM), unit(mono)]) == unit(mono)

    @given(st.sampled_from(BASIS2), st.sampled_from(BASIS2))
    def test_output_parities(self, x, y):
        px, py = bc.parity(x), bc.parity(y)
        for op, extra in (("pair", 0), ("m", 1)):
            out = bc.bc_lz(op, [unit(x), unit(y)])
            if out:
                assert bc.vector_parity(out) == (px + py + extra) % 2

    @given(st.sampled_from(bc.basis(1)), st.sampled_from(bc.basis(1)), st.sampled_from(bc.basis(1)))
    def test_n_parity(self, x, y, z):
        out = bc.bc_lz("n", [unit(x), unit(y), unit(z)])
        if out:
            assert bc.vector_parity(out) == (bc.parity(x) + bc.parity(y) + bc.parity(z) + 1) % 2

    def test_m_is_nonzero_in_low_weight(self):
        a, b = "c[0]|0>", "b[-1]c[0]|0>"
        out = bc.bc_lz("m", [a, b])
        assert out == bc.scale(bc.parse_state("c[-1]c[0]|0>"), -1)
        res = bc.prop21_residuals(bc.parse_state(a), bc.parse_state(b), bc.default_data(4))
        assert not res["commutativity"]

    def test_m_vanishes_on_single_generators(self):
        for a, b in itertools.product(["b[-1]|0>", "c[0]|0>", "c[-1]|0>"], repeat=2):
            assert not bc.bc_lz("m", [a, b])

    def test_cutoff_exceeded(self):
        with pytest.raises(bc.BCError, match="cutoff"):
            bc.bc_lz("pair", ["b[-3]|0>", "c[0]|0>"], cutoff=2)

    def test_prop21_relations(self):
        rep = bc.bc_verify_prop21(4)
        assert rep.ok, rep.failures[:3]
        assert rep.pairs == len(bc.basis(2)) ** 2
        assert rep.triples == len(bc.basis(1)) ** 3

    def test_prop21_detects_a_wrong_sign(self):
        data = bc.default_data(4)
        a, b = bc.parse_state("b[-1]|0>"), bc.parse_state("c[-1]|0>")
        res = bc.prop21_residuals(a, b, data)
        assert not any(res.values())
        broken = bc.TVOAData(J=bc.scale(data.J, -1), G=data.G, F=data.F, L=data.L, cutoff=4)
        assert any(any(bc.prop21_residuals({x: 1}, {y: 1}, broken).values())
                   for x in bc.basis(1) for y in bc.basis(1))
