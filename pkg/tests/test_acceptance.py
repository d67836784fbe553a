"""Acceptance criteria 1-9.

Each criterion records its outcome in ``RESULTS``; the terminal summary hook
in ``conftest.py`` prints one PASS/FAIL line per criterion at the end of the
run.  A criterion split over several tests passes only if all parts pass.
"""
import json
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from homotopy_tvoa import weakcalc as wc
from homotopy_tvoa.ainfty import bar_square_residual, builtin_structure, check_relations
from homotopy_tvoa.models import bc, derham
from homotopy_tvoa.polytopes import (
    PentagonParams,
    associahedron_faces,
    boundary_squared,
    integrate,
    moduli_cell_count,
    pentagon_P,
    shoelace_area,
)

F = Fraction
TITLES = {
    1: "A-infinity suite",
    2: "associahedra",
    3: "pentagon geometry",
    4: "symbolic verification",
    5: "exact model oracle",
    6: "bc backend",
    7: "moduli count",
    8: "boundary exploration",
    9: "determinism",
}
RESULTS: dict = {}
STANDARD = {"rho": F(1), "alpha2": F(1, 10), "eps2": F(1, 10),
            "alpha1": F(1, 100), "eps1": F(1, 100), "xi": F(1, 100)}


class criterion:
    """Context manager recording whether a block of assertions held."""

    def __init__(self, number: int, note: str = ""):
        self.number, self.note = number, note

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        elapsed = time.perf_counter() - self.start
        detail = self.note if ok else f"{self.note} {exc_type.__name__}: {exc}".strip()
        RESULTS.setdefault(self.number, []).append((ok, elapsed, detail))
        return False


def test_criterion_1_ainfinity():
    with criterion(1) as c:
        dga = builtin_structure("dga-lambda")
        for n in (2, 3, 4):
            rep = check_relations(dga, n)
            assert rep.ok and not rep.residuals
        assert bar_square_residual(dga, 6).ok
        assert bar_square_residual(builtin_structure("mu3-only"), 6).ok
        assert not check_relations(builtin_structure("nonassoc-counterexample"), 3).ok
        assert time.perf_counter() - c.start < 10


def test_criterion_2_associahedra():
    with criterion(2) as c:
        counts = []
        for n in range(3, 9):
            L = associahedron_faces(n)
            counts.append(len(L.vertices))
            assert len(L.facets) == n * (n - 1) // 2 - 1
            assert L.boundary_euler_characteristic() == 1 + (-1) ** (n - 3)
            if n <= 6:
                assert all(boundary_squared(f) == {} for f in L.faces if f.dim >= 2)
        assert counts == [2, 5, 14, 42, 132, 429]
        assert time.perf_counter() - c.start < 30


def test_criterion_3_pentagon():
    with criterion(3):
        P = pentagon_P(PentagonParams.from_mapping(STANDARD))
        assert set(P.vertices()) == {(F(1, 10), F(1, 100)), (F(99, 100), F(1, 100)),
                                     (F(99, 100), F(9, 10)), (F(91, 100), F(9, 10)),
                                     (F(1, 10), F(9, 100))}
        area = integrate(P)
        assert area == F(9281, 20000)
        assert shoelace_area(P.polygon()) == area
        rng = np.random.default_rng(3)
        x, y = rng.uniform(0, 1, size=(2, 4_000_000))
        inside = (x >= 0.1) & (x <= 0.99) & (y >= 0.01) & (y <= 0.9) & (x - y >= 0.01)
        assert abs(inside.mean() - float(area)) < 1e-3


def test_criterion_4_symbolic_verification():
    with criterion(4) as c:
        for identity in ("prop3.1", "lemma3.1", "prop3.2", "lemma3.2"):
            rep = wc.verify(identity)
            assert rep.ok and not rep.residual, identity
        stokes = wc.verify("pentagon-stokes")
        assert stokes.ok
        edges = stokes.details["edges"]
        assert all(e["ok"] for e in edges.values())
        assert sorted(k for e in edges.values() for k in e["terms"]) == [1, 2, 3, 4, 5, 6]
        deriv = wc.derive_prop33()
        assert deriv.ok and deriv.m_terms_cancel and not deriv.leftover_m_terms
        assert time.perf_counter() - c.start < 60


@pytest.mark.parametrize("identity", derham.IDENTITIES)
def test_criterion_5_exact_model(identity):
    with criterion(5):
        import random

        keys = {"lemma3.1": ("eps",), "prop3.2": ("rho", "alpha1", "alpha2"),
                "lemma3.2": ("rho", "eps1", "eps2"), "prop3.3": tuple(STANDARD)}[identity]
        params = {k: ({"eps": F(1, 10)} | STANDARD)[k] for k in keys}
        rng = random.Random(f"acceptance:{identity}")
        functionals = derham.standard_functionals()
        assert len({fn.name for fn in functionals}) == 3
        for _ in range(10):
            inputs = [derham.random_element(rng, rng.randint(0, 1), 4)
                      for _ in range(derham.IDENTITY_ARITY[identity])]
            start = time.perf_counter()
            res = derham.model_residual(identity, inputs, params, t=2)
            assert time.perf_counter() - start < 1
            assert res.is_zero()
            assert all(fn(res) == 0 for fn in functionals)


def test_criterion_6_prop21():
    with criterion(6, "prop21 relations hold"):
        rep = bc.bc_verify_prop21(4)
        assert rep.ok, rep.failures[:5]
        assert rep.pairs == len(bc.basis(2)) ** 2 and rep.triples == len(bc.basis(1)) ** 3


@pytest.mark.xfail(strict=True, reason="no sign assignment satisfies G_0^2 = 0 at cutoff 4; "
                                       "see the discrepancy report")
def test_criterion_6_axioms():
    with criterion(6, "no sign assignment passes the relations"):
        rep = bc.bc_axioms_check(4)
        report = "\n".join([f"tried {rep.tried} assignments; failing: {rep.failing_axioms}",
                            *rep.discrepancies])
        if not rep.ok:
            pytest.fail(report, pytrace=False)


def test_criterion_7_moduli_count():
    with criterion(7):
        assert [moduli_cell_count(n) for n in (3, 4, 5)] == [3, 12, 60]


def test_criterion_8_boundary_exploration():
    with criterion(8, "n=5 reported as exploration"):
        r3, r4, r5 = (wc.boundary_expand(n) for n in (3, 4, 5))
        assert r3["facet_count"] == 2 and not r3["unmatched"]
        assert r4["facet_count"] == 5 and not r4["unmatched"]
        assert r5["facet_count"] == 9
        assert len(r5["matched"]) + len(r5["unmatched"]) == 9
        json.dumps(r5)


def test_criterion_9_determinism():
    with criterion(9):
        cmd = [sys.executable, "-m", "homotopy_tvoa", "--format", "json", "--seed", "0", "--jobs", "8"]
        first = subprocess.run(cmd, capture_output=True, check=False)
        second = subprocess.run(cmd, capture_output=True, check=False)
        assert first.returncode in (0, 1), first.stderr.decode()
        assert first.stdout == second.stdout
        body = json.loads(first.stdout)
        assert body["summary"]["total"] == len(body["checks"]) > 0
