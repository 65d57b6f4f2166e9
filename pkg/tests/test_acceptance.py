"""Acceptance suite: one test per criterion, each with its stated tolerance and time limit."""

import math
import time
from pathlib import Path

import pytest

from oracles import reference_rules, brute_walls, dlie_relations
from pkit import protoperad
from pkit.barhom import (
    bar_alg_complex,
    chain_map_holds,
    connected_bar_component,
    homology_ranks,
    induced_homology_iso,
    levelization_map,
    normalized_bar_complex,
    proto_bar_complex,
)
from pkit.cli import main
from pkit.exactq import rank
from pkit.protoperad import Components, build_algebra, default_order, dlie, free_dim, koszul_dual_dim
from pkit.quadalg import (
    MonomialOrder,
    check_confluence,
    derive_rewrite_system,
    hilbert_coeffs,
    hilbert_identity_holds,
    quadratic_dual,
    relation_space_equal,
)
from pkit.walls import enum_walls

FIXTURES = Path(__file__).parent / "fixtures"
DLIE_JSON = Path(protoperad.__file__).with_name("data") / "dlie.json"


def gen_of(a):
    idx = {name.rstrip("*"): i for i, name in enumerate(a.generators)}
    return lambda i, j: idx[f"x{i}{j}"]


def dual_rules(p, n):
    w = quadratic_dual(build_algebra(p, n))
    return w, derive_rewrite_system(w, default_order(w))


@pytest.mark.criterion(1, "double Lie presentation for n = 2, 3, 4")
def test_criterion_1_presentation():
    start = time.perf_counter()
    p = dlie()
    a2, a3, a4 = (build_algebra(p, n) for n in (2, 3, 4))
    assert [a.ngens for a in (a2, a3, a4)] == [1, 3, 6]
    assert a2.relation_dim == 0
    x = gen_of(a3)
    assert relation_space_equal(a3, [
        {(x(1, 2), x(2, 3)): 1, (x(2, 3), x(1, 3)): -1, (x(1, 3), x(1, 2)): -1},
        {(x(2, 3), x(1, 2)): 1, (x(1, 3), x(2, 3)): -1, (x(1, 2), x(1, 3)): -1},
    ])
    x = gen_of(a4)
    commutators = [{(x(a, b), x(c, d)): 1, (x(c, d), x(a, b)): -1} for (a, b), (c, d) in
                   [((1, 2), (3, 4)), ((1, 3), (2, 4)), ((1, 4), (2, 3))]]
    assert relation_space_equal(a4, dlie_relations(4, x))
    assert a4.relation_dim == 2 * 4 + 3
    families = [r for r in dlie_relations(4, x) if r not in commutators]
    assert len(families) == 8 and not relation_space_equal(a4, families)
    assert time.perf_counter() - start < 1.0


@pytest.mark.criterion(2, "dual rewriting rules equal rules one to six for n = 3, 4, 5")
def test_criterion_2_reference_rules():
    start = time.perf_counter()
    p = dlie()
    for n in (3, 4, 5):
        w, rs = dual_rules(p, n)
        expected = reference_rules(n, gen_of(w))
        assert rs.lhs_set == frozenset(expected)
        assert rs.rules == expected
    assert time.perf_counter() - start < 5.0


@pytest.mark.criterion(3, "confluence of the dual rules for n = 3, 4, 5 and certified check through arity 5")
def test_criterion_3_confluence(capsys):
    start = time.perf_counter()
    p = dlie()
    counts = []
    for n in (3, 4, 5):
        _, rs = dual_rules(p, n)
        report = check_confluence(rs)
        assert report.confluent and not report.failures
        counts.append(report.critical_count)
    assert counts == [15, 90, 350]
    code = main(["check", str(DLIE_JSON), "--max-arity", "5"])
    out = capsys.readouterr().out
    assert code == 0 and '"status": "CertifiedThroughArity(5)"' in out
    assert time.perf_counter() - start < 120.0


@pytest.mark.criterion(4, "negative control x^2 - yx with y < x is not confluent, exit code 2")
def test_criterion_4_negative_control(capsys):
    from pkit.quadalg import QuadraticAlgebra

    a = QuadraticAlgebra.from_relations(["y", "x"], [{(1, 1): 1, (0, 1): -1}])
    rs = derive_rewrite_system(a, MonomialOrder.identity(2))
    report = check_confluence(rs)
    assert not report.confluent
    (fail,) = report.failures
    assert fail.monomial == (1, 1, 1)
    forms = sorted(tuple(sorted(nf.items())) for nf in fail.normal_forms)
    assert forms == [(((0, 0, 1), 1),), (((1, 0, 1), 1),)]
    code = main(["check", str(FIXTURES / "negative_control.json")])
    capsys.readouterr()
    assert code == 2


@pytest.mark.criterion(5, "Hilbert series identity for n = 2, 3, 4 up to degree 6")
def test_criterion_5_hilbert():
    p = dlie()
    for n in (2, 3, 4):
        a = build_algebra(p, n)
        w = quadratic_dual(a)
        # the algebra's own default order is not confluent at n = 4; use any confluent one
        rs_a = next(derive_rewrite_system(a, o) for o in (default_order(a), default_order(a).reverse())
                    if check_confluence(derive_rewrite_system(a, o)).confluent)
        ha = hilbert_coeffs(rs_a, 6)
        hw = hilbert_coeffs(derive_rewrite_system(w, default_order(w)), 6)
        for d in range(7):
            total = sum((-1) ** j * ha[d - j] * hw[j] for j in range(d + 1))
            assert total == (1 if d == 0 else 0)
        assert hilbert_identity_holds(ha, hw)
        if n == 3:
            assert ha == [1, 3, 7, 15, 31, 63, 127]
            assert hw == [1, 3, 2, 0, 0, 0, 0]


@pytest.mark.criterion(6, "Koszul dual dimensions (n-1)! in weight n-1 and zero elsewhere")
def test_criterion_6_dual_dimensions():
    start = time.perf_counter()
    p = dlie()
    comp = Components(p)
    for n in (2, 3, 4):
        dims = [koszul_dual_dim(p, n, rho, comp) for rho in range(1, 5)]
        assert dims == [math.factorial(n - 1) if rho == n - 1 else 0 for rho in range(1, 5)]
    assert [koszul_dual_dim(p, n, n - 1, comp) for n in (2, 3, 4)] == [1, 2, 6]
    assert time.perf_counter() - start < 60.0


@pytest.mark.criterion(7, "d^2 = 0 for the algebra, normalized and protoperadic bar complexes, n <= 4, weight <= 4")
def test_criterion_7_square_zero():
    p = dlie()
    comp = Components(p)
    for n in (2, 3, 4):
        a = build_algebra(p, n)
        for rho in range(1, 5):
            for c in (bar_alg_complex(a, rho), normalized_bar_complex(p, n, rho, comp),
                      proto_bar_complex(p, n, rho, comp)):
                assert c.check_square_zero()


@pytest.mark.criterion(8, "connected bar homology concentrated in top degree, n <= 4, weight <= 4")
def test_criterion_8_concentration():
    p = dlie()
    for n in (2, 3, 4):
        a = build_algebra(p, n)
        for rho in range(1, 5):
            h = homology_ranks(connected_bar_component(a, rho, n)).by_degree(rho)
            assert all(v == 0 for d, v in h.items() if d != rho)
            top = h.get(rho, 0)
            assert top == (math.factorial(n - 1) if rho == n - 1 else 0)


@pytest.mark.criterion(9, "levelization injective, a chain map and a homology isomorphism, n <= 3, weight <= 3")
def test_criterion_9_levelization():
    p = dlie()
    comp = Components(p)
    for n in (2, 3):
        for rho in range(1, 4):
            bar, nbar, maps = levelization_map(p, n, rho, comp)
            assert all(rank(m) == m.ncols for m in maps.values())
            assert chain_map_holds(bar, nbar, maps, rho)
            assert induced_homology_iso(bar, nbar, maps, rho)


@pytest.mark.criterion(10, "wall counts and free dimensions agree with the brute-force oracle, n <= 4, weight <= 3")
def test_criterion_10_oracle_equivalence():
    gens = dlie().generators
    for n in (1, 2, 3, 4):
        for rho in (1, 2, 3):
            oracle = len(brute_walls(n, rho))
            assert len(enum_walls(n, rho, {2})) == oracle
            assert free_dim(gens, n, rho) == oracle * len(gens) ** rho
