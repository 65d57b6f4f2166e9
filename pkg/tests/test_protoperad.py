import itertools
import math

import pytest

from oracles import brute_walls, dlie_relations
from pkit.exactq import RationalMatrix, row_space_contains, row_space_equal
from pkit.protoperad import (
    BinaryQuadraticProtoperad,
    GeneratorSpec,
    PresentationError,
    build_algebra,
    check_koszul,
    dual_presentation,
    free_dim,
    free_presentation,
    ind_dim,
    koszul_dual_dim,
    weight2_basis,
)
from pkit.quadalg import relation_space_equal
from pkit.walls import Wall

ANTI = GeneratorSpec("x", "antisymmetric")
SYM = GeneratorSpec("m", "symmetric")


def gen_of(a):
    idx = {name: i for i, name in enumerate(a.generators)}
    return lambda i, j: idx[f"x{i}{j}"]


@pytest.mark.parametrize("n, rho, expected", [(2, 1, 1), (3, 2, 6), (2, 2, 1)])
def test_free_dim_examples(n, rho, expected):
    assert free_dim([ANTI], n, rho) == expected


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("rho", [1, 2, 3])
def test_free_dim_against_oracle(n, rho):
    assert free_dim([ANTI, SYM], n, rho) == len(brute_walls(n, rho)) * 2 ** rho


def test_generator_spec_validation():
    with pytest.raises(PresentationError):
        GeneratorSpec("x", "chiral")
    with pytest.raises(PresentationError):
        BinaryQuadraticProtoperad((ANTI, ANTI))


@pytest.mark.parametrize("n, gens, rels", [(2, 1, 0), (3, 3, 2), (4, 6, 11)])
def test_build_algebra_sizes(dlie_p, n, gens, rels):
    a = build_algebra(dlie_p, n)
    assert a.ngens == gens == n * (n - 1) // 2
    assert a.relation_dim == rels


@pytest.mark.parametrize("n", [3, 4, 5])
def test_build_algebra_matches_double_jacobi(dlie_p, n):
    a = build_algebra(dlie_p, n)
    assert relation_space_equal(a, dlie_relations(n, gen_of(a)))


def test_generator_order_is_right_lexicographic(dlie_p):
    a = build_algebra(dlie_p, 4)
    assert a.generators == ("x12", "x13", "x23", "x14", "x24", "x34")


SHAPES = [((1, 2), (2, 3)), ((2, 3), (1, 2)), ((1, 2), (1, 3)), ((1, 3), (1, 2)), ((1, 3), (2, 3)),
          ((2, 3), (1, 3))]


@pytest.mark.parametrize("bottom, top", SHAPES)
def test_wall_shape_substitution_table(bottom, top):
    # a single basis relation on one shape lands on the relabelled generators
    basis = weight2_basis(2, 3)
    assert len(basis) == 6 * 4
    rel = {"terms": [{"bottom_brick": list(bottom), "top_brick": list(top), "bottom_gen": "x",
                      "top_gen": "y", "coeff": "1"}]}
    p = BinaryQuadraticProtoperad.from_json({"generators": [{"name": "x"}, {"name": "y"}], "relations3": [rel]})
    a = build_algebra(p, 4)
    idx = {name: i for i, name in enumerate(a.generators)}
    for triple in itertools.combinations(range(1, 5), 3):
        sigma = dict(zip((1, 2, 3), triple))
        word = (idx["x%d%d" % (sigma[bottom[0]], sigma[bottom[1]])],
                idx["y%d%d" % (sigma[top[0]], sigma[top[1]])])
        g = a.ngens
        col = word[0] * g + word[1]
        assert any(row.get(col) for row in a.relations.nonzero_rows())


def test_symmetric_closure_of_cyclic_relator(dlie_p):
    space = dlie_p.relation_space(3)
    assert dlie_p.relation_dim(3) == 2 and dlie_p.relation_dim(2) == 0
    width = space.ncols
    for perm in itertools.permutations((1, 2, 3)):
        moved = [dlie_p.act(3, perm, row) for row in space.nonzero_rows()]
        assert row_space_contains(space, RationalMatrix.from_sparse_rows(moved, width))


def test_antisymmetric_sign_absorbed():
    def rel(bottom, coeff):
        return {"terms": [{"bottom_brick": bottom, "top_brick": [1, 2], "bottom_gen": "x", "top_gen": "x",
                           "coeff": coeff}]}

    base = {"generators": [{"name": "x"}]}
    a = BinaryQuadraticProtoperad.from_json({**base, "relations2": [rel([1, 2], "1")]})
    b = BinaryQuadraticProtoperad.from_json({**base, "relations2": [rel([2, 1], "-1")]})
    assert a._vector(a.relations2[0]) == b._vector(b.relations2[0])
    with pytest.raises(PresentationError, match=r"relations2\[0\]"):
        BinaryQuadraticProtoperad.from_json({**base, "relations2": [
            {"terms": rel([1, 2], "1")["terms"] + rel([2, 1], "1")["terms"]}]})


def test_dual_presentation(dlie_p):
    d = dual_presentation(dlie_p)
    assert d.generators[0].name == "x*" and d.generators[0].symmetry == "antisymmetric"
    assert d.relation_dim(2) == 1 and d.relation_dim(3) == 4
    back = dual_presentation(d)
    assert all(row_space_equal(back.relation_space(k), dlie_p.relation_space(k)) for k in (2, 3))
    free = dual_presentation(free_presentation([ANTI]))
    assert free.relation_dim(2) == 1 and free.relation_dim(3) == 6


@pytest.mark.parametrize("gens", [[ANTI], [SYM], [ANTI, SYM]])
def test_dual_dimensions_add_up(gens):
    p = BinaryQuadraticProtoperad.from_json({"generators": [{"name": g.name, "symmetry": g.symmetry} for g in gens],
                                             "relations3": [{"terms": [
                                                 {"bottom_brick": [1, 2], "top_brick": [2, 3],
                                                  "bottom_gen": gens[0].name, "top_gen": gens[-1].name,
                                                  "coeff": "2/3"}]}]})
    d = dual_presentation(p)
    for arity in (2, 3):
        assert p.relation_dim(arity) + d.relation_dim(arity) == free_dim(gens, arity, 2)


def test_ind_dim():
    assert ind_dim({2: 1}, 2) == 2
    assert ind_dim(lambda n: 0, 5) == 0
    assert ind_dim({3: 2}, 3) == 12


@pytest.mark.parametrize("n, expected", [(2, [1, 0, 0, 0]), (3, [0, 2, 0, 0]), (4, [0, 0, 6, 0])])
def test_koszul_dual_dims(dlie_p, dlie_comp, n, expected):
    got = [koszul_dual_dim(dlie_p, n, rho, dlie_comp) for rho in range(1, 5)]
    assert got == expected
    assert got[n - 2] == math.factorial(n - 1)


def test_components_are_connected_quotients(dlie_comp):
    assert [dlie_comp.dim(2, w) for w in (1, 2, 3)] == [1, 1, 1]
    assert [dlie_comp.dim(3, w) for w in (1, 2, 3)] == [0, 4, 12]
    brick = (2, 4, 5)
    gword = dlie_comp.globalize(brick, dlie_comp.basis(3, 2)[0])
    assert all(i in brick and j in brick for i, j, _ in gword)
    assert dlie_comp.localize(brick, gword) == dlie_comp.basis(3, 2)[0]


def test_check_koszul_dlie(dlie_p):
    v = check_koszul(dlie_p, 5, 3)
    assert v.status == "CertifiedThroughArity(5)" and v.certified
    assert [r.n for r in v.results] == [2, 3, 4, 5]
    assert all(r.cross_checks_passed for r in v.results)
    assert all(r.hilbert["identity_holds"] for r in v.results)


def test_check_koszul_free_symmetric():
    assert check_koszul(free_presentation([SYM]), 3).status == "CertifiedThroughArity(3)"


def test_check_koszul_workers_agree(dlie_p):
    serial = check_koszul(dlie_p, 4, 2)
    parallel = check_koszul(dlie_p, 4, 2, workers=2)
    assert serial.status == parallel.status
    assert [r.certificate.status for r in serial.results] == [r.certificate.status for r in parallel.results]


def test_check_koszul_falls_back_to_dual():
    # arity-2 relation x x - y x: its own rules are not confluent but the dual's are
    p = BinaryQuadraticProtoperad.from_json({
        "generators": [{"name": "y", "symmetry": "symmetric"}, {"name": "x", "symmetry": "symmetric"}],
        "relations2": [{"terms": [
            {"bottom_brick": [1, 2], "top_brick": [1, 2], "bottom_gen": "x", "top_gen": "x", "coeff": "1"},
            {"bottom_brick": [1, 2], "top_brick": [1, 2], "bottom_gen": "y", "top_gen": "x", "coeff": "-1"}]}],
    })
    v = check_koszul(p, 3, 2, order_budget=0)
    assert v.certified
    first = v.results[0]
    assert first.certificate.status == "Inconclusive" and first.via == "dual"
    assert first.dual_certificate.certified


def test_strict_parsing_paths():
    base = {"generators": [{"name": "x"}]}
    term = {"bottom_brick": [1, 2], "top_brick": [2, 3], "bottom_gen": "x", "top_gen": "x", "coeff": "1"}
    with pytest.raises(PresentationError, match=r"relations3\[0\]\.terms\[0\]\.top_gen"):
        BinaryQuadraticProtoperad.from_json({**base, "relations3": [{"terms": [{**term, "top_gen": "z"}]}]})
    with pytest.raises(PresentationError, match=r"relations3\[0\]\.terms\[0\]\.coeff"):
        BinaryQuadraticProtoperad.from_json({**base, "relations3": [{"terms": [{**term, "coeff": 1.5}]}]})
    with pytest.raises(PresentationError, match="unknown"):
        BinaryQuadraticProtoperad.from_json({**base, "relations4": []})
    with pytest.raises(PresentationError, match="connected"):
        BinaryQuadraticProtoperad.from_json({**base, "relations3": [{"terms": [{**term, "top_brick": [1, 2]}]}]})
    with pytest.raises(PresentationError, match="schema"):
        BinaryQuadraticProtoperad.from_json({**base, "schema": "pkit/0"})


def test_json_round_trip(dlie_p):
    again = BinaryQuadraticProtoperad.from_json(dlie_p.to_json())
    assert row_space_equal(again.relation_space(3), dlie_p.relation_space(3))


def test_two_brick_basis_walls():
    walls = {(b, t) for b, t, _, _ in weight2_basis(1, 3)}
    assert {Wall.from_sequence([b, t]) for b, t in walls} == {Wall.from_sequence(s) for s in SHAPES}
