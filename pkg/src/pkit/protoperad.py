"""Binary quadratic protoperads and their family of quadratic algebras A(P, n).

Weight-two elements live in the span of labelled two-brick walls.  A basis
element is ``(bottom, top, a, b)``: the bottom brick carries generator a, the
top brick generator b, bricks listed with ascending inputs.  At arity 2 both
bricks are (1, 2); at arity 3 there are six walls.  An antisymmetric
generator written with descending inputs contributes a sign when normalised.

The relation space at each arity is the span of the given relation vectors
together with all their images under relabelling of inputs.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .exactq import EchelonBasis, RationalMatrix, as_rational, orthogonal_complement, rref
from .quadalg import PresentationError as _AlgebraPresentationError
from .quadalg import (
    Certificate,
    LinearQuotient,
    MonomialOrder,
    QuadraticAlgebra,
    candidate_orders,
    certify_koszul,
    hilbert_coeffs,
    hilbert_identity_holds,
    quadratic_dual,
    dual_name,
)
from .walls import Brick, enum_walls, graph_partition

SYMMETRIES = ("symmetric", "antisymmetric")

Term = tuple[Brick, Brick, int, int]


class PresentationError(_AlgebraPresentationError):
    """Malformed presentation; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    symmetry: str = "antisymmetric"

    def __post_init__(self):
        if self.symmetry not in SYMMETRIES:
            raise PresentationError("symmetry", f"expected one of {SYMMETRIES}, got {self.symmetry!r}")

    @property
    def sign(self) -> int:
        return -1 if self.symmetry == "antisymmetric" else 1


@dataclass(frozen=True)
class RelationVector:
    arity: int
    terms: tuple[tuple[Brick, Brick, int, int, Fraction], ...]


def weight2_basis(ngens: int, arity: int) -> list[Term]:
    if arity == 2:
        walls = [((1, 2), (1, 2))]
    elif arity == 3:
        walls = [(w.bricks[0], w.bricks[1]) for w in enum_walls(3, 2, {2})]
    else:
        raise ValueError("binary relations live in arity 2 or 3")
    return [(b, t, x, y) for b, t in walls for x in range(ngens) for y in range(ngens)]


def _normalise(gens: Sequence[GeneratorSpec], brick: Sequence[int], g: int) -> tuple[Brick, int]:
    a, b = brick
    if a < b:
        return (a, b), 1
    return (b, a), gens[g].sign


@dataclass(frozen=True, eq=False)
class BinaryQuadraticProtoperad:
    generators: tuple[GeneratorSpec, ...]
    relations2: tuple[RelationVector, ...] = ()
    relations3: tuple[RelationVector, ...] = ()

    def __post_init__(self):
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise PresentationError("generators", "generator names must be unique")
        if not names:
            raise PresentationError("generators", "at least one generator is required")
        for key, rels in (("relations2", self.relations2), ("relations3", self.relations3)):
            for k, rel in enumerate(rels):
                if not self._vector(rel):
                    raise PresentationError(f"{key}[{k}]", "relation vector is zero after normalisation")

    @property
    def ngens(self) -> int:
        return len(self.generators)

    def basis(self, arity: int) -> list[Term]:
        return weight2_basis(self.ngens, arity)

    def _vector(self, rel: RelationVector) -> dict[int, Fraction]:
        index = {t: i for i, t in enumerate(self.basis(rel.arity))}
        row: dict[int, Fraction] = {}
        for bottom, top, x, y, c in rel.terms:
            bb, s1 = _normalise(self.generators, bottom, x)
            tt, s2 = _normalise(self.generators, top, y)
            j = index[(bb, tt, x, y)]
            row[j] = row.get(j, 0) + s1 * s2 * c
        return {j: v for j, v in row.items() if v}

    def act(self, arity: int, perm: Sequence[int], row: Mapping[int, Fraction]) -> dict[int, Fraction]:
        """Relabel inputs by ``s -> perm[s-1]`` on a weight-two vector."""
        basis = self.basis(arity)
        index = {t: i for i, t in enumerate(basis)}
        out: dict[int, Fraction] = {}
        for j, c in row.items():
            b, t, x, y = basis[j]
            bb, s1 = _normalise(self.generators, (perm[b[0] - 1], perm[b[1] - 1]), x)
            tt, s2 = _normalise(self.generators, (perm[t[0] - 1], perm[t[1] - 1]), y)
            k = index[(bb, tt, x, y)]
            out[k] = out.get(k, 0) + s1 * s2 * c
        return {k: v for k, v in out.items() if v}

    def relation_space(self, arity: int) -> RationalMatrix:
        """Rows spanning the relations at this arity, closed under relabelling; in rref."""
        rels = self.relations2 if arity == 2 else self.relations3
        dim = len(self.basis(arity))
        echelon = EchelonBasis(dim)
        for rel in rels:
            v = self._vector(rel)
            for perm in itertools.permutations(range(1, arity + 1)):
                echelon.add(self.act(arity, perm, v))
        rows = [r for _, r in echelon.rows()]
        return rref(RationalMatrix.from_sparse_rows(rows, dim))[0]

    def relation_dim(self, arity: int) -> int:
        return len(self.relation_space(arity).nonzero_rows())

    def relation_vectors(self, arity: int) -> list[RelationVector]:
        basis = self.basis(arity)
        out = []
        for row in self.relation_space(arity).nonzero_rows():
            terms = tuple((basis[j][0], basis[j][1], basis[j][2], basis[j][3], c) for j, c in sorted(row.items()))
            out.append(RelationVector(arity, terms))
        return out

    # ---- serialisation -------------------------------------------------

    @classmethod
    def from_json(cls, data: Mapping) -> "BinaryQuadraticProtoperad":
        if not isinstance(data, Mapping):
            raise PresentationError("$", "expected a JSON object")
        unknown = set(data) - {"schema", "kind", "generators", "relations2", "relations3"}
        if unknown:
            raise PresentationError("$", f"unknown fields {sorted(unknown)}")
        if "schema" in data and data["schema"] != "pkit/1":
            raise PresentationError("schema", f"unsupported schema {data['schema']!r}")
        if "generators" not in data:
            raise PresentationError("generators", "missing")
        gens = []
        for i, g in enumerate(data["generators"]):
            where = f"generators[{i}]"
            if not isinstance(g, Mapping) or "name" not in g or set(g) - {"name", "symmetry"}:
                raise PresentationError(where, "expected fields 'name' and optional 'symmetry'")
            sym = g.get("symmetry", "antisymmetric")
            if sym not in SYMMETRIES:
                raise PresentationError(f"{where}.symmetry", f"expected one of {SYMMETRIES}")
            gens.append(GeneratorSpec(str(g["name"]), sym))
        index = {g.name: i for i, g in enumerate(gens)}
        if len(index) != len(gens):
            raise PresentationError("generators", "generator names must be unique")
        rel = {}
        for key, arity in (("relations2", 2), ("relations3", 3)):
            out = []
            for k, r in enumerate(data.get(key, [])):
                out.append(_parse_relation(r, arity, index, f"{key}[{k}]"))
            rel[key] = tuple(out)
        return cls(tuple(gens), rel["relations2"], rel["relations3"])

    @classmethod
    def load(cls, path) -> "BinaryQuadraticProtoperad":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        def term_json(t):
            b, top, x, y, c = t
            return {"bottom_brick": list(b), "top_brick": list(top), "bottom_gen": self.generators[x].name,
                    "top_gen": self.generators[y].name, "coeff": str(c)}

        return {
            "schema": "pkit/1",
            "generators": [{"name": g.name, "symmetry": g.symmetry} for g in self.generators],
            "relations2": [{"terms": [term_json(t) for t in r.terms]} for r in self.relations2],
            "relations3": [{"terms": [term_json(t) for t in r.terms]} for r in self.relations3],
        }


def _parse_relation(r, arity: int, index: Mapping[str, int], where: str) -> RelationVector:
    if not isinstance(r, Mapping) or set(r) != {"terms"}:
        raise PresentationError(where, "expected an object with a 'terms' list")
    terms = []
    fields = {"bottom_brick", "top_brick", "bottom_gen", "top_gen", "coeff"}
    for t, term in enumerate(r["terms"]):
        tw = f"{where}.terms[{t}]"
        if not isinstance(term, Mapping):
            raise PresentationError(tw, "expected an object")
        missing = fields - set(term)
        extra = set(term) - fields
        if missing:
            raise PresentationError(f"{tw}.{sorted(missing)[0]}", "missing")
        if extra:
            raise PresentationError(f"{tw}.{sorted(extra)[0]}", "unknown field")
        bricks = []
        for name in ("bottom_brick", "top_brick"):
            b = term[name]
            if (not isinstance(b, list) or len(b) != 2 or len(set(b)) != 2
                    or any(not isinstance(s, int) or not 1 <= s <= arity for s in b)):
                raise PresentationError(f"{tw}.{name}", f"expected two distinct inputs in 1..{arity}")
            bricks.append(tuple(b))
        if set(bricks[0]) & set(bricks[1]) == set() or set(bricks[0]) | set(bricks[1]) != set(range(1, arity + 1)):
            raise PresentationError(tw, f"bricks do not form a connected wall on 1..{arity}")
        for name in ("bottom_gen", "top_gen"):
            if term[name] not in index:
                raise PresentationError(f"{tw}.{name}", f"unknown generator {term[name]!r}")
        try:
            c = as_rational(term["coeff"])
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise PresentationError(f"{tw}.coeff", str(exc)) from None
        terms.append((bricks[0], bricks[1], index[term["bottom_gen"]], index[term["top_gen"]], c))
    if not terms:
        raise PresentationError(where, "relation has no terms")
    return RelationVector(arity, tuple(terms))


def _from_space(gens: tuple[GeneratorSpec, ...], space2: RationalMatrix, space3: RationalMatrix) -> BinaryQuadraticProtoperad:
    out = {}
    for arity, space in ((2, space2), (3, space3)):
        basis = weight2_basis(len(gens), arity)
        out[arity] = tuple(
            RelationVector(arity, tuple((basis[j][0], basis[j][1], basis[j][2], basis[j][3], c)
                                        for j, c in sorted(row.items())))
            for row in space.nonzero_rows())
    return BinaryQuadraticProtoperad(gens, out[2], out[3])


def dual_presentation(p: BinaryQuadraticProtoperad) -> BinaryQuadraticProtoperad:
    """Generators dualised with unchanged symmetry; relations the orthogonal complements."""
    gens = tuple(GeneratorSpec(dual_name(g.name), g.symmetry) for g in p.generators)
    return _from_space(gens, orthogonal_complement(p.relation_space(2)), orthogonal_complement(p.relation_space(3)))


def free_presentation(gens: Sequence[GeneratorSpec]) -> BinaryQuadraticProtoperad:
    return BinaryQuadraticProtoperad(tuple(gens))


def dlie() -> BinaryQuadraticProtoperad:
    """The double Lie protoperad, from the shipped presentation file."""
    return BinaryQuadraticProtoperad.load(Path(__file__).with_name("data") / "dlie.json")


# ---- dimensions ---------------------------------------------------------


def free_dim(gens: Sequence[GeneratorSpec], n: int, rho: int) -> int:
    return len(enum_walls(n, rho, {2})) * len(gens) ** rho


def ind_dim(dims: Callable[[int], int] | Mapping[int, int], n: int) -> int:
    d = dims(n) if callable(dims) else dims.get(n, 0)
    return math.factorial(n) * d


# ---- the algebras A(P, n) -----------------------------------------------


@lru_cache(maxsize=None)
def generator_triples(n: int, m: int) -> tuple[tuple[int, int, int], ...]:
    """Generators (i, j, label) of A(P, n) in increasing default order.

    Index pairs are ordered right-lexicographically: (i, j) < (k, l) when
    j < l, or j == l and i < k; the generator label breaks ties.
    """
    return tuple(sorted(((i, j, v) for i in range(1, n + 1) for j in range(i + 1, n + 1) for v in range(m)),
                        key=lambda t: (t[1], t[0], t[2])))


@lru_cache(maxsize=None)
def generator_lookup(n: int, m: int) -> dict[tuple[int, int, int], int]:
    return {t: k for k, t in enumerate(generator_triples(n, m))}


def _gen_name(name: str, i: int, j: int, n: int) -> str:
    return f"{name}{i}{j}" if n < 10 else f"{name}{i}.{j}"


def build_algebra(p: BinaryQuadraticProtoperad, n: int) -> QuadraticAlgebra:
    """Quadratic presentation of A(P, n) from the labelled procedures."""
    if n < 2:
        raise ValueError("A(P, n) needs n >= 2")
    m = p.ngens
    triples = generator_triples(n, m)
    look = generator_lookup(n, m)
    names = tuple(_gen_name(p.generators[v].name, i, j, n) for i, j, v in triples)
    supports = tuple(frozenset((i, j)) for i, j, _ in triples)
    rels = []
    for arity in (2, 3):
        basis = p.basis(arity)
        rows = p.relation_space(arity).nonzero_rows()
        if not rows:
            continue
        for sigma in itertools.combinations(range(1, n + 1), arity):
            for row in rows:
                comb = {}
                for jcol, c in row.items():
                    b, t, x, y = basis[jcol]
                    w = (look[(sigma[b[0] - 1], sigma[b[1] - 1], x)], look[(sigma[t[0] - 1], sigma[t[1] - 1], y)])
                    comb[w] = comb.get(w, 0) + c
                rels.append(comb)
    # parallel bricks commute
    for g1, g2 in itertools.combinations(range(len(triples)), 2):
        i, j, _ = triples[g1]
        a, b, _ = triples[g2]
        if not {i, j} & {a, b}:
            rels.append({(g1, g2): 1, (g2, g1): -1})
    return QuadraticAlgebra.from_relations(names, rels, supports)


def default_order(a: QuadraticAlgebra) -> MonomialOrder:
    return MonomialOrder.identity(a.ngens)


# ---- weight components P^[w](1..m) ------------------------------------


class Components:
    """Weight-graded components of P on bricks, as quotients of connected words.

    ``P^[w](1..m)`` is the summand of A(P, m) in degree w spanned by words
    whose index pairs connect all of 1..m.  Basis elements are words in the
    generators of A(P, m) (local labels).  Bricks of a wall over 1..n are
    relabelled monotonically onto 1..m.
    """

    def __init__(self, p: BinaryQuadraticProtoperad):
        self.p = p
        self._algebras: dict[int, QuadraticAlgebra] = {}
        self._quot: dict[tuple[int, int], LinearQuotient] = {}

    def algebra(self, m: int) -> QuadraticAlgebra:
        if m not in self._algebras:
            self._algebras[m] = build_algebra(self.p, m)
        return self._algebras[m]

    def quotient(self, m: int, w: int) -> LinearQuotient | None:
        if m < 2 or w < m - 1:
            return None
        key = (m, w)
        if key not in self._quot:
            a = self.algebra(m)
            triples = generator_triples(m, self.p.ngens)
            full = ((tuple(range(1, m + 1))),)
            words = [word for word in itertools.product(range(a.ngens), repeat=w)
                     if graph_partition(m, (triples[x][:2] for x in word)) == full]
            self._quot[key] = LinearQuotient(a, w, default_order(a), words)
        return self._quot[key]

    def basis(self, m: int, w: int) -> list[tuple[int, ...]]:
        q = self.quotient(m, w)
        return [] if q is None else q.basis

    def dim(self, m: int, w: int) -> int:
        return len(self.basis(m, w))

    def globalize(self, brick: Brick, word: Sequence[int]) -> tuple[tuple[int, int, int], ...]:
        triples = generator_triples(len(brick), self.p.ngens)
        return tuple((brick[triples[x][0] - 1], brick[triples[x][1] - 1], triples[x][2]) for x in word)

    def localize(self, brick: Brick, gword: Iterable[tuple[int, int, int]]) -> tuple[int, ...]:
        pos = {s: k + 1 for k, s in enumerate(brick)}
        look = generator_lookup(len(brick), self.p.ngens)
        return tuple(look[(pos[i], pos[j], v)] for i, j, v in gword)

    def reduce(self, brick: Brick, gword: Sequence[tuple[int, int, int]]) -> dict[tuple[int, ...], Fraction]:
        """Class of a connected global word supported on ``brick`` in the basis of P(brick)."""
        q = self.quotient(len(brick), len(gword))
        return q.reduce(self.localize(brick, gword))


# ---- Koszulness driver --------------------------------------------------


@dataclass
class ArityResult:
    n: int
    certificate: Certificate
    via: str  # "algebra", "dual" or "none"
    dual_certificate: Certificate | None = None
    hilbert: dict | None = None
    homology: list | None = None
    cross_checks_passed: bool = True


@dataclass
class KoszulVerdict:
    status: str
    max_arity: int
    results: list[ArityResult] = field(default_factory=list)
    failed_arity: int | None = None

    @property
    def certified(self) -> bool:
        return self.failed_arity is None

    def label(self) -> str:
        if self.certified:
            return f"CertifiedThroughArity({self.max_arity})"
        return f"InconclusiveAtArity({self.failed_arity})"


def _check_arity(p: BinaryQuadraticProtoperad, n: int, bar_cross_check_arity: int, hilbert_degree: int,
                 order_budget: int, bar_max_weight: int, seed: int) -> ArityResult:
    from .barhom import algebra_quotients, connected_bar_component, homology_ranks
    from .quadalg import RewriteQuotient

    a = build_algebra(p, n)
    dual = quadratic_dual(a)
    orders = candidate_orders(default_order(a), order_budget, seed)
    cert = certify_koszul(a, orders)
    # Koszulness of the quadratic dual is equivalent, so its certificate is always recorded
    dual_cert = certify_koszul(dual, orders)
    via = "algebra" if cert.certified else ("dual" if dual_cert.certified else "none")
    res = ArityResult(n, cert, via, dual_cert)
    if via == "none":
        res.cross_checks_passed = False
        return res
    if cert.certified and dual_cert.certified:
        ha = hilbert_coeffs(cert.witness.rules, hilbert_degree, check=False)
        hd = hilbert_coeffs(dual_cert.witness.rules, hilbert_degree, check=False)
        holds = hilbert_identity_holds(ha, hd)
        res.hilbert = {"algebra": ha, "dual": hd, "identity_holds": holds}
        res.cross_checks_passed &= holds
    if n <= bar_cross_check_arity:
        if cert.certified:
            quot = {d: RewriteQuotient(cert.witness.rules, d) for d in range(1, bar_max_weight + 1)}
        else:
            quot = algebra_quotients(a, bar_max_weight)
        rows = []
        for rho in range(1, bar_max_weight + 1):
            dims = homology_ranks(connected_bar_component(a, rho, n, quot)).by_degree(rho)
            concentrated = all(d == rho or v == 0 for d, v in dims.items())
            rows.append({"weight": rho, "homology": {str(d): v for d, v in dims.items()},
                         "concentrated": concentrated})
            res.cross_checks_passed &= concentrated
        res.homology = rows
    return res


def check_koszul(p: BinaryQuadraticProtoperad, max_arity: int = 5, bar_cross_check_arity: int = 3,
                 hilbert_degree: int = 6, order_budget: int = 8, bar_max_weight: int = 4,
                 seed: int = 0, workers: int = 1) -> KoszulVerdict:
    """Certify A(P, n) for n = 2..N by rewriting, with bar homology cross-checks for n <= M.

    A certificate at every arity up to N is evidence, not a proof, that P is
    Koszul: the criterion needs every n.
    """
    if max_arity < 2:
        raise ValueError("max_arity must be at least 2")
    args = (bar_cross_check_arity, hilbert_degree, order_budget, bar_max_weight, seed)
    arities = range(2, max_arity + 1)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_check_arity, p, n, *args) for n in arities]
            all_results = [f.result() for f in futures]
    else:
        all_results = []
        for n in arities:
            all_results.append(_check_arity(p, n, *args))
            if not all_results[-1].cross_checks_passed:
                break
    results = []
    failed = None
    for res in sorted(all_results, key=lambda r: r.n):
        results.append(res)
        if not res.cross_checks_passed:
            failed = res.n
            break
    status = f"CertifiedThroughArity({max_arity})" if failed is None else f"InconclusiveAtArity({failed})"
    return KoszulVerdict(status, max_arity, results, failed)

def koszul_dual_dim(p: BinaryQuadraticProtoperad, n: int, rho: int, comp: Components | None = None) -> int:
    """Dimension of the weight-rho part of the Koszul dual on 1..n, as a bar kernel."""
    from .barhom import koszul_dual_dim as kernel_dim

    return kernel_dim(p, n, rho, comp)
