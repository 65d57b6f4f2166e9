"""Quadratic algebras over Q, their quadratic duals, and the rewriting method.

Words are tuples of generator indices.  A quadratic algebra stores its
relations as a matrix in reduced row-echelon form whose columns index the
degree-two words, word ``(a, b)`` at column ``a * g + b``.

Monomial orders compare words of equal length left-lexicographically on
generator ranks.  Rewriting rules orient each relation towards its largest
word; a system is confluent when every critical monomial ``uvw`` (with ``uv``
and ``vw`` both rule heads) reduces to a single normal form.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .exactq import (
    EchelonBasis,
    RationalMatrix,
    as_rational,
    orthogonal_complement,
    rank,
    rref,
    row_space_equal,
)

Word = tuple[int, ...]
Combination = dict[Word, Fraction]


class NotConfluent(RuntimeError):
    pass


class PresentationError(ValueError):
    pass


def _add(target: Combination, word: Word, coeff: Fraction) -> None:
    x = target.get(word, 0) + coeff
    if x:
        target[word] = x
    else:
        target.pop(word, None)


@dataclass(frozen=True, eq=False)
class QuadraticAlgebra:
    generators: tuple[str, ...]
    relations: RationalMatrix
    # index set of each generator, only for algebras built from a protoperad
    supports: tuple[frozenset, ...] | None = None

    def __post_init__(self):
        g = len(self.generators)
        if len(set(self.generators)) != g:
            raise PresentationError("generator names must be unique")
        if self.relations.ncols != g * g:
            raise PresentationError(f"relation matrix needs {g * g} columns, got {self.relations.ncols}")
        reduced, _ = rref(self.relations)
        object.__setattr__(self, "relations", reduced)

    @classmethod
    def from_relations(cls, generators: Sequence[str], relations: Iterable[Mapping[Word, object]],
                       supports=None) -> "QuadraticAlgebra":
        g = len(generators)
        rows = []
        for rel in relations:
            row: dict[int, Fraction] = {}
            for (a, b), c in rel.items():
                q = as_rational(c)
                if q:
                    j = a * g + b
                    row[j] = row.get(j, 0) + q
            rows.append(row)
        return cls(tuple(generators), RationalMatrix.from_sparse_rows(rows, g * g), supports)

    @property
    def ngens(self) -> int:
        return len(self.generators)

    @property
    def relation_dim(self) -> int:
        return self.relations.nrows - sum(1 for r in self.relations.sparse_rows() if not r)

    def word(self, col: int) -> Word:
        return divmod(col, self.ngens)

    def relation_combinations(self) -> list[Combination]:
        g = self.ngens
        return [{divmod(j, g): v for j, v in row.items()} for row in self.relations.nonzero_rows()]

    def format_word(self, w: Word) -> str:
        return " ".join(self.generators[x] for x in w) if w else "1"

    def to_json(self) -> dict:
        rels = []
        for comb in self.relation_combinations():
            rels.append([{"word": [self.generators[a], self.generators[b]], "coeff": str(c)}
                         for (a, b), c in sorted(comb.items())])
        return {"generators": list(self.generators), "relations": rels}

    @classmethod
    def from_json(cls, data: Mapping) -> "QuadraticAlgebra":
        unknown = set(data) - {"schema", "kind", "generators", "relations", "order"}
        if unknown:
            raise PresentationError(f"unknown fields {sorted(unknown)}")
        gens = [str(x) for x in data["generators"]]
        index = {name: i for i, name in enumerate(gens)}
        rels = []
        for k, rel in enumerate(data.get("relations", [])):
            comb: dict[Word, Fraction] = {}
            for t, term in enumerate(rel):
                where = f"relations[{k}][{t}]"
                if not isinstance(term, Mapping) or set(term) != {"word", "coeff"}:
                    raise PresentationError(f"{where}: expected fields 'word' and 'coeff'")
                w = term["word"]
                if len(w) != 2 or any(x not in index for x in w):
                    raise PresentationError(f"{where}.word: expected two known generator names")
                try:
                    c = as_rational(term["coeff"])
                except (TypeError, ValueError, ZeroDivisionError) as exc:
                    raise PresentationError(f"{where}.coeff: {exc}") from None
                key = (index[w[0]], index[w[1]])
                comb[key] = comb.get(key, 0) + c
            rels.append(comb)
        return cls.from_relations(gens, rels)


def dual_name(name: str) -> str:
    return name[:-1] if name.endswith("*") else name + "*"


def quadratic_dual(a: QuadraticAlgebra, rename: bool = True) -> QuadraticAlgebra:
    """Dual algebra with relations the orthogonal complement of R in V (x) V."""
    perp = orthogonal_complement(a.relations)
    names = tuple(dual_name(x) for x in a.generators) if rename else a.generators
    return QuadraticAlgebra(names, perp, a.supports)


@dataclass(frozen=True)
class MonomialOrder:
    """``rank[i]`` is the position of generator i, smallest first."""

    rank: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.rank) != list(range(len(self.rank))):
            raise ValueError("generator ranks must be a permutation")

    @classmethod
    def from_sequence(cls, increasing: Sequence[int]) -> "MonomialOrder":
        rank = [0] * len(increasing)
        for r, i in enumerate(increasing):
            rank[i] = r
        return cls(tuple(rank))

    @classmethod
    def identity(cls, g: int) -> "MonomialOrder":
        return cls(tuple(range(g)))

    def increasing(self) -> list[int]:
        return sorted(range(len(self.rank)), key=self.rank.__getitem__)

    def key(self, w: Word) -> tuple:
        return (len(w),) + tuple(self.rank[x] for x in w)

    def reverse(self) -> "MonomialOrder":
        g = len(self.rank)
        return MonomialOrder(tuple(g - 1 - r for r in self.rank))


@dataclass(frozen=True, eq=False)
class RewriteSystem:
    rules: dict[Word, Combination]
    order: MonomialOrder
    ngens: int

    def __post_init__(self):
        key = self.order.key
        for lhs, rhs in self.rules.items():
            for w, c in rhs.items():
                if not c or key(w) >= key(lhs):
                    raise ValueError(f"rule {lhs} -> {rhs} does not decrease")

    @property
    def lhs_set(self) -> frozenset[Word]:
        return frozenset(self.rules)

    def relation_matrix(self) -> RationalMatrix:
        g = self.ngens
        rows = []
        for lhs, rhs in self.rules.items():
            row = {lhs[0] * g + lhs[1]: Fraction(1)}
            for (a, b), c in rhs.items():
                row[a * g + b] = row.get(a * g + b, 0) - c
            rows.append(row)
        return RationalMatrix.from_sparse_rows(rows, g * g)

    def rewrite_at(self, word: Word, pos: int) -> Combination:
        rhs = self.rules[word[pos:pos + 2]]
        head, tail = word[:pos], word[pos + 2:]
        return {head + w + tail: c for w, c in rhs.items()}

    def reducible_positions(self, word: Word) -> list[int]:
        return [i for i in range(len(word) - 1) if word[i:i + 2] in self.rules]

    def is_normal(self, word: Word) -> bool:
        return not self.reducible_positions(word)

    @lru_cache(maxsize=None)
    def _nf(self, word: Word, strategy: str) -> tuple[tuple[Word, Fraction], ...]:
        pos = self.reducible_positions(word)
        if not pos:
            return ((word, Fraction(1)),)
        p = pos[0] if strategy == "left" else pos[-1]
        out: Combination = {}
        for w, c in self.rewrite_at(word, p).items():
            for w2, c2 in self._nf(w, strategy):
                _add(out, w2, c * c2)
        return tuple(sorted(out.items()))


def derive_rewrite_system(a: QuadraticAlgebra, o: MonomialOrder) -> RewriteSystem:
    """Solve each relation for its largest word under ``o``."""
    g = a.ngens
    if len(o.rank) != g:
        raise ValueError("order does not match the generators")
    words = sorted(itertools.product(range(g), repeat=2), key=o.key, reverse=True)
    col_of = {w: i for i, w in enumerate(words)}
    permuted = []
    for comb in a.relation_combinations():
        permuted.append({col_of[w]: c for w, c in comb.items()})
    reduced, pivots = rref(RationalMatrix.from_sparse_rows(permuted, g * g))
    rules: dict[Word, Combination] = {}
    for i, p in enumerate(pivots):
        row = reduced.row(i)
        lhs = words[p]
        rules[lhs] = {words[j]: -v for j, v in row.items() if j != p}
    return RewriteSystem(rules, o, g)


def normal_form(rs: RewriteSystem, w, strategy: str = "left") -> Combination:
    """Exhaustive rewriting of a word or linear combination of words."""
    if strategy not in ("left", "right"):
        raise ValueError("strategy is 'left' or 'right'")
    comb = {tuple(w): Fraction(1)} if not isinstance(w, Mapping) else w
    out: Combination = {}
    for word, c in comb.items():
        for w2, c2 in rs._nf(tuple(word), strategy):
            _add(out, w2, as_rational(c) * c2)
    return out


def critical_monomials(rs: RewriteSystem) -> list[Word]:
    by_first: dict[int, list[Word]] = {}
    for lhs in rs.rules:
        by_first.setdefault(lhs[0], []).append(lhs)
    out = set()
    for (u, v) in rs.rules:
        for (_, w) in by_first.get(v, ()):
            out.add((u, v, w))
    return sorted(out, key=rs.order.key)


def _trace(rs: RewriteSystem, start: Combination, strategy: str = "left", limit: int = 200) -> list[Combination]:
    steps = [dict(start)]
    cur = dict(start)
    for _ in range(limit):
        target = None
        for w in sorted(cur, key=rs.order.key, reverse=True):
            pos = rs.reducible_positions(w)
            if pos:
                target = (w, pos[0] if strategy == "left" else pos[-1])
                break
        if target is None:
            break
        w, p = target
        c = cur.pop(w)
        for w2, c2 in rs.rewrite_at(w, p).items():
            _add(cur, w2, c * c2)
        steps.append(dict(cur))
    return steps


@dataclass
class ConfluenceFailure:
    monomial: Word
    normal_forms: list[Combination]
    traces: list[list[Combination]]


@dataclass
class ConfluenceReport:
    confluent: bool
    critical_count: int
    failures: list[ConfluenceFailure] = field(default_factory=list)


def check_confluence(rs: RewriteSystem) -> ConfluenceReport:
    crit = critical_monomials(rs)
    failures = []
    for m in crit:
        left_step = rs.rewrite_at(m, 0)
        right_step = rs.rewrite_at(m, 1)
        forms = [
            normal_form(rs, left_step, "left"),
            normal_form(rs, left_step, "right"),
            normal_form(rs, right_step, "left"),
            normal_form(rs, right_step, "right"),
            normal_form(rs, m, "left"),
            normal_form(rs, m, "right"),
        ]
        distinct = []
        for f in forms:
            if f not in distinct:
                distinct.append(f)
        if len(distinct) > 1:
            traces = [[{m: Fraction(1)}] + _trace(rs, left_step), [{m: Fraction(1)}] + _trace(rs, right_step)]
            failures.append(ConfluenceFailure(m, distinct, traces))
    return ConfluenceReport(not failures, len(crit), failures)


def normal_words(rs: RewriteSystem, degree: int) -> list[Word]:
    g = rs.ngens
    if degree == 0:
        return [()]
    layer = [(x,) for x in range(g)]
    for _ in range(degree - 1):
        layer = [w + (x,) for w in layer for x in range(g) if (w[-1], x) not in rs.rules]
    return sorted(layer, key=rs.order.key)


def hilbert_coeffs(rs: RewriteSystem, max_degree: int, check: bool = True) -> list[int]:
    """Number of normal words of each length 0..max_degree."""
    if check and not check_confluence(rs).confluent:
        raise NotConfluent("normal words only count dimensions for confluent systems")
    g = rs.ngens
    out = [1]
    if max_degree == 0:
        return out
    counts = [1] * g
    out.append(g)
    for _ in range(max_degree - 1):
        counts = [sum(counts[a] for a in range(g) if (a, b) not in rs.rules) for b in range(g)]
        out.append(sum(counts))
    return out


class LinearQuotient:
    """Degree-d component of a quadratic algebra by direct linear algebra.

    The ideal in degree d is spanned by ``u r v`` for relations r and words
    u, v; the basis of the quotient is the set of words that are not the
    largest word of any echelon row, under the given monomial order.
    ``words`` optionally restricts to a set of degree-d words closed under the
    relations (a direct summand).
    """

    def __init__(self, a: QuadraticAlgebra, degree: int, order: MonomialOrder | None = None,
                 words: Iterable[Word] | None = None):
        self.algebra = a
        self.degree = degree
        self.order = order or MonomialOrder.identity(a.ngens)
        g = a.ngens
        if words is None:
            words = itertools.product(range(g), repeat=degree)
        ws = sorted(set(tuple(w) for w in words), key=self.order.key, reverse=True)
        self._col = {w: i for i, w in enumerate(ws)}
        self._words = ws
        echelon = EchelonBasis(len(ws))
        if degree >= 2:
            rels = a.relation_combinations()
            col = self._col
            for k in range(degree - 1):
                for u in itertools.product(range(g), repeat=k):
                    for v in itertools.product(range(g), repeat=degree - 2 - k):
                        for rel in rels:
                            row = {}
                            hit = miss = False
                            for w, c in rel.items():
                                j = col.get(u + w + v)
                                if j is None:
                                    miss = True
                                else:
                                    hit = True
                                    row[j] = c
                            if hit and miss:
                                raise ValueError("word set is not closed under the relations")
                            if hit:
                                echelon.add(row)
        self._echelon = echelon
        self.basis: list[Word] = sorted((w for w, i in self._col.items() if i not in echelon.pivots),
                                        key=self.order.key)
        self._basis_index = {w: i for i, w in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, w: Word) -> int:
        return self._basis_index[w]

    def reduce(self, word: Word) -> Combination:
        j = self._col.get(tuple(word))
        if j is None:
            raise KeyError(f"word {word} outside this component")
        row = self._echelon.pivots.get(j)
        if row is None:
            return {tuple(word): Fraction(1)}
        return {self._words[k]: -v for k, v in row.items() if k != j}


class RewriteQuotient:
    """Same interface as LinearQuotient, backed by a confluent rewrite system."""

    def __init__(self, rs: RewriteSystem, degree: int, words: Iterable[Word] | None = None):
        self.rs = rs
        self.degree = degree
        allowed = None if words is None else set(map(tuple, words))
        self.basis = [w for w in normal_words(rs, degree) if allowed is None or w in allowed]
        self._basis_index = {w: i for i, w in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, w: Word) -> int:
        return self._basis_index[w]

    def reduce(self, word: Word) -> Combination:
        return normal_form(self.rs, tuple(word))


def algebra_dims(a: QuadraticAlgebra, max_degree: int, order: MonomialOrder | None = None) -> list[int]:
    """Dimensions by linear algebra on the ideal, no confluence needed."""
    return [1] + [LinearQuotient(a, d, order).dim for d in range(1, max_degree + 1)]


def _dims(a: QuadraticAlgebra, degree: int, orders: Sequence[MonomialOrder]) -> tuple[list[int], str]:
    for o in orders:
        rs = derive_rewrite_system(a, o)
        if check_confluence(rs).confluent:
            return hilbert_coeffs(rs, degree, check=False), "normal-words"
    return algebra_dims(a, degree), "ideal-rank"


def koszul_numerical_check(a: QuadraticAlgebra, max_degree: int,
                           orders: Sequence[MonomialOrder] | None = None) -> bool:
    """Test sum_{i+j=d} (-1)^j h_A(i) h_{A!}(j) == [d == 0] for d <= max_degree."""
    orders = list(orders) if orders else [MonomialOrder.identity(a.ngens)]
    ha, _ = _dims(a, max_degree, orders)
    hd, _ = _dims(quadratic_dual(a), max_degree, orders)
    return hilbert_identity_holds(ha, hd)


def hilbert_identity_holds(ha: Sequence[int], hd: Sequence[int]) -> bool:
    top = min(len(ha), len(hd))
    for d in range(top):
        s = sum((-1) ** j * ha[d - j] * hd[j] for j in range(d + 1))
        if s != (1 if d == 0 else 0):
            return False
    return True


@dataclass
class OrderAttempt:
    order: MonomialOrder
    report: ConfluenceReport
    rules: RewriteSystem


@dataclass
class Certificate:
    status: str  # "PBWKoszul" or "Inconclusive"
    algebra: QuadraticAlgebra
    witness: OrderAttempt | None
    attempts: list[OrderAttempt]

    @property
    def certified(self) -> bool:
        return self.status == "PBWKoszul"

    def best(self) -> OrderAttempt:
        if self.witness is not None:
            return self.witness
        return min(self.attempts, key=lambda t: len(t.report.failures))


def candidate_orders(default: MonomialOrder, budget: int = 8, seed: int = 0) -> list[MonomialOrder]:
    """Default order, then (budget > 0) its reverse and up to ``budget`` random orders."""
    out = [default]
    if budget <= 0:
        return out
    rev = default.reverse()
    if rev not in out:
        out.append(rev)
    g = len(default.rank)
    rng = random.Random(seed)
    seen = set(out)
    total = 1
    for k in range(2, g + 1):
        total *= k
    tries = 0
    while len(out) < 2 + budget and len(seen) < total and tries < 50 * budget:
        tries += 1
        perm = list(range(g))
        rng.shuffle(perm)
        o = MonomialOrder.from_sequence(perm)
        if o not in seen:
            seen.add(o)
            out.append(o)
    return out


def certify_koszul(a: QuadraticAlgebra, orders: Sequence[MonomialOrder] | None = None,
                   budget: int = 8, seed: int = 0) -> Certificate:
    """Search for an order under which the rewriting system is confluent."""
    if orders is None:
        orders = candidate_orders(MonomialOrder.identity(a.ngens), budget, seed)
    attempts = []
    for o in orders:
        rs = derive_rewrite_system(a, o)
        att = OrderAttempt(o, check_confluence(rs), rs)
        attempts.append(att)
        if att.report.confluent:
            return Certificate("PBWKoszul", a, att, attempts)
    return Certificate("Inconclusive", a, None, attempts)


def relation_space_equal(a: QuadraticAlgebra, rows: Iterable[Mapping[Word, object]]) -> bool:
    other = QuadraticAlgebra.from_relations(a.generators, rows)
    return row_space_equal(a.relations, other.relations)


def ideal_rank(a: QuadraticAlgebra, degree: int) -> int:
    """Rank of span{u r v} in degree d, built as an explicit matrix."""
    g = a.ngens
    rows = []
    rels = a.relation_combinations()
    for k in range(max(degree - 1, 0)):
        for u in itertools.product(range(g), repeat=k):
            for v in itertools.product(range(g), repeat=degree - 2 - k):
                for rel in rels:
                    row = {}
                    for w, c in rel.items():
                        full = u + w + v
                        idx = 0
                        for x in full:
                            idx = idx * g + x
                        row[idx] = c
                    rows.append(row)
    if not rows:
        return 0
    return rank(RationalMatrix.from_sparse_rows(rows, g ** degree))
