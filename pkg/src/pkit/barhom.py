"""Bar-type chain complexes over the rationals and their homology.

Three complexes are built, each at a fixed weight:

* the reduced bar complex of a quadratic algebra, basis ``(a1|...|ap)`` of
  normal words, differential ``sum_i (-1)^i (...|a_i a_{i+1}|...)``;
* the normalized bar complex of a protoperad: leveled walls whose bricks carry
  basis elements of the weight components, differential
  ``sum_i (-1)^i (merge levels i and i+1)``;
* the protoperadic bar complex: walls whose bricks carry basis elements, each
  brick of degree one, differential contracting covering pairs of bricks.

Boundary matrices map degree d to degree d-1; rows index the target basis.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .exactq import RationalMatrix, kernel_basis_sparse, rank, stack
from .protoperad import BinaryQuadraticProtoperad, Components
from .quadalg import (
    LinearQuotient,
    MonomialOrder,
    QuadraticAlgebra,
    RewriteQuotient,
    check_confluence,
    derive_rewrite_system,
)
from .walls import Brick, Partition, Wall, _brick_key, enum_leveled_walls, enum_walls, graph_partition

Label = Hashable
BRUTE_FORCE_LIMIT = 4


class NotAComplex(ArithmeticError):
    pass


class DimensionsUnavailable(RuntimeError):
    pass


class TruncationExceeded(ValueError):
    pass


@dataclass(frozen=True)
class GradedBasis:
    """Ordered labels per (degree, weight)."""

    spaces: Mapping[tuple[int, int], tuple[Label, ...]]

    def labels(self, degree: int, weight: int) -> tuple[Label, ...]:
        return self.spaces.get((degree, weight), ())

    def dim(self, degree: int, weight: int) -> int:
        return len(self.labels(degree, weight))

    def bidegrees(self) -> list[tuple[int, int]]:
        return sorted(self.spaces)

    def index(self, degree: int, weight: int) -> dict[Label, int]:
        return {lab: i for i, lab in enumerate(self.labels(degree, weight))}


@dataclass(frozen=True)
class ChainComplex:
    basis: GradedBasis
    boundaries: Mapping[tuple[int, int], RationalMatrix]

    def boundary(self, degree: int, weight: int) -> RationalMatrix:
        """Matrix of d from (degree, weight) to (degree - 1, weight)."""
        m = self.boundaries.get((degree, weight))
        if m is None:
            return RationalMatrix.zeros(self.basis.dim(degree - 1, weight), self.basis.dim(degree, weight))
        return m

    def dims(self, weight: int) -> dict[int, int]:
        return {d: len(ls) for (d, w), ls in sorted(self.basis.spaces.items()) if w == weight}

    def check_square_zero(self) -> bool:
        for (d, w) in self.basis.bidegrees():
            if d - 1 < 0:
                continue
            prod = self.boundary(d - 1, w) @ self.boundary(d, w)
            if not prod.is_zero():
                return False
        return True


@dataclass(frozen=True)
class HomologyReport:
    dims: Mapping[tuple[int, int], int]

    def by_degree(self, weight: int) -> dict[int, int]:
        return {d: v for (d, w), v in sorted(self.dims.items()) if w == weight}

    def table(self, n: int | None = None) -> list[dict]:
        return [{"n": n, "weight": w, "degree": d, "dim": v} for (d, w), v in sorted(self.dims.items(), key=lambda t: (t[0][1], t[0][0]))]


def homology_ranks(c: ChainComplex) -> HomologyReport:
    if not c.check_square_zero():
        raise NotAComplex("consecutive boundary maps do not compose to zero")
    ranks = {}

    def rk(d, w):
        if (d, w) not in ranks:
            ranks[(d, w)] = rank(c.boundary(d, w)) if c.basis.dim(d, w) and c.basis.dim(d - 1, w) else 0
        return ranks[(d, w)]

    out = {}
    for (d, w) in c.basis.bidegrees():
        out[(d, w)] = c.basis.dim(d, w) - rk(d, w) - rk(d + 1, w)
    return HomologyReport(out)


def homology_json(report: HomologyReport, n: int | None = None) -> list[dict]:
    return report.table(n)


def homology_csv(report: HomologyReport, n: int | None = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["n", "weight", "degree", "dim"], lineterminator="\n")
    writer.writeheader()
    writer.writerows(report.table(n))
    return buf.getvalue()


def _build(weight: int, spaces: dict[int, list[Label]],
           differential: Callable[[Label], Mapping[Label, Fraction]], sort_key=None) -> ChainComplex:
    ordered = {(d, weight): tuple(sorted(ls, key=sort_key)) for d, ls in spaces.items() if ls}
    basis = GradedBasis(ordered)
    bounds = {}
    for (d, w), labels in ordered.items():
        target = basis.index(d - 1, w)
        if not target:
            continue
        cols: dict[int, dict[int, Fraction]] = {}
        for j, lab in enumerate(labels):
            for t, c in differential(lab).items():
                if c:
                    i = target.get(t)
                    if i is None:
                        raise KeyError(f"boundary of {lab!r} leaves the basis: {t!r}")
                    cols.setdefault(i, {})[j] = cols.get(i, {}).get(j, 0) + c
        rows = {i: {j: v for j, v in r.items() if v} for i, r in cols.items()}
        bounds[(d, w)] = RationalMatrix(len(target), len(labels), rows)
    return ChainComplex(basis, bounds)


# ---- algebra bar ---------------------------------------------------------


def _compositions(total: int, parts: int, minimum: int = 1):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(minimum, total - minimum * (parts - 1) + 1):
        for rest in _compositions(total - first, parts - 1, minimum):
            yield (first,) + rest


def algebra_quotients(a: QuadraticAlgebra, max_degree: int, order: MonomialOrder | None = None,
                      brute_force_limit: int = BRUTE_FORCE_LIMIT) -> dict[int, object]:
    """Degree components 1..max_degree, by rewriting when confluent, else by linear algebra."""
    order = order or MonomialOrder.identity(a.ngens)
    rs = derive_rewrite_system(a, order)
    if check_confluence(rs).confluent:
        return {d: RewriteQuotient(rs, d) for d in range(1, max_degree + 1)}
    if max_degree > brute_force_limit:
        raise DimensionsUnavailable(f"no confluent rules and degree {max_degree} exceeds {brute_force_limit}")
    return {d: LinearQuotient(a, d, order) for d in range(1, max_degree + 1)}


def partition_split(label: Sequence[Sequence[int]], supports: Sequence[Iterable[int]], n: int) -> Partition:
    """Partition of 1..n spanned by the index sets of every generator in a bar label."""
    return graph_partition(n, (supports[x] for word in label for x in word))


def bar_alg_complex(a: QuadraticAlgebra, weight: int, quotients: Mapping[int, object] | None = None,
                    keep: Callable[[tuple], bool] | None = None) -> ChainComplex:
    if weight < 1:
        raise ValueError("weight must be positive")
    q = quotients or algebra_quotients(a, weight)
    spaces: dict[int, list] = {}
    for p in range(1, weight + 1):
        labels = []
        for comp in _compositions(weight, p):
            for words in itertools.product(*(q[w].basis for w in comp)):
                if keep is None or keep(words):
                    labels.append(tuple(words))
        spaces[p] = labels

    def d(label):
        out: dict = {}
        for i in range(len(label) - 1):
            sign = -1 if i % 2 else 1
            prod = label[i] + label[i + 1]
            for w, c in q[len(prod)].reduce(prod).items():
                new = label[:i] + (w,) + label[i + 2:]
                out[new] = out.get(new, 0) + sign * c
        return out

    return _build(weight, spaces, d)


def connected_bar_component(a: QuadraticAlgebra, weight: int, n: int | None = None,
                            quotients: Mapping[int, object] | None = None) -> ChainComplex:
    """Summand of the bar complex of A(P, n) on labels whose index pairs connect 1..n."""
    if a.supports is None:
        raise ValueError("connected components need an algebra built from a protoperad")
    if n is None:
        n = max(max(s) for s in a.supports)
    full = (tuple(range(1, n + 1)),)
    sup = [tuple(s) for s in a.supports]
    return bar_alg_complex(a, weight, quotients, keep=lambda lab: partition_split(lab, sup, n) == full)


# ---- walls with labelled bricks -------------------------------------------


def _sign(seq: Sequence[int]) -> int:
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


def _weight_splits(bricks: Sequence[Brick], weight: int):
    lows = [len(b) - 1 for b in bricks]
    spare = weight - sum(lows)
    if spare < 0:
        return
    for extra in _compositions(spare + len(bricks), len(bricks)):
        yield tuple(lo + e - 1 for lo, e in zip(lows, extra))


def _labelled(comp: Components, bricks: Sequence[Brick], weight: int):
    for ws in _weight_splits(bricks, weight):
        yield from itertools.product(*(comp.basis(len(b), w) for b, w in zip(bricks, ws)))


def _compose(comp: Components, pieces: Sequence[tuple[Brick, tuple]]) -> tuple[Brick, dict]:
    """Compose labelled bricks, listed bottom first, into one brick on their union."""
    support = tuple(sorted(set().union(*(set(b) for b, _ in pieces))))
    gword = tuple(g for b, w in pieces for g in comp.globalize(b, w))
    return support, comp.reduce(support, gword)


def _sequence_levels(seq: Sequence[Brick]) -> list[int]:
    levels = []
    for i, b in enumerate(seq):
        lvl = 0
        for j in range(i):
            if not set(b).isdisjoint(seq[j]):
                lvl = max(lvl, levels[j] + 1)
        levels.append(lvl)
    return levels


def _canonical_positions(seq: Sequence[Brick]) -> list[int]:
    levels = _sequence_levels(seq)
    keys = sorted(range(len(seq)), key=lambda i: (levels[i], _brick_key(seq[i])))
    pos = [0] * len(seq)
    for p, i in enumerate(keys):
        pos[i] = p
    return pos


def _size_cap(n: int, degree: int, weight: int) -> set[int]:
    return set(range(2, min(n, weight - degree + 2) + 1))


def proto_bar_basis(comp: Components, n: int, degree: int, weight: int) -> list[tuple[Wall, tuple]]:

    sizes = _size_cap(n, degree, weight)
    if not sizes:
        return []
    out = []
    for w in enum_walls(n, degree, sizes):
        for words in _labelled(comp, w.bricks, weight):
            out.append((w, tuple(words)))
    return out


def _wall_key(label):
    w, words = label
    return (w.levels, words)


def _proto_d(comp: Components):
    def d(label):
        wall, words = label
        bricks = wall.bricks
        k = len(bricks)
        out: dict = {}
        for a, b in wall.covers:
            eps = -1 if (a + b - 1) % 2 else 1
            support, comb = _compose(comp, [(bricks[a], words[a]), (bricks[b], words[b])])
            down = [c for c in range(k) if c not in (a, b) and (wall.below(c, a) or wall.below(c, b))]
            up = [c for c in range(k) if c not in (a, b) and c not in down]
            seq = [bricks[c] for c in down] + [support] + [bricks[c] for c in up]
            pos = _canonical_positions(seq)
            where = {c: pos[i] for i, c in enumerate(down)}
            where["C"] = pos[len(down)]
            where.update({c: pos[len(down) + 1 + i] for i, c in enumerate(up)})
            rest = [c for c in range(k) if c not in (a, b)]
            sgn = eps * _sign([where["C"]] + [where[c] for c in rest])
            new_wall = Wall.from_sequence(seq)
            for word, coeff in comb.items():
                slots = [None] * (k - 1)
                slots[where["C"]] = word
                for c in rest:
                    slots[where[c]] = words[c]
                key = (new_wall, tuple(slots))
                out[key] = out.get(key, 0) + sgn * coeff
        return out

    return d


def proto_bar_complex(p: BinaryQuadraticProtoperad, n: int, weight: int,
                      comp: Components | None = None) -> ChainComplex:
    """Protoperadic bar complex of P on 1..n at a fixed weight, degrees 1..weight."""
    comp = comp or Components(p)
    spaces = {r: proto_bar_basis(comp, n, r, weight) for r in range(1, weight + 1)}
    return _build(weight, spaces, _proto_d(comp), sort_key=_wall_key)


def proto_bar_differential(p: BinaryQuadraticProtoperad, n: int, weight: int,
                           comp: Components | None = None) -> RationalMatrix:
    """Top part of the bar differential: weight-one bricks only, to one contraction."""
    if weight < 1:
        raise ValueError("weight must be positive")
    comp = comp or Components(p)
    src = proto_bar_basis(comp, n, weight, weight)
    tgt = proto_bar_basis(comp, n, weight - 1, weight) if weight > 1 else []
    c = _build(weight, {weight: src, weight - 1: tgt}, _proto_d(comp), sort_key=_wall_key)
    return c.boundary(weight, weight)


def koszul_dual_dim(p: BinaryQuadraticProtoperad, n: int, weight: int, comp: Components | None = None) -> int:
    m = proto_bar_differential(p, n, weight, comp)
    return m.ncols - rank(m)


# ---- normalized bar --------------------------------------------------------


def _leveled_key(label):
    return label


def normalized_bar_basis(comp: Components, n: int, degree: int, weight: int) -> list[tuple]:

    out = []
    for bricks in range(degree, weight + 1):
        sizes = _size_cap(n, bricks, weight)
        if not sizes:
            continue
        for lw in enum_leveled_walls(n, degree, bricks, sizes):
            flat = [b for level in lw.levels for b in level]
            for words in _labelled(comp, flat, weight):
                it = iter(words)
                out.append(tuple(tuple((b, next(it)) for b in level) for level in lw.levels))
    return out


def _merge_levels(comp: Components, bottom, top) -> list[tuple[tuple, Fraction]]:
    pieces = [(0, b, w) for b, w in bottom] + [(1, b, w) for b, w in top]
    parent = list(range(len(pieces)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in itertools.combinations(range(len(pieces)), 2):
        if not set(pieces[i][1]).isdisjoint(pieces[j][1]):
            parent[find(i)] = find(j)
    groups: dict[int, list] = {}
    for i in range(len(pieces)):
        groups.setdefault(find(i), []).append(pieces[i])
    factors = []
    for g in groups.values():
        if len(g) == 1:
            factors.append([((g[0][1], g[0][2]), Fraction(1))])
            continue
        g.sort(key=lambda t: t[0])
        support, comb = _compose(comp, [(b, w) for _, b, w in g])
        factors.append([((support, w), c) for w, c in comb.items()])
    out = []
    for choice in itertools.product(*factors):
        coeff = Fraction(1)
        for _, c in choice:
            coeff *= c
        level = tuple(sorted((bw for bw, _ in choice), key=lambda t: _brick_key(t[0])))
        out.append((level, coeff))
    return out


def _normalized_d(comp: Components):
    def d(label):
        out: dict = {}
        for i in range(len(label) - 1):
            sign = -1 if i % 2 else 1
            for level, c in _merge_levels(comp, label[i], label[i + 1]):
                new = label[:i] + (level,) + label[i + 2:]
                out[new] = out.get(new, 0) + sign * c
        return out

    return d


def normalized_bar_complex(p: BinaryQuadraticProtoperad, n: int, weight: int,
                           comp: Components | None = None, max_weight: int = 6) -> ChainComplex:
    """Normalized bar complex on 1..n at a fixed weight, degrees 1..weight."""
    if weight > max_weight:
        raise TruncationExceeded(f"weight {weight} exceeds the truncation bound {max_weight}")
    comp = comp or Components(p)
    spaces = {q: normalized_bar_basis(comp, n, q, weight) for q in range(1, weight + 1)}
    return _build(weight, spaces, _normalized_d(comp), sort_key=_leveled_key)


# ---- levelization ----------------------------------------------------------


def linear_extensions(wall: Wall) -> list[tuple[int, ...]]:
    """Orderings of brick indices compatible with the wall's partial order."""
    k = len(wall.bricks)
    preds = [frozenset(a for a in range(k) if wall.below(a, b)) for b in range(k)]
    out = []

    def rec(chosen: list, used: frozenset):
        if len(chosen) == k:
            out.append(tuple(chosen))
            return
        for b in range(k):
            if b not in used and preds[b] <= used:
                chosen.append(b)
                rec(chosen, used | {b})
                chosen.pop()

    rec([], frozenset())
    return out


def levelize(label) -> dict[tuple, int]:
    wall, words = label
    bricks = wall.bricks
    out = {}
    for ext in linear_extensions(wall):
        key = tuple(((bricks[b], words[b]),) for b in ext)
        out[key] = out.get(key, 0) + _sign(ext)
    return out


def levelization_matrix(p: BinaryQuadraticProtoperad, n: int, weight: int, degree: int | None = None,
                        comp: Components | None = None,
                        bar: ChainComplex | None = None, nbar: ChainComplex | None = None) -> RationalMatrix:
    """Matrix of e from the protoperadic bar to the normalized bar in one degree."""
    comp = comp or Components(p)
    degree = weight if degree is None else degree
    bar = bar or proto_bar_complex(p, n, weight, comp)
    nbar = nbar or normalized_bar_complex(p, n, weight, comp)
    src = bar.basis.labels(degree, weight)
    tgt = nbar.basis.index(degree, weight)
    rows: dict[int, dict[int, Fraction]] = {}
    for j, lab in enumerate(src):
        for key, c in levelize(lab).items():
            rows.setdefault(tgt[key], {})[j] = c
    return RationalMatrix(len(tgt), len(src), rows)


def levelization_map(p: BinaryQuadraticProtoperad, n: int, weight: int,
                     comp: Components | None = None) -> tuple[ChainComplex, ChainComplex, dict[int, RationalMatrix]]:
    comp = comp or Components(p)
    bar = proto_bar_complex(p, n, weight, comp)
    nbar = normalized_bar_complex(p, n, weight, comp)
    maps = {d: levelization_matrix(p, n, weight, d, comp, bar, nbar) for d in range(1, weight + 1)}
    return bar, nbar, maps


def chain_map_holds(src: ChainComplex, tgt: ChainComplex, maps: Mapping[int, RationalMatrix], weight: int) -> bool:
    for d in range(2, weight + 1):
        left = maps[d - 1] @ src.boundary(d, weight)
        right = tgt.boundary(d, weight) @ maps[d]
        if left != right:
            return False
    return True


def induced_homology_iso(src: ChainComplex, tgt: ChainComplex, maps: Mapping[int, RationalMatrix],
                         weight: int) -> bool:
    """Whether the chain map is bijective on homology in every degree."""
    hs = homology_ranks(src).by_degree(weight)
    ht = homology_ranks(tgt).by_degree(weight)
    for d in range(1, weight + 1):
        if hs.get(d, 0) != ht.get(d, 0):
            return False
        cycles = kernel_basis_sparse(src.boundary(d, weight)) if src.basis.dim(d - 1, weight) else [
            {j: Fraction(1)} for j in range(src.basis.dim(d, weight))]
        images = [dict(enumerate(maps[d] @ [z.get(j, 0) for j in range(maps[d].ncols)])) for z in cycles]
        bnd = tgt.boundary(d + 1, weight).transpose()
        width = tgt.basis.dim(d, weight)
        blocks = [RationalMatrix.from_sparse_rows(images, width), bnd] if width else []
        if not blocks:
            continue
        r_all = rank(stack(blocks))
        r_b = rank(bnd)
        if r_all - r_b != hs.get(d, 0):
            return False
    return True
