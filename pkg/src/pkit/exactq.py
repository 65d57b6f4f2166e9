"""Exact linear algebra over the rationals.

Matrices are stored sparsely as ``{row: {col: Fraction}}`` with zero entries
dropped.  Every operation returns new objects; nothing is mutated in place
after construction.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Rational = Fraction

SparseRow = dict[int, Fraction]


def as_rational(value) -> Fraction:
    """Coerce ints, strings like ``"-3/4"`` and Fractions to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted; use 'p/q' strings")
    return Fraction(value)


class RationalMatrix:
    """Immutable sparse matrix with Fraction entries."""

    __slots__ = ("nrows", "ncols", "_rows")

    def __init__(self, nrows: int, ncols: int, rows: Mapping[int, Mapping[int, object]] | None = None):
        if nrows < 0 or ncols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        self.nrows = nrows
        self.ncols = ncols
        clean: dict[int, SparseRow] = {}
        for i, row in (rows or {}).items():
            if not 0 <= i < nrows:
                raise IndexError(f"row index {i} out of range for {nrows} rows")
            r: SparseRow = {}
            for j, v in row.items():
                if not 0 <= j < ncols:
                    raise IndexError(f"column index {j} out of range for {ncols} columns")
                q = as_rational(v)
                if q:
                    r[j] = q
            if r:
                clean[i] = r
        self._rows = clean

    @classmethod
    def _trusted(cls, nrows: int, ncols: int, rows: dict[int, SparseRow]) -> "RationalMatrix":
        m = cls.__new__(cls)
        m.nrows = nrows
        m.ncols = ncols
        m._rows = rows
        return m

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[object]], ncols: int | None = None) -> "RationalMatrix":
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        data = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged rows")
            data[i] = {j: v for j, v in enumerate(row)}
        return cls(len(rows), ncols, data)

    @classmethod
    def from_sparse_rows(cls, rows: Iterable[Mapping[int, object]], ncols: int) -> "RationalMatrix":
        rows = list(rows)
        return cls(len(rows), ncols, dict(enumerate(rows)))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RationalMatrix":
        return cls._trusted(nrows, ncols, {})

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls._trusted(n, n, {i: {i: Fraction(1)} for i in range(n)})

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, idx: tuple[int, int]) -> Fraction:
        i, j = idx
        return self._rows.get(i, {}).get(j, Fraction(0))

    def row(self, i: int) -> dict[int, Fraction]:
        return dict(self._rows.get(i, {}))

    def sparse_rows(self) -> list[dict[int, Fraction]]:
        return [dict(self._rows.get(i, {})) for i in range(self.nrows)]

    def nonzero_rows(self) -> list[dict[int, Fraction]]:
        return [dict(self._rows[i]) for i in sorted(self._rows)]

    def items(self):
        for i in sorted(self._rows):
            for j in sorted(self._rows[i]):
                yield (i, j), self._rows[i][j]

    def nnz(self) -> int:
        return sum(len(r) for r in self._rows.values())

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for i, r in self._rows.items():
            for j, v in r.items():
                out[i][j] = v
        return out

    def is_zero(self) -> bool:
        return not self._rows

    def transpose(self) -> "RationalMatrix":
        t: dict[int, SparseRow] = {}
        for i, r in self._rows.items():
            for j, v in r.items():
                t.setdefault(j, {})[i] = v
        return RationalMatrix._trusted(self.ncols, self.nrows, t)

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            out: dict[int, SparseRow] = {}
            orows = other._rows
            for i, r in self._rows.items():
                acc: SparseRow = {}
                for k, a in r.items():
                    ok = orows.get(k)
                    if not ok:
                        continue
                    for j, b in ok.items():
                        acc[j] = acc.get(j, 0) + a * b
                acc = {j: v for j, v in acc.items() if v}
                if acc:
                    out[i] = acc
            return RationalMatrix._trusted(self.nrows, other.ncols, out)
        vec = [as_rational(x) for x in other]
        if len(vec) != self.ncols:
            raise ValueError("vector length mismatch")
        res = [Fraction(0)] * self.nrows
        for i, r in self._rows.items():
            res[i] = sum((v * vec[j] for j, v in r.items()), Fraction(0))
        return res

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self):
        return hash((self.shape, tuple(self.items())))

    def __repr__(self) -> str:
        if self.nrows * self.ncols <= 64:
            body = [[str(x) for x in row] for row in self.to_dense()]
            return f"RationalMatrix({body})"
        return f"RationalMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"


def _axpy(target: SparseRow, scale: Fraction, source: SparseRow) -> None:
    # target -= scale * source, in place
    for j, v in source.items():
        x = target.get(j)
        if x is None:
            target[j] = -scale * v
        else:
            x -= scale * v
            if x:
                target[j] = x
            else:
                del target[j]


class EchelonBasis:
    """Incrementally maintained echelon basis of a row space.

    Rows are kept monic at their pivot, where the pivot is the smallest column
    index present.  ``add`` returns the reduced remainder (empty when the row
    was already in the span).
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict[int, SparseRow] = {}

    def __len__(self) -> int:
        return len(self.pivots)

    def reduce(self, row: Mapping[int, Fraction]) -> SparseRow:
        r = {j: as_rational(v) for j, v in row.items() if v}
        pivots = self.pivots
        while r:
            hits = [j for j in r if j in pivots]
            if not hits:
                break
            j = min(hits)
            _axpy(r, r[j], pivots[j])
        return r

    def add(self, row: Mapping[int, Fraction]) -> bool:
        r = self.reduce(row)
        if not r:
            return False
        p = min(r)
        lead = r[p]
        if lead != 1:
            inv = 1 / lead
            r = {j: v * inv for j, v in r.items()}
        # keep existing pivot rows free of the new pivot column
        for q, prow in self.pivots.items():
            c = prow.get(p)
            if c:
                _axpy(prow, c, r)
        self.pivots[p] = r
        return True

    def contains(self, row: Mapping[int, Fraction]) -> bool:
        return not self.reduce(row)

    def rows(self) -> list[tuple[int, SparseRow]]:
        return [(p, dict(self.pivots[p])) for p in sorted(self.pivots)]


def _eliminate(m: RationalMatrix) -> EchelonBasis:
    basis = EchelonBasis(m.ncols)
    # sparsest rows first keeps fill-in down
    for r in sorted(m._rows.values(), key=len):
        basis.add(r)
    return basis


def rref(m: RationalMatrix) -> tuple[RationalMatrix, list[int]]:
    """Reduced row-echelon form and the strictly increasing pivot columns."""
    basis = _eliminate(m)
    rows = basis.rows()
    pivots = [p for p, _ in rows]
    out = {i: r for i, (_, r) in enumerate(rows)}
    return RationalMatrix._trusted(m.nrows, m.ncols, out), pivots


def rank(m: RationalMatrix) -> int:
    if m.is_zero():
        return 0
    # eliminate along the shorter side
    if m.nrows > m.ncols:
        m = m.transpose()
    basis = EchelonBasis(m.ncols)
    pivots = basis.pivots
    for r in sorted(m._rows.values(), key=len):
        r = dict(r)
        while r:
            hits = [j for j in r if j in pivots]
            if not hits:
                break
            j = min(hits)
            _axpy(r, r[j], pivots[j])
        if r:
            p = min(r)
            inv = 1 / r[p]
            pivots[p] = {j: v * inv for j, v in r.items()}
    return len(pivots)


def kernel_basis_sparse(m: RationalMatrix) -> list[SparseRow]:
    reduced, pivots = rref(m)
    pivot_set = set(pivots)
    free = [j for j in range(m.ncols) if j not in pivot_set]
    rows = reduced._rows
    # column -> list of (pivot col, coefficient) for entries in free columns
    by_free: dict[int, list[tuple[int, Fraction]]] = {}
    for i, p in enumerate(pivots):
        for j, v in rows[i].items():
            if j != p:
                by_free.setdefault(j, []).append((p, v))
    out = []
    for f in free:
        vec: SparseRow = {f: Fraction(1)}
        for p, v in by_free.get(f, ()):
            vec[p] = -v
        out.append(vec)
    return out


def kernel_basis(m: RationalMatrix) -> list[tuple[Fraction, ...]]:
    """Basis of the right null space ``{v : m @ v = 0}`` as dense tuples."""
    out = []
    for vec in kernel_basis_sparse(m):
        dense = [Fraction(0)] * m.ncols
        for j, v in vec.items():
            dense[j] = v
        out.append(tuple(dense))
    return out


def row_space_equal(a: RationalMatrix, b: RationalMatrix) -> bool:
    if a.ncols != b.ncols:
        raise ValueError(f"column counts differ: {a.ncols} != {b.ncols}")
    ra, pa = rref(a)
    rb, pb = rref(b)
    return pa == pb and ra.nonzero_rows() == rb.nonzero_rows()


def row_space_contains(a: RationalMatrix, b: RationalMatrix) -> bool:
    """True when every row of ``b`` lies in the row space of ``a``."""
    if a.ncols != b.ncols:
        raise ValueError(f"column counts differ: {a.ncols} != {b.ncols}")
    basis = _eliminate(a)
    return all(basis.contains(r) for r in b._rows.values())


def orthogonal_complement(m: RationalMatrix) -> RationalMatrix:
    """Rows spanning ``{v : <v, r> = 0 for all rows r}`` under the dot product."""
    return RationalMatrix.from_sparse_rows(kernel_basis_sparse(m), m.ncols)


def stack(blocks: Sequence[RationalMatrix]) -> RationalMatrix:
    """Vertical concatenation."""
    if not blocks:
        raise ValueError("nothing to stack")
    ncols = blocks[0].ncols
    out: dict[int, SparseRow] = {}
    offset = 0
    for b in blocks:
        if b.ncols != ncols:
            raise ValueError("column counts differ")
        for i, r in b._rows.items():
            out[offset + i] = dict(r)
        offset += b.nrows
    return RationalMatrix._trusted(offset, ncols, out)
