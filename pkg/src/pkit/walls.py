"""Bricks, walls, partitions and leveled walls over the ground set 1..n.

A wall is stored through its canonical levels: every brick sits on the level
given by the longest chain of bricks below it, and bricks on one level are
sorted by (minimum element, sorted tuple).  Two bricks on the same level are
disjoint, so this sort key is unique and the levels identify the wall.

Bricks are sorted tuples of ints.  Partitions are tuples of blocks sorted by
their minimum element.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

Brick = tuple[int, ...]
Partition = tuple[Brick, ...]


class WallError(ValueError):
    pass


def _brick(b: Iterable[int]) -> Brick:
    t = tuple(sorted(b))
    if not t:
        raise WallError("bricks must be nonempty")
    if len(set(t)) != len(t):
        raise WallError(f"repeated element in brick {list(b)}")
    return t


def _brick_key(b: Brick):
    return (b[0], b)


def _meets(a: Brick, b: Brick) -> bool:
    return not set(a).isdisjoint(b)


def normalize_partition(blocks: Iterable[Iterable[int]]) -> Partition:
    return tuple(sorted((_brick(b) for b in blocks), key=_brick_key))


@dataclass(frozen=True)
class Wall:
    """A wall in canonical form; ``levels[k]`` holds the bricks of minimal level k."""

    levels: tuple[tuple[Brick, ...], ...]

    @classmethod
    def from_sequence(cls, bricks: Iterable[Iterable[int]]) -> "Wall":
        """Stack bricks bottom to top; each brick lands on everything it meets."""
        levels: list[list[Brick]] = []
        where: dict[int, int] = {}
        for raw in bricks:
            b = _brick(raw)
            lvl = 1 + max((where[s] for s in b if s in where), default=-1)
            if lvl == len(levels):
                levels.append([])
            levels[lvl].append(b)
            for s in b:
                where[s] = lvl
        return cls(tuple(tuple(sorted(lv, key=_brick_key)) for lv in levels))

    @classmethod
    def from_order(cls, bricks: Sequence[Iterable[int]], below: Iterable[tuple[int, int]]) -> "Wall":
        """Build a wall from bricks and pairs ``(a, b)`` meaning brick a lies below brick b.

        The transitive closure of the pairs must be acyclic, totally order the
        bricks through each element, and relate no pair of bricks that shares
        no element unless the relation is forced through shared elements.
        """
        bs = [_brick(b) for b in bricks]
        k = len(bs)
        rel = [[False] * k for _ in range(k)]
        for a, b in below:
            if not (0 <= a < k and 0 <= b < k) or a == b:
                raise WallError(f"bad order pair ({a}, {b})")
            rel[a][b] = True
        for m in range(k):
            for a in range(k):
                if rel[a][m]:
                    row_m = rel[m]
                    row_a = rel[a]
                    for b in range(k):
                        if row_m[b]:
                            row_a[b] = True
        if any(rel[a][a] for a in range(k)):
            raise WallError("order relation has a cycle")
        for a, b in itertools.combinations(range(k), 2):
            if _meets(bs[a], bs[b]) and not (rel[a][b] or rel[b][a]):
                raise WallError(f"bricks {list(bs[a])} and {list(bs[b])} share an element but are not ordered")
        # a linear extension, then stack
        order = sorted(range(k), key=lambda a: sum(rel[b][a] for b in range(k)))
        wall = cls.from_sequence(bs[a] for a in order)
        # the stacked wall must realise exactly the given relation
        pos = {}
        seen: dict[Brick, int] = {}
        flat = wall.bricks
        for a in order:
            # bricks with equal sets are matched in stacking order
            cnt = seen.get(bs[a], 0)
            seen[bs[a]] = cnt + 1
            idxs = [i for i, fb in enumerate(flat) if fb == bs[a]]
            idxs.sort(key=lambda i: wall.brick_level[i])
            pos[a] = idxs[cnt]
        closure = wall.closure
        for a in range(k):
            for b in range(k):
                if rel[a][b] != closure[pos[a]][pos[b]]:
                    raise WallError("order pairs relate bricks that share no element and are not forced")
        return wall

    @classmethod
    def from_json(cls, data: dict) -> "Wall":
        if set(data) - {"bricks", "order"}:
            raise WallError(f"unknown wall fields {sorted(set(data) - {'bricks', 'order'})}")
        return cls.from_order(data["bricks"], [tuple(p) for p in data.get("order", [])])

    def to_json(self) -> dict:
        return {"bricks": [list(b) for b in self.bricks], "order": [list(p) for p in self.covers]}

    @cached_property
    def bricks(self) -> tuple[Brick, ...]:
        return tuple(b for lv in self.levels for b in lv)

    @cached_property
    def brick_level(self) -> tuple[int, ...]:
        return tuple(k for k, lv in enumerate(self.levels) for _ in lv)

    def __len__(self) -> int:
        return len(self.bricks)

    @cached_property
    def support(self) -> frozenset[int]:
        return frozenset(s for b in self.bricks for s in b)

    @cached_property
    def element_orders(self) -> dict[int, tuple[int, ...]]:
        """For each element, the indices of bricks containing it, bottom to top."""
        out: dict[int, list[int]] = {}
        for i, b in enumerate(self.bricks):
            for s in b:
                out.setdefault(s, []).append(i)
        return {s: tuple(v) for s, v in sorted(out.items())}

    @cached_property
    def closure(self) -> tuple[tuple[bool, ...], ...]:
        k = len(self.bricks)
        rel = [[False] * k for _ in range(k)]
        for chain in self.element_orders.values():
            for a, b in zip(chain, chain[1:]):
                rel[a][b] = True
        # bricks are listed in a linear extension, so one backward sweep closes
        for a in range(k - 1, -1, -1):
            for b in range(a + 1, k):
                if rel[a][b]:
                    for c in range(b + 1, k):
                        if rel[b][c]:
                            rel[a][c] = True
        return tuple(tuple(r) for r in rel)

    @cached_property
    def covers(self) -> tuple[tuple[int, int], ...]:
        """Cover pairs (a, b) of the canonical partial order, a below b."""
        k = len(self.bricks)
        rel = self.closure
        out = []
        for a in range(k):
            for b in range(k):
                if rel[a][b] and not any(rel[a][c] and rel[c][b] for c in range(k)):
                    out.append((a, b))
        return tuple(out)

    def below(self, a: int, b: int) -> bool:
        return self.closure[a][b]


def kappa(w: Wall) -> Partition:
    """Blocks are unions of bricks linked through successive overlapping pairs."""
    bricks = w.bricks
    parent = list(range(len(bricks)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in w.covers:
        if _meets(bricks[a], bricks[b]):
            parent[find(a)] = find(b)
    groups: dict[int, set[int]] = {}
    for i, b in enumerate(bricks):
        groups.setdefault(find(i), set()).update(b)
    return normalize_partition(groups.values())


def is_connected(w: Wall) -> bool:
    return len(kappa(w)) == 1


def graph_partition(n: int, pairs: Iterable[Iterable[int]]) -> Partition:
    """Connected components of 1..n under the given index sets (singletons kept)."""
    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in pairs:
        p = list(p)
        for s in p[1:]:
            parent[find(s)] = find(p[0])
    groups: dict[int, list[int]] = {}
    for s in range(1, n + 1):
        groups.setdefault(find(s), []).append(s)
    return normalize_partition(groups.values())


def enum_partitions(n: int) -> list[Partition]:
    """All set partitions of 1..n via restricted growth strings."""
    if n < 1:
        raise ValueError("ground set must be nonempty")
    out = []

    def rec(s: int, blocks: list[list[int]]):
        if s > n:
            out.append(normalize_partition(blocks))
            return
        for b in blocks:
            b.append(s)
            rec(s + 1, blocks)
            b.pop()
        blocks.append([s])
        rec(s + 1, blocks)
        blocks.pop()

    rec(1, [])
    return out


def enum_xconn(n: int) -> list[tuple[Partition, Partition]]:
    """Ordered pairs (I, J) of partitions whose wall, I below J, is connected."""
    parts = enum_partitions(n)
    return [(i, j) for i in parts for j in parts if is_connected(Wall.from_sequence(i + j))]


def bricks_of_sizes(n: int, sizes: Iterable[int]) -> list[Brick]:
    out = []
    for k in sorted(set(sizes)):
        if 1 <= k <= n:
            out.extend(itertools.combinations(range(1, n + 1), k))
    return sorted(out, key=_brick_key)


def _stack(levels: tuple[tuple[Brick, ...], ...], b: Brick) -> tuple[tuple[Brick, ...], ...]:
    lvl = -1
    for k in range(len(levels) - 1, -1, -1):
        if any(_meets(b, x) for x in levels[k]):
            lvl = k
            break
    lvl += 1
    if lvl == len(levels):
        return levels + ((b,),)
    new = tuple(sorted(levels[lvl] + (b,), key=_brick_key))
    return levels[:lvl] + (new,) + levels[lvl + 1:]


def iter_heaps(n: int, count: int, sizes: Iterable[int]) -> Iterator[Wall]:
    """All walls with ``count`` bricks of the allowed sizes, connected or not,
    not necessarily covering 1..n."""
    pieces = bricks_of_sizes(n, sizes)
    layer = {()}
    for _ in range(count):
        nxt = set()
        for lv in layer:
            for b in pieces:
                nxt.add(_stack(lv, b))
        layer = nxt
    for lv in sorted(layer):
        yield Wall(lv)


def enum_walls(n: int, bricks: int, allowed_sizes: Iterable[int]) -> list[Wall]:
    """Connected walls over 1..n with exactly ``bricks`` bricks of allowed sizes."""
    if bricks < 1:
        raise ValueError("a wall needs at least one brick")
    full = frozenset(range(1, n + 1))
    sizes = set(allowed_sizes)
    out = [w for w in iter_heaps(n, bricks, sizes) if w.support == full and is_connected(w)]
    return sorted(out, key=lambda w: w.levels)


@dataclass(frozen=True)
class LeveledWall:
    """Levels bottom to top, each a nonempty tuple of pairwise disjoint bricks."""

    levels: tuple[tuple[Brick, ...], ...]

    @classmethod
    def make(cls, levels: Sequence[Iterable[Iterable[int]]], n: int | None = None) -> "LeveledWall":
        lv = []
        for level in levels:
            bs = tuple(sorted((_brick(b) for b in level), key=_brick_key))
            if not bs:
                raise WallError("levels must be nonempty")
            for a, b in itertools.combinations(bs, 2):
                if _meets(a, b):
                    raise WallError(f"bricks {list(a)} and {list(b)} overlap within one level")
            lv.append(bs)
        if not lv:
            raise WallError("a leveled wall needs at least one level")
        out = cls(tuple(lv))
        support = set().union(*(set(b) for level in lv for b in level))
        if n is not None and support != set(range(1, n + 1)):
            raise WallError("leveled wall does not cover the ground set")
        if not is_connected(unlevelize(out)):
            raise WallError("leveled wall is not connected")
        return out

    @property
    def brick_count(self) -> int:
        return sum(len(level) for level in self.levels)

    def to_json(self) -> list:
        return [[list(b) for b in level] for level in self.levels]


def unlevelize(lw: LeveledWall) -> Wall:
    return Wall.from_sequence(b for level in lw.levels for b in level)


def level_fibers(w: Wall, p: int) -> list[LeveledWall]:
    """Leveled walls with p levels unlevelizing to w (order-preserving surjections)."""
    if not is_connected(w):
        raise WallError("level fibers are defined for connected walls only")
    k = len(w)
    if p < 1 or p > k:
        return []
    preds = [[a for a, b in w.covers if b == i] for i in range(k)]
    bricks = w.bricks
    out = []
    assign = [0] * k

    # canonical brick order is a linear extension, so predecessors come first
    def rec(i: int):
        if i == k:
            if len(set(assign)) == p:
                levels = [[] for _ in range(p)]
                for j, lvl in enumerate(assign):
                    levels[lvl].append(bricks[j])
                out.append(LeveledWall(tuple(tuple(sorted(lv, key=_brick_key)) for lv in levels)))
            return
        lo = 1 + max((assign[a] for a in preds[i]), default=-1)
        for lvl in range(lo, p):
            assign[i] = lvl
            rec(i + 1)

    rec(0)
    return sorted(out, key=lambda x: x.levels)


def _disjoint_families(pieces: Sequence[Brick]) -> list[tuple[Brick, ...]]:
    out = []

    def rec(start: int, used: frozenset, chosen: list[Brick]):
        if chosen:
            out.append(tuple(chosen))
        for i in range(start, len(pieces)):
            b = pieces[i]
            if used.isdisjoint(b):
                chosen.append(b)
                rec(i + 1, used | frozenset(b), chosen)
                chosen.pop()

    rec(0, frozenset(), [])
    return [tuple(sorted(f, key=_brick_key)) for f in out]


def enum_leveled_walls(n: int, levels: int, total_bricks: int, allowed_sizes: Iterable[int]) -> list[LeveledWall]:
    """Connected leveled walls over 1..n with the given level and brick counts."""
    if levels < 1 or total_bricks < levels:
        return []
    families = _disjoint_families(bricks_of_sizes(n, allowed_sizes))
    full = set(range(1, n + 1))
    out = []

    def rec(chosen: list, used: int):
        remaining = levels - len(chosen)
        if remaining == 0:
            if used != total_bricks:
                return
            support = set().union(*(set(b) for f in chosen for b in f))
            if support != full:
                return
            lw = LeveledWall(tuple(chosen))
            if is_connected(unlevelize(lw)):
                out.append(lw)
            return
        for f in families:
            if used + len(f) + (remaining - 1) <= total_bricks:
                chosen.append(f)
                rec(chosen, used + len(f))
                chosen.pop()

    rec([], 0)
    return sorted(out, key=lambda x: x.levels)
