"""The order-2 Cayley tree as reduced words of G2 = Z2 * Z2 * Z2.

A vertex is a word over the generators 1, 2, 3 with no letter repeated
twice in a row; the empty word is the root.  Words are ordered shortlex
(by length, then lexicographically), which has the convenient property
that the children of the i-th non-root vertex on level m sit at positions
2i and 2i+1 on level m+1.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError, ResourceLimitError

GENERATORS = (1, 2, 3)

#: Largest depth for which vertex sets are materialised (3 * 2**16 leaves).
MAX_TREE_DEPTH = 16


@dataclass(frozen=True)
class Vertex:
    """A reduced word in G2; ``Vertex(())`` is the root."""

    word: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        word = tuple(int(a) for a in self.word)
        object.__setattr__(self, "word", word)
        for a in word:
            if a not in GENERATORS:
                raise DomainError(f"generator index {a} not in {GENERATORS}")
        for a, b in zip(word, word[1:]):
            if a == b:
                raise DomainError(f"word {word} is not reduced")

    @property
    def level(self) -> int:
        return len(self.word)

    @property
    def is_root(self) -> bool:
        return not self.word

    @property
    def parent(self) -> Vertex | None:
        if not self.word:
            return None
        return Vertex(self.word[:-1])

    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return (len(self.word), self.word)

    def __lt__(self, other: Vertex) -> bool:
        return self.sort_key() < other.sort_key()

    def __repr__(self) -> str:
        return "Vertex(e)" if not self.word else f"Vertex({list(self.word)})"


ROOT = Vertex(())


def multiply_generator(v: Vertex, i: int) -> Vertex:
    """Right-multiply ``v`` by generator ``a_i``; ``a_i`` is an involution."""
    if i not in GENERATORS:
        raise DomainError(f"generator index {i} not in {GENERATORS}")
    if v.word and v.word[-1] == i:
        return Vertex(v.word[:-1])
    return Vertex(v.word + (i,))


def direct_successors(v: Vertex) -> list[Vertex]:
    """Neighbours of ``v`` one level further from the root, in shortlex order."""
    last = v.word[-1] if v.word else None
    return [Vertex(v.word + (a,)) for a in GENERATORS if a != last]


def neighbors(v: Vertex) -> list[Vertex]:
    return [multiply_generator(v, a) for a in GENERATORS]


def ternary_sibling_pairs(z: Vertex) -> list[tuple[Vertex, Vertex]]:
    """All unordered pairs of distinct successors of ``z`` (the >x,y< bonds below z)."""
    return list(itertools.combinations(direct_successors(z), 2))


def in_even_subgroup(v: Vertex) -> bool:
    return v.level % 2 == 0


def distance(x: Vertex, y: Vertex) -> int:
    """Graph distance: length of the reduced word x^{-1} y."""
    common = 0
    for a, b in zip(x.word, y.word):
        if a != b:
            break
        common += 1
    return (x.level - common) + (y.level - common)


def level_size(m: int) -> int:
    return 1 if m == 0 else 3 * 2 ** (m - 1)


def volume_size(n: int) -> int:
    return 1 + 3 * (2**n - 1)


def _check_depth(n: int, cap: int) -> None:
    if n < 0:
        raise DomainError(f"depth must be non-negative, got {n}")
    if n > cap:
        raise ResourceLimitError(f"depth {n} exceeds the enumeration cap {cap}")


def enumerate_levels(n: int, cap: int = MAX_TREE_DEPTH) -> tuple[list[list[Vertex]], list[Vertex]]:
    """Return the spheres ``W_0..W_n`` and the ball ``V_n``, each in shortlex order."""
    _check_depth(n, cap)
    levels = [[ROOT]]
    for _ in range(n):
        levels.append([c for v in levels[-1] for c in direct_successors(v)])
    ball = [v for level in levels for v in level]
    return levels, ball


class SubgroupKind(enum.Enum):
    FULL_GROUP = "FullGroup"
    EVEN_SUBGROUP = "EvenSubgroup"
    ABSTRACT_FINITE_INDEX = "AbstractFiniteIndex"


@dataclass(frozen=True)
class SubgroupDescriptor:
    """A finite-index subgroup H0 of G2, reduced to what the periodicity
    classification needs: whether H0 contains one of a1, a2, a3.

    Only the even-length subgroup is concrete enough to test membership.
    """

    kind: SubgroupKind
    has_generator: bool = field(default=True)

    def __post_init__(self) -> None:
        if self.kind is SubgroupKind.FULL_GROUP and not self.has_generator:
            raise DomainError("G2 itself contains every generator")
        if self.kind is SubgroupKind.EVEN_SUBGROUP and self.has_generator:
            raise DomainError("the even-length subgroup contains no generator")

    @classmethod
    def full_group(cls) -> SubgroupDescriptor:
        return cls(SubgroupKind.FULL_GROUP, True)

    @classmethod
    def even_subgroup(cls) -> SubgroupDescriptor:
        return cls(SubgroupKind.EVEN_SUBGROUP, False)

    @classmethod
    def abstract(cls, has_generator: bool) -> SubgroupDescriptor:
        return cls(SubgroupKind.ABSTRACT_FINITE_INDEX, has_generator)

    def contains(self, v: Vertex) -> bool:
        if self.kind is SubgroupKind.FULL_GROUP:
            return True
        if self.kind is SubgroupKind.EVEN_SUBGROUP:
            return in_even_subgroup(v)
        raise NotImplementedError("membership is not modelled for abstract subgroups")


@dataclass(frozen=True)
class TreeLayout:
    """Dense, level-indexed view of ``V_n`` used by the enumerators.

    Vertex ``i`` of ``vertices`` is bit ``i`` of a configuration code; a set
    bit means spin -1.  Because the order is shortlex, ``V_{n-1}`` occupies the
    low ``volume_size(n-1)`` bits and the shell ``W_n`` the high bits.
    """

    depth: int
    levels: tuple[tuple[Vertex, ...], ...]
    vertices: tuple[Vertex, ...]
    index: dict[Vertex, int]
    nn_bonds: np.ndarray  # (k, 2) vertex indices, parent first
    ternary_bonds: np.ndarray  # (k, 2) sibling indices
    level_offsets: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.vertices)

    def shell_indices(self, m: int | None = None) -> np.ndarray:
        m = self.depth if m is None else m
        start = self.level_offsets[m]
        return np.arange(start, start + level_size(m))

    def children_of(self, i: int) -> list[int]:
        return [self.index[c] for c in direct_successors(self.vertices[i]) if c.level <= self.depth]


@functools.lru_cache(maxsize=None)
def layout(n: int, cap: int = MAX_TREE_DEPTH) -> TreeLayout:
    levels, ball = enumerate_levels(n, cap)
    index = {v: i for i, v in enumerate(ball)}
    nn = [(index[v.parent], index[v]) for v in ball if not v.is_root]
    tern = [
        (index[x], index[y])
        for z in ball
        if z.level < n
        for x, y in ternary_sibling_pairs(z)
    ]
    offsets = tuple(itertools.accumulate((len(lv) for lv in levels[:-1]), initial=0))
    return TreeLayout(
        depth=n,
        levels=tuple(tuple(lv) for lv in levels),
        vertices=tuple(ball),
        index=index,
        nn_bonds=np.array(nn, dtype=np.int64).reshape(-1, 2),
        ternary_bonds=np.array(tern, dtype=np.int64).reshape(-1, 2),
        level_offsets=offsets,
    )


def nn_bonds(n: int) -> list[tuple[Vertex, Vertex]]:
    lay = layout(n)
    return [(lay.vertices[i], lay.vertices[j]) for i, j in lay.nn_bonds]


def ternary_bonds(n: int) -> list[tuple[Vertex, Vertex]]:
    lay = layout(n)
    return [(lay.vertices[i], lay.vertices[j]) for i, j in lay.ternary_bonds]


def iter_words(max_len: int) -> Iterator[Vertex]:
    """Every reduced word of length <= max_len, by brute-force filtering of
    all words over {1,2,3}.  Slow; kept as an independent counting check."""
    for length in range(max_len + 1):
        for word in itertools.product(GENERATORS, repeat=length):
            if all(a != b for a, b in zip(word, word[1:])):
                yield Vertex(word)


def is_connected(vertices: Iterable[Vertex]) -> bool:
    """Connectivity of a vertex set in the nearest-neighbour graph."""
    nodes = set(vertices)
    if not nodes:
        return False
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in neighbors(v):
            if w in nodes and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == nodes


def sorted_vertices(vertices: Iterable[Vertex]) -> list[Vertex]:
    return sorted(vertices, key=Vertex.sort_key)


def as_vertex(v: Vertex | Sequence[int]) -> Vertex:
    return v if isinstance(v, Vertex) else Vertex(tuple(v))
