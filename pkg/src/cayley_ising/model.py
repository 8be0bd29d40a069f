"""Model parameters, spin configurations and the finite-volume Hamiltonian.

    H(sigma_n) = -J * A(sigma_n) - J1 * B(sigma_n)

where A sums spin products over sibling (ternary) bonds inside V_n and B
over nearest-neighbour bonds.  All bond sums are exact integers; couplings
are applied at the end.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, ResourceLimitError
from .tree import (
    Vertex,
    as_vertex,
    direct_successors,
    is_connected,
    layout,
    neighbors,
    sorted_vertices,
    volume_size,
)

#: Exhaustive enumeration is allowed up to this depth (|V_3| = 22 spins).
ENUMERATION_CAP = 3


@dataclass(frozen=True)
class ModelParams:
    J: float
    J1: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        for name in ("J", "J1", "beta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.beta <= 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if max(abs(self.log_theta), abs(self.log_theta1)) > 700:
            raise DomainError("theta or theta1 leaves the float range; reduce beta*|J|")

    @classmethod
    def from_thetas(cls, theta: float, theta1: float, beta: float = 1.0) -> ModelParams:
        """Parameters with the given theta, theta1; couplings are log(theta)/(2 beta)."""
        if theta <= 0 or theta1 <= 0:
            raise DomainError("theta and theta1 must be positive")
        return cls(J=math.log(theta) / (2 * beta), J1=math.log(theta1) / (2 * beta), beta=beta)

    @property
    def log_theta(self) -> float:
        return 2.0 * self.beta * self.J

    @property
    def log_theta1(self) -> float:
        return 2.0 * self.beta * self.J1

    @property
    def theta(self) -> float:
        return math.exp(self.log_theta)

    @property
    def theta1(self) -> float:
        return math.exp(self.log_theta1)

    def scaled(self, c: float) -> ModelParams:
        """Same (theta, theta1) with couplings multiplied and beta divided by c."""
        return ModelParams(self.J * c, self.J1 * c, self.beta / c)


@dataclass(frozen=True)
class Configuration:
    """Spins on every vertex of V_n."""

    depth: int
    spins: Mapping[Vertex, int]

    def __post_init__(self) -> None:
        lay = layout(self.depth)
        spins = {as_vertex(v): int(s) for v, s in self.spins.items()}
        if set(spins) != set(lay.vertices):
            raise DomainError(f"configuration must assign exactly the {lay.size} vertices of V_{self.depth}")
        if any(s not in (-1, 1) for s in spins.values()):
            raise DomainError("spins must be +1 or -1")
        object.__setattr__(self, "spins", spins)

    @classmethod
    def from_array(cls, depth: int, values: Iterable[int]) -> Configuration:
        lay = layout(depth)
        values = list(values)
        if len(values) != lay.size:
            raise DomainError(f"expected {lay.size} spins, got {len(values)}")
        return cls(depth, dict(zip(lay.vertices, values)))

    @classmethod
    def from_code(cls, depth: int, code: int) -> Configuration:
        """Decode an enumeration index: bit i set means vertex i has spin -1."""
        n = volume_size(depth)
        return cls.from_array(depth, [1 - 2 * ((code >> i) & 1) for i in range(n)])

    @classmethod
    def uniform(cls, depth: int, spin: int) -> Configuration:
        return cls.from_array(depth, [spin] * volume_size(depth))

    def array(self) -> np.ndarray:
        lay = layout(self.depth)
        return np.array([self.spins[v] for v in lay.vertices], dtype=np.int64)

    def code(self) -> int:
        return sum(1 << i for i, s in enumerate(self.array()) if s < 0)

    def flipped(self) -> Configuration:
        return Configuration(self.depth, {v: -s for v, s in self.spins.items()})

    def __getitem__(self, v: Vertex) -> int:
        return self.spins[as_vertex(v)]


@dataclass(frozen=True)
class ConfigStats:
    A: int
    B: int
    C: int


def stats(config: Configuration) -> ConfigStats:
    lay = layout(config.depth)
    s = config.array()
    A = int(np.sum(s[lay.ternary_bonds[:, 0]] * s[lay.ternary_bonds[:, 1]]))
    B = int(np.sum(s[lay.nn_bonds[:, 0]] * s[lay.nn_bonds[:, 1]]))
    return ConfigStats(A=A, B=B, C=int(s.sum()))


def energy(params: ModelParams, config: Configuration) -> float:
    st = stats(config)
    return -params.J * st.A - params.J1 * st.B


def check_enumerable(n: int, cap: int = ENUMERATION_CAP) -> None:
    if n < 0:
        raise DomainError(f"depth must be non-negative, got {n}")
    if n > cap:
        raise ResourceLimitError(
            f"exhaustive enumeration at depth {n} needs 2**{volume_size(n)} configurations; cap is depth {cap}"
        )


@dataclass(frozen=True)
class StatsTable:
    """Bond sums of every configuration on V_n, indexed by configuration code."""

    depth: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    shell_sum: np.ndarray  # sum of spins over W_n

    def __len__(self) -> int:
        return len(self.A)


def _spin_bits(depth: int, i: int) -> np.ndarray:
    codes = np.arange(2 ** volume_size(depth), dtype=np.uint32)
    return ((codes >> np.uint32(i)) & np.uint32(1)).astype(np.int8)


@functools.lru_cache(maxsize=4)
def stats_table(n: int, cap: int = ENUMERATION_CAP) -> StatsTable:
    """A, B, C and the shell magnetisation for all 2**|V_n| configurations."""
    check_enumerable(n, cap)
    lay = layout(n)
    bits = [_spin_bits(n, i) for i in range(lay.size)]

    def bond_sum(bonds: np.ndarray) -> np.ndarray:
        disagree = np.zeros(len(bits[0]), dtype=np.int16)
        for i, j in bonds:
            disagree += bits[i] ^ bits[j]
        return (len(bonds) - 2 * disagree).astype(np.int16)

    def spin_sum(indices: Iterable[int]) -> np.ndarray:
        indices = list(indices)
        minus = np.zeros(len(bits[0]), dtype=np.int16)
        for i in indices:
            minus += bits[i]
        return (len(indices) - 2 * minus).astype(np.int16)

    table = StatsTable(
        depth=n,
        A=bond_sum(lay.ternary_bonds),
        B=bond_sum(lay.nn_bonds),
        C=spin_sum(range(lay.size)),
        shell_sum=spin_sum(lay.shell_indices()),
    )
    for arr in (table.A, table.B, table.C, table.shell_sum):
        arr.setflags(write=False)
    return table


def shell_spins(n: int) -> np.ndarray:
    """(|W_n|, 2**|V_n|) matrix of shell spins, for position-dependent fields."""
    check_enumerable(n)
    lay = layout(n)
    return np.stack([1 - 2 * _spin_bits(n, i) for i in lay.shell_indices()])


# -- boundary sets and the B - A bound --------------------------------------


@dataclass(frozen=True)
class BoundarySets:
    nn_boundary: frozenset[Vertex]
    ternary_boundary: frozenset[Vertex]

    @property
    def bound_holds(self) -> bool:
        """Whether |d2 K| <= |d K| for this set."""
        return len(self.ternary_boundary) <= len(self.nn_boundary)


def siblings(v: Vertex) -> list[Vertex]:
    if v.is_root:
        return []
    return [w for w in direct_successors(v.parent) if w != v]


def boundary_sets(K: Iterable[Vertex], n: int) -> BoundarySets:
    """Outside vertices of V_n that are nearest-neighbour / sibling adjacent to K.

    Cardinalities are reported, not asserted: for K containing a level-1
    vertex but not the root the ternary boundary can exceed the other.
    """
    K = {as_vertex(v) for v in K}
    ball = set(layout(n).vertices)
    if not K:
        raise DomainError("K must be non-empty")
    if not K <= ball:
        raise DomainError(f"K is not contained in V_{n}")
    if not is_connected(K):
        raise DomainError("K is not connected in the nearest-neighbour graph")
    nn = {w for v in K for w in neighbors(v) if w in ball and w not in K}
    tern = {w for v in K for w in siblings(v) if w in ball and w not in K}
    return BoundarySets(frozenset(nn), frozenset(tern))


def minus_components(config: Configuration) -> list[list[Vertex]]:
    """Maximal connected components of the set of minus spins."""
    minus = {v for v, s in config.spins.items() if s < 0}
    components = []
    while minus:
        start = min(minus, key=Vertex.sort_key)
        comp, stack = {start}, [start]
        while stack:
            v = stack.pop()
            for w in neighbors(v):
                if w in minus and w not in comp:
                    comp.add(w)
                    stack.append(w)
        minus -= comp
        components.append(sorted_vertices(comp))
    return components


@dataclass(frozen=True)
class BondInequalityReport:
    depth: int
    checked: int
    reference: int  # B - A at the all-plus configuration
    violations: int
    max_excess: int  # max over sigma of (B - A)(sigma) - reference
    equality_count: int
    witness: Configuration | None  # first violating configuration, if any

    @property
    def holds(self) -> bool:
        return self.violations == 0


def check_bond_inequality(n: int, allow_large: bool = False) -> BondInequalityReport:
    """Exhaustively test B(sigma) - A(sigma) <= B - A over all sigma on V_n.

    Depth 3 (about 4.2M configurations) needs ``allow_large=True``.
    """
    check_enumerable(n, cap=ENUMERATION_CAP if allow_large else 2)
    t = stats_table(n)
    diff = t.B.astype(np.int32) - t.A.astype(np.int32)
    reference = int(diff[0])
    excess = diff - reference
    bad = np.flatnonzero(excess > 0)
    return BondInequalityReport(
        depth=n,
        checked=len(diff),
        reference=reference,
        violations=len(bad),
        max_excess=int(excess.max()),
        equality_count=int(np.count_nonzero(excess == 0)),
        witness=Configuration.from_code(n, int(bad[0])) if len(bad) else None,
    )
