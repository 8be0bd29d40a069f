"""Boundary-field recursion, its periodic fixed points and the phase diagram.

With u = exp(2h) the consistency recursion for a vertex with successors
y, z reads u_x = f(u_y, u_z), where

    f(x, y) = (t1^2 t xy + t1 (x + y) + t) / (t xy + t1 (x + y) + t1^2 t)

and t = theta = exp(2 beta J), t1 = theta1 = exp(2 beta J1).  Constant
fields solve u = g(u) with g(u) = f(u, u); fields depending only on the
parity of the level solve the two-cycle u = g(v), v = g(u).

Both fixed-point problems reduce to monic quadratics with unit constant
term, so the non-trivial roots always come in reciprocal pairs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np
from scipy import optimize

from .errors import DomainError
from .model import ModelParams
from .tree import (
    SubgroupDescriptor,
    Vertex,
    as_vertex,
    direct_successors,
    enumerate_levels,
    in_even_subgroup,
)

SQRT3 = math.sqrt(3.0)
DISCRIMINANT_FLOOR = 1e-14


# -- field assignments -------------------------------------------------------


def _finite_field(h: float) -> float:
    h = float(h)
    # exp(2h) must stay a positive finite double
    if not math.isfinite(h) or abs(h) > 350:
        raise DomainError(f"field value {h} gives a non-finite u = exp(2h)")
    return h


@dataclass(frozen=True)
class ConstantField:
    h: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", _finite_field(self.h))

    def at(self, v: Vertex) -> float:
        return self.h

    def describe(self) -> dict:
        return {"form": "constant", "h": self.h}


@dataclass(frozen=True)
class ParityField:
    """``h_even`` on even-length words, ``h_odd`` on the rest."""

    h_even: float
    h_odd: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "h_even", _finite_field(self.h_even))
        object.__setattr__(self, "h_odd", _finite_field(self.h_odd))

    def at(self, v: Vertex) -> float:
        return self.h_even if in_even_subgroup(v) else self.h_odd

    def describe(self) -> dict:
        return {"form": "parity", "h_even": self.h_even, "h_odd": self.h_odd}


@dataclass(frozen=True)
class ExplicitField:
    values: Mapping[Vertex, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", {as_vertex(v): _finite_field(h) for v, h in self.values.items()})

    def at(self, v: Vertex) -> float:
        try:
            return self.values[v]
        except KeyError:
            raise DomainError(f"explicit field undefined at {v}") from None

    def describe(self) -> dict:
        return {
            "form": "explicit",
            "values": {"".join(map(str, v.word)) or "e": h for v, h in sorted(self.values.items(), key=lambda kv: kv[0].sort_key())},
        }


FieldAssignment = Union[ConstantField, ParityField, ExplicitField]


def field_u(field_: FieldAssignment, v: Vertex) -> float:
    return math.exp(2.0 * field_.at(v))


# -- the recursion kernel ----------------------------------------------------


def kernel(params: ModelParams, x: float, y: float) -> float:
    if x <= 0 or y <= 0:
        raise DomainError("kernel arguments must be positive")
    t, t1 = params.theta, params.theta1
    return (t1 * t1 * t * x * y + t1 * (x + y) + t) / (t * x * y + t1 * (x + y) + t1 * t1 * t)


def g_map(theta: float | np.ndarray, theta1: float | np.ndarray, u: float | np.ndarray):
    """g(u) = f(u, u); vectorised over any broadcastable arguments."""
    a = theta1 * theta1 * theta
    return (a * u * u + 2 * theta1 * u + theta) / (theta * u * u + 2 * theta1 * u + a)


@dataclass(frozen=True)
class RecursionCheck:
    ok: bool
    max_residual: float
    checked: int
    root_verified: bool


def check_recursion(
    params: ModelParams, field_: FieldAssignment, n: int, tol: float = 1e-9, last_level_only: bool = False
) -> RecursionCheck:
    """Compare u_x with f(u_y, u_z) on every parent in V_{n-1}, or only on
    W_{n-1} with ``last_level_only``.

    Non-root parents have exactly two successors.  The root has three; it is
    checked with the two-successor kernel only when all three successor values
    agree (always so for constant and parity fields), otherwise it is skipped
    and reported as unverified.
    """
    if n < 1:
        raise DomainError("recursion check needs depth >= 1")
    levels, _ = enumerate_levels(n - 1)
    if last_level_only:
        levels = levels[-1:]
    worst, checked, root_verified = 0.0, 0, True
    for level in levels:
        for x in level:
            kids = [field_u(field_, c) for c in direct_successors(x)]
            if x.is_root:
                if max(kids) - min(kids) > tol * max(1.0, max(kids)):
                    root_verified = False
                    continue
            expected = kernel(params, kids[0], kids[1])
            residual = abs(field_u(field_, x) - expected) / max(1.0, expected)
            worst = max(worst, residual)
            checked += 1
    return RecursionCheck(ok=worst <= tol, max_residual=worst, checked=checked, root_verified=root_verified)


def verify_recursion(params: ModelParams, field_: FieldAssignment, n: int, tol: float = 1e-9) -> bool:
    return check_recursion(params, field_, n, tol).ok


# -- translation-invariant and period-two fixed points -----------------------


def _reciprocal_pair(b: float) -> tuple[float, float] | None:
    """Positive roots of u^2 + b u + 1 = 0 (product one), or None."""
    disc = b * b - 4.0
    if b >= 0 or disc <= DISCRIMINANT_FLOOR:
        return None
    big = (-b + math.sqrt(disc)) / 2.0
    return 1.0 / big, big


@dataclass(frozen=True)
class TIFixedPoints:
    alpha: float
    u1: float | None
    u3: float | None
    u2: float = 1.0

    @property
    def roots(self) -> tuple[float, ...]:
        return (self.u2,) if self.u1 is None else (self.u1, self.u2, self.u3)


def ti_alpha(params: ModelParams) -> float:
    return 2.0 * params.theta1 / params.theta - params.theta1**2


def solve_ti(params: ModelParams) -> TIFixedPoints:
    """Solve u = g(u).  The cubic has the root u = 1; deflating it leaves
    u^2 + (1 + alpha) u + 1 = 0 with alpha = 2 theta1/theta - theta1^2."""
    alpha = ti_alpha(params)
    pair = _reciprocal_pair(1.0 + alpha)
    if pair is None:
        return TIFixedPoints(alpha=alpha, u1=None, u3=None)
    return TIFixedPoints(alpha=alpha, u1=pair[0], u3=pair[1])


@dataclass(frozen=True)
class PeriodicFixedPoints:
    pair: tuple[float, float] | None
    trivial: tuple[float, float] = (1.0, 1.0)
    coefficients: tuple[float, float] = field(default=(0.0, 0.0))  # (c2, c1)

    @property
    def u_star(self) -> float | None:
        return None if self.pair is None else self.pair[0]

    @property
    def v_star(self) -> float | None:
        return None if self.pair is None else self.pair[1]


def periodic_coefficients(params: ModelParams) -> tuple[float, float]:
    """(c2, c1) of c2 (x^2 + 1) + c1 x = 0, whose roots are the genuine two-cycle of g."""
    t, t1 = params.theta, params.theta1
    a = t1 * t1 * t
    c2 = a * (a + 2 * t1 + t)
    c1 = a * a + 4 * t1**3 * t + 4 * t1 * t1 - t * t
    return c2, c1


def solve_periodic(params: ModelParams) -> PeriodicFixedPoints:
    c2, c1 = periodic_coefficients(params)
    pair = _reciprocal_pair(c1 / c2)
    return PeriodicFixedPoints(pair=pair, coefficients=(c2, c1))


# -- phase diagram -----------------------------------------------------------


class Region(enum.Enum):
    THREE_TRANSLATION_INVARIANT = "ThreeTranslationInvariant"
    THREE_PERIODIC = "ThreePeriodic"
    UNIQUE = "Unique"


@dataclass(frozen=True)
class RegionClass:
    tag: Region
    boundary_distance: float


def ti_threshold(theta1: float) -> float:
    """theta above which three constant solutions exist (inf for theta1 <= sqrt 3)."""
    return 2 * theta1 / (theta1 * theta1 - 3) if theta1 > SQRT3 else math.inf


def periodic_threshold(theta1: float) -> float:
    return 2 * theta1 / (1 - 3 * theta1 * theta1) if theta1 * theta1 * 3 < 1 else math.inf


def _curve_distances(theta: float, theta1: float) -> tuple[float, float]:
    """First-order signed Euclidean distances in the (theta1, theta) plane to the
    curves theta (theta1^2 - 3) = 2 theta1 and theta (1 - 3 theta1^2) = 2 theta1.

    Positive means inside the corresponding three-solution region.
    """
    F = theta * (theta1 * theta1 - 3) - 2 * theta1
    P = theta * (1 - 3 * theta1 * theta1) - 2 * theta1
    grad_f = math.hypot(2 * theta * theta1 - 2, theta1 * theta1 - 3)
    grad_p = math.hypot(-6 * theta * theta1 - 2, 1 - 3 * theta1 * theta1)
    return F / grad_f, P / grad_p


def classify_region(params: ModelParams) -> RegionClass:
    return classify_thetas(params.theta, params.theta1)


def classify_thetas(theta: float, theta1: float) -> RegionClass:
    if theta <= 0 or theta1 <= 0:
        raise DomainError("theta and theta1 must be positive")
    d_ti, d_p = _curve_distances(theta, theta1)
    if d_ti > 0:
        return RegionClass(Region.THREE_TRANSLATION_INVARIANT, d_ti)
    if d_p > 0:
        return RegionClass(Region.THREE_PERIODIC, d_p)
    # on a curve (distance exactly 0) or outside both regions
    return RegionClass(Region.UNIQUE, -min(abs(d_ti), abs(d_p)))


# -- periodic Gibbs measures for a finite-index subgroup ---------------------


@dataclass(frozen=True)
class PeriodicMeasureSet:
    region: Region
    measures: tuple[tuple[str, FieldAssignment], ...]
    note: str | None = None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.measures)


def translation_invariant_measures(params: ModelParams) -> list[tuple[str, FieldAssignment]]:
    ti = solve_ti(params)
    out: list[tuple[str, FieldAssignment]] = []
    if ti.u1 is not None:
        out.append(("mu1", ConstantField(0.5 * math.log(ti.u1))))
    out.append(("mu2", ConstantField(0.0)))
    if ti.u3 is not None:
        out.append(("mu3", ConstantField(0.5 * math.log(ti.u3))))
    return out


def parity_measures(params: ModelParams) -> list[tuple[str, FieldAssignment]]:
    per = solve_periodic(params)
    if per.pair is None:
        return []
    hu, hv = (0.5 * math.log(x) for x in per.pair)
    return [("mu12", ParityField(hu, hv)), ("mu21", ParityField(hv, hu))]


def classify_periodic_measures(subgroup: SubgroupDescriptor, params: ModelParams) -> PeriodicMeasureSet:
    """H0-periodic measures: the translation-invariant ones, plus the two
    parity measures when H0 contains no generator and they exist."""
    region = classify_region(params).tag
    measures = translation_invariant_measures(params)
    if not subgroup.has_generator and region is Region.THREE_PERIODIC:
        measures += parity_measures(params)
    note = None
    if params.theta1 == 1.0:
        note = "kernel non-injective; periodic classification not asserted"
    return PeriodicMeasureSet(region=region, measures=tuple(measures), note=note)


# -- brute-force root counting (test oracle) ---------------------------------


def default_oracle_grid(points: int = 20_000) -> np.ndarray:
    """Log-spaced u on [1e-6, 1e6]; an even count keeps u = 1 off the grid."""
    if points % 2:
        points += 1
    return np.logspace(-6, 6, points)


def _residual(theta, theta1, u, composed: bool):
    """g(u) - u, or g(g(u)) - u."""
    gu = g_map(theta, theta1, u)
    if composed:
        gu = g_map(theta, theta1, gu)
    return gu - u


def root_counts_grid(theta, theta1, grid: np.ndarray | None = None, composed: bool = False) -> np.ndarray:
    """Vectorised sign-change count of g(u) - u (or g(g(u)) - u) over ``grid``
    for arrays of (theta, theta1)."""
    grid = default_oracle_grid() if grid is None else np.asarray(grid)
    theta = np.asarray(theta, dtype=float)[..., None]
    theta1 = np.asarray(theta1, dtype=float)[..., None]
    r = _residual(theta, theta1, grid, composed)
    s = np.sign(r)
    changes = np.count_nonzero(s[..., 1:] * s[..., :-1] < 0, axis=-1)
    return changes + np.count_nonzero(s == 0, axis=-1)


def oracle_roots(params: ModelParams, grid: np.ndarray | None = None, composed: bool = False, xtol: float = 1e-13) -> list[float]:
    """Roots of g(u) = u (or g(g(u)) = u) isolated by a sign scan of the grid
    and refined by bisection."""
    grid = default_oracle_grid() if grid is None else np.asarray(grid)
    t, t1 = params.theta, params.theta1
    logs = np.log(grid)

    def resid(s: float) -> float:
        return float(_residual(t, t1, math.exp(s), composed))

    r = _residual(t, t1, grid, composed)
    roots = [float(u) for u, v in zip(grid, r) if v == 0]
    for i in np.flatnonzero(np.sign(r[1:]) * np.sign(r[:-1]) < 0):
        s = optimize.bisect(resid, logs[i], logs[i + 1], xtol=xtol)
        roots.append(math.exp(s))
    return sorted(roots)


def root_count_oracle(params: ModelParams, grid: np.ndarray | None = None, composed: bool = False) -> int:
    return len(oracle_roots(params, grid, composed))


def region_from_counts(fixed: int, two_cycle: int) -> Region:
    if fixed == 3:
        return Region.THREE_TRANSLATION_INVARIANT
    if fixed == 1 and two_cycle == 3:
        return Region.THREE_PERIODIC
    return Region.UNIQUE
