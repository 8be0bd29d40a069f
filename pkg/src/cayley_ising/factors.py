"""Factor types of the algebras attached to the translation-invariant states.

The type is read off from arithmetic alone: the state of measure i gives a
factor of type III_delta when the probability ratios

    p1/p2 = theta,   p11/p22 = theta1,   p1/p11

and, for the ordered phases, exp(h_i) are all integer powers of one
delta in (0, 1).  Finding delta is a commensurability problem on the
logarithms, solved with bounded-denominator continued fractions
(``fractions.Fraction.limit_denominator``).  No relation within tolerance
means type III_1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import DomainError, RegionError
from .model import ModelParams
from .recursion import Region, classify_region, solve_ti

DEFAULT_TOL = 1e-9
DEFAULT_MAX_EXPONENT = 64
DEFAULT_MAX_DENOMINATOR = 64
UNIT_RATIO_TOL = 1e-14

RATIO_NAMES = ("p1/p2", "p11/p22", "p1/p11")


@dataclass(frozen=True)
class FactorProbabilities:
    p1: float
    p2: float
    p11: float
    p22: float


def probabilities(params: ModelParams) -> FactorProbabilities:
    """p1 = 1/(exp(-2 beta J) + 1), p11 likewise with J1; p2, p22 the complements."""
    return FactorProbabilities(
        p1=float(expit(params.log_theta)),
        p2=float(expit(-params.log_theta)),
        p11=float(expit(params.log_theta1)),
        p22=float(expit(-params.log_theta1)),
    )


def log_ratios(params: ModelParams) -> tuple[float, float, float]:
    """Logs of p1/p2, p11/p22 and p1/p11, evaluated without cancellation."""
    x, x1 = params.log_theta, params.log_theta1
    cross = float(np.logaddexp(0.0, -x1) - np.logaddexp(0.0, -x))
    return x, x1, cross


# -- commensurability ---------------------------------------------------------


@dataclass(frozen=True)
class CommensurabilityResult:
    found: bool
    delta: float | None
    exponents: tuple[int, ...]  # one per input ratio; 0 for excluded ones
    k: int | None  # exponent of the field term, when one was given
    excluded: tuple[int, ...]  # indices of ratios treated as exponent 0
    trace_like: bool = False
    tol: float = DEFAULT_TOL
    max_exponent: int = DEFAULT_MAX_EXPONENT

    @property
    def log_delta(self) -> float | None:
        return None if self.delta is None else math.log(self.delta)


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def commensurable_logs(
    logs: Sequence[float],
    extra_log: float | None = None,
    tol: float = DEFAULT_TOL,
    max_exponent: int = DEFAULT_MAX_EXPONENT,
    exclude: Sequence[int] = (),
) -> CommensurabilityResult:
    """Find the smallest delta in (0, 1) with every log an integer multiple of log(delta).

    Entries of ``logs`` at indices in ``exclude``, and entries that vanish
    (ratio equal to one), get exponent 0 and are left out of the search.
    """
    if not 0 < tol <= 1e-3:
        raise DomainError("tol must lie in (0, 1e-3]")
    if not 1 <= max_exponent <= 64:
        raise DomainError("max_exponent must lie in [1, 64]")
    excluded = tuple(i for i, x in enumerate(logs) if i in exclude or abs(x) <= UNIT_RATIO_TOL)
    terms = [x for i, x in enumerate(logs) if i not in excluded]
    has_extra = extra_log is not None and abs(extra_log) > UNIT_RATIO_TOL
    if has_extra:
        terms.append(extra_log)

    def result(found, delta=None, exps=None, k=None, trace_like=False):
        exps = exps or {}
        exponents = tuple(0 if i in excluded else exps.get(i, 0) for i in range(len(logs)))
        if extra_log is not None and k is None and not has_extra:
            k = 0
        return CommensurabilityResult(found, delta, exponents if found else tuple(0 for _ in logs), k, excluded, trace_like, tol, max_exponent)

    if not terms:
        return result(False, trace_like=True)

    ref = terms[0]
    fracs = []
    for x in terms:
        frac = Fraction(x / ref).limit_denominator(max_exponent)
        if abs(x - float(frac) * ref) > tol * abs(ref):
            return result(False)
        fracs.append(frac)
    common = reduce(_lcm, (f.denominator for f in fracs), 1)
    ints = [int(f * common) for f in fracs]
    g = reduce(math.gcd, ints)
    ints = [a // g for a in ints]
    # orient so that log(delta) < 0
    sign = -1 if ref > 0 else 1
    ints = [sign * a for a in ints]
    if max(abs(a) for a in ints) > max_exponent:
        return result(False)
    log_delta = sum(a * x for a, x in zip(ints, terms)) / sum(a * a for a in ints)
    if any(abs(x - a * log_delta) > tol * abs(log_delta) for a, x in zip(ints, terms)):
        return result(False)
    active = [i for i in range(len(logs)) if i not in excluded]
    exps = dict(zip(active, ints))
    k = ints[-1] if has_extra else None
    return result(True, math.exp(log_delta), exps, k)


def find_commensurable(
    ratios: Sequence[float],
    extra: float | None = None,
    tol: float = DEFAULT_TOL,
    max_exponent: int = DEFAULT_MAX_EXPONENT,
) -> CommensurabilityResult:
    """``ratios`` and the optional field term ``extra`` = exp(h) as integer powers of one delta."""
    if any(r <= 0 for r in ratios) or (extra is not None and extra <= 0):
        raise DomainError("ratios must be positive")
    return commensurable_logs(
        [math.log(r) for r in ratios],
        None if extra is None else math.log(extra),
        tol,
        max_exponent,
    )


# -- classification ------------------------------------------------------------


class FactorType(enum.Enum):
    III_LAMBDA = "III_lambda"
    III_1 = "III_1"
    II_1 = "II_1"


@dataclass(frozen=True)
class FactorClassification:
    measure: int
    type_tag: FactorType
    delta: float | None
    exponents: dict[str, int]
    k: int | None
    modular_period: float | None
    subfactor_r: Fraction | None
    verdict: str  # "exact" for the structured coupling cases, else "numerical"
    excluded_ratios: tuple[str, ...]
    field_h: float
    tol: float
    max_exponent: int
    commensurability: CommensurabilityResult = field(repr=False, compare=False, default=None)

    @property
    def label(self) -> str:
        if self.type_tag is FactorType.III_LAMBDA:
            return f"III_{self.delta:.6f}"
        return self.type_tag.value


def modular_period(delta: float) -> float:
    """t0 = -2 pi / log(delta)."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    return -2.0 * math.pi / math.log(delta)


def measure_field(params: ModelParams, measure: int) -> float:
    """h_i = log(u_i)/2 for the constant solution of measure i."""
    if measure == 2:
        return 0.0
    if measure not in (1, 3):
        raise DomainError("measure must be 1, 2 or 3")
    if classify_region(params).tag is not Region.THREE_TRANSLATION_INVARIANT:
        raise RegionError(f"measure {measure} exists only in the three-solution region")
    ti = solve_ti(params)
    return 0.5 * math.log(ti.u3 if measure == 3 else ti.u1)


def _excluded_cross_ratio(logs: Sequence[float]) -> bool:
    # a block with p1 = p2 (or p11 = p22) is a multiple of the identity and
    # drops out of the modular flow, taking the cross ratio with it
    return abs(logs[0]) <= UNIT_RATIO_TOL or abs(logs[1]) <= UNIT_RATIO_TOL


def classify(
    params: ModelParams,
    measure: int,
    tol: float = DEFAULT_TOL,
    max_exponent: int = DEFAULT_MAX_EXPONENT,
    max_denominator: int = DEFAULT_MAX_DENOMINATOR,
) -> FactorClassification:
    h = measure_field(params, measure)
    logs = log_ratios(params)
    exclude = (2,) if _excluded_cross_ratio(logs) else ()
    comm = commensurable_logs(logs, h if measure != 2 else None, tol, max_exponent, exclude)
    excluded_names = tuple(RATIO_NAMES[i] for i in comm.excluded)
    verdict = "exact" if 2 in comm.excluded else "numerical"

    if comm.trace_like and h == 0.0:
        tag, delta, t0 = FactorType.II_1, None, None
    elif comm.found:
        tag, delta = FactorType.III_LAMBDA, comm.delta
        t0 = modular_period(delta)
    else:
        tag, delta, t0 = FactorType.III_1, None, None

    r = None
    if measure != 2 and tag is FactorType.III_LAMBDA:
        base = classify(params, 2, tol, max_exponent, max_denominator)
        if base.type_tag is FactorType.III_LAMBDA:
            r = subfactor_exponent(base.delta, delta, max_denominator)

    return FactorClassification(
        measure=measure,
        type_tag=tag,
        delta=delta,
        exponents={name: e for name, e in zip(RATIO_NAMES, comm.exponents)} if comm.found else {},
        k=comm.k if comm.found else None,
        modular_period=t0,
        subfactor_r=r,
        verdict=verdict,
        excluded_ratios=excluded_names,
        field_h=h,
        tol=tol,
        max_exponent=max_exponent,
        commensurability=comm,
    )


def subfactor_exponent(delta: float, delta1: float, max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> Fraction | None:
    """Rational r in (0, 1) with delta1 = delta**r, or None."""
    if not (0 < delta < 1 and 0 < delta1 < 1):
        raise DomainError("delta and delta1 must lie in (0, 1)")
    r = math.log(delta1) / math.log(delta)
    frac = Fraction(r).limit_denominator(max_denominator)
    if abs(r - float(frac)) > 1e-10 or not 0 < frac < 1:
        return None
    return frac


def power_parametrization(delta: float, m1: int, m2: int, m3: int) -> FactorProbabilities:
    """Probabilities written through delta and the exponents of p1/p2, p11/p22, p1/p11."""
    d1 = delta**m1
    return FactorProbabilities(
        p1=d1 / (d1 + 1),
        p2=1 / (d1 + 1),
        p11=delta ** (m1 - m3) / (d1 + 1),
        p22=delta ** (m1 - m2 - m3) / (d1 + 1),
    )


def verify_power_parametrization(delta: float, m1: int, m2: int, m3: int, tol: float = 1e-12) -> bool:
    """Round trip: the parametrised p's reproduce the three power relations and
    are normalised probabilities."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    p = power_parametrization(delta, m1, m2, m3)
    targets = [
        (p.p1 / p.p2, delta**m1),
        (p.p11 / p.p22, delta**m2),
        (p.p1 / p.p11, delta**m3),
    ]
    ratios_ok = all(math.isclose(a, b, rel_tol=tol) for a, b in targets)
    normalised = abs(p.p1 + p.p2 - 1) <= tol and abs(p.p11 + p.p22 - 1) <= tol
    in_range = all(0 < q < 1 for q in (p.p1, p.p2, p.p11, p.p22))
    return ratios_ok and normalised and in_range


# -- worked examples -----------------------------------------------------------


def bisect_root(func, lo: float, hi: float, tol: float = 1e-14, max_iter: int = 200) -> float:
    """Plain bisection on a sign-changing bracket; stops when the bracket is below tol."""
    flo = func(lo)
    if flo * func(hi) > 0:
        raise DomainError("bracket does not change sign")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = func(mid)
        if fmid == 0 or hi - lo < tol:
            return mid
        if flo * fmid < 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ZeroJExample:
    """The J = 0 construction where theta1 = (1 + t)/(1 - t) and
    t^3 + 5 t^2 + 7 t - 5 = 0."""

    t: float
    cubic_residual: float
    h1: float
    h1_from_fixed_point: float
    identity_residual: float
    half_arctanh_residual: float
    params: ModelParams
    theta1: float
    delta: float
    delta1: float
    unordered: FactorClassification
    ordered: FactorClassification
    ordered_mirror: FactorClassification
    r: Fraction | None

    @property
    def n_exponent(self) -> int:
        return self.ordered.exponents["p11/p22"]

    @property
    def k(self) -> int:
        return self.ordered.k


def _cubic(t: float) -> float:
    return t**3 + 5 * t**2 + 7 * t - 5


def reproduce_zero_j_example(tol: float = DEFAULT_TOL, max_exponent: int = DEFAULT_MAX_EXPONENT) -> ZeroJExample:
    t = bisect_root(_cubic, 0.5, 1.0, tol=1e-15)
    h1 = math.atanh(math.sqrt(2 * t - 1) / t)
    theta1 = (1 + t) / (1 - t)
    params = ModelParams(J=0.0, J1=math.atanh(t), beta=1.0)
    ti = solve_ti(params)
    unordered = classify(params, 2, tol, max_exponent)
    ordered = classify(params, 3, tol, max_exponent)
    mirror = classify(params, 1, tol, max_exponent)
    return ZeroJExample(
        t=t,
        cubic_residual=abs(_cubic(t)),
        h1=h1,
        h1_from_fixed_point=0.5 * math.log(ti.u3),
        identity_residual=abs(math.sqrt(2 * t - 1) + math.sqrt(1 - t * t) - 1),
        half_arctanh_residual=abs(h1 - 0.5 * math.atanh(t)),
        params=params,
        theta1=theta1,
        delta=1 / theta1,
        delta1=theta1**-0.25,
        unordered=unordered,
        ordered=ordered,
        ordered_mirror=mirror,
        r=ordered.subfactor_r,
    )


@dataclass(frozen=True)
class EqualCouplingExample:
    """J = J1 with theta = theta1 = 1 + sqrt 2."""

    theta: float
    params: ModelParams
    above_sqrt5: bool
    u3: float
    u1: float
    delta: float
    delta1: float
    power_identity_residual: float  # |delta + 1/delta - (theta^2 - 3)|
    factored_residual: float  # |(theta + 1)(theta^2 - 2 theta - 1)|
    unordered: FactorClassification
    ordered: FactorClassification
    ordered_mirror: FactorClassification
    r: Fraction | None
    t0: float
    t0_ordered: float


def reproduce_equal_coupling_example(tol: float = DEFAULT_TOL, max_exponent: int = DEFAULT_MAX_EXPONENT) -> EqualCouplingExample:
    theta = 1 + math.sqrt(2)
    params = ModelParams.from_thetas(theta, theta)
    ti = solve_ti(params)
    unordered = classify(params, 2, tol, max_exponent)
    ordered = classify(params, 3, tol, max_exponent)
    mirror = classify(params, 1, tol, max_exponent)
    delta = unordered.delta
    return EqualCouplingExample(
        theta=theta,
        params=params,
        above_sqrt5=theta > math.sqrt(5),
        u3=ti.u3,
        u1=ti.u1,
        delta=delta,
        delta1=ordered.delta,
        power_identity_residual=abs(delta + 1 / delta - (theta**2 - 3)),
        factored_residual=abs((theta + 1) * (theta**2 - 2 * theta - 1)),
        unordered=unordered,
        ordered=ordered,
        ordered_mirror=mirror,
        r=ordered.subfactor_r,
        t0=unordered.modular_period,
        t0_ordered=ordered.modular_period,
    )

