"""Finite-volume Gibbs measures on V_n and the checks built on them.

    mu_n(sigma) = exp(-beta H(sigma) + sum_{x in W_n} h_x sigma(x)) / Z_n

Everything is kept in log space so that large beta (zero-temperature scans)
does not overflow.  Two independent routes give log Z_n: exhaustive
enumeration of all 2**|V_n| configurations (depth <= 3) and a leaf-to-root
sum-product contraction (depth <= 12).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, ResourceLimitError
from .model import (
    ENUMERATION_CAP,
    Configuration,
    ModelParams,
    check_enumerable,
    shell_spins,
    stats,
    stats_table,
)
from .recursion import (
    ConstantField,
    FieldAssignment,
    ParityField,
    Region,
    check_recursion,
    classify_region,
    parity_measures,
    solve_ti,
    translation_invariant_measures,
)
from .tree import in_even_subgroup, layout

SUM_PRODUCT_CAP = 12

# (s_y, s_z) pairs in the order used by the message arrays: column 0 is +1
_SPIN = np.array([1.0, -1.0])


def shell_field(field_: FieldAssignment, n: int) -> np.ndarray:
    """Field values on W_n in layout order."""
    if isinstance(field_, ConstantField):
        return np.full(3 * 2 ** (n - 1) if n else 1, field_.h)
    if isinstance(field_, ParityField):
        h = field_.h_even if n % 2 == 0 else field_.h_odd
        return np.full(3 * 2 ** (n - 1) if n else 1, h)
    lay = layout(n)
    return np.array([field_.at(lay.vertices[i]) for i in lay.shell_indices()])


def _is_uniform_on_shell(field_: FieldAssignment) -> bool:
    return isinstance(field_, (ConstantField, ParityField))


# -- sum-product contraction -------------------------------------------------


def _pair_messages(params: ModelParams, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Log message to a parent from two sibling subtrees; shapes (k, 2) -> (k, 2)."""
    bJ, bJ1 = params.beta * params.J, params.beta * params.J1
    sy = _SPIN[:, None]
    sz = _SPIN[None, :]
    out = np.empty_like(left)
    for col, s in enumerate(_SPIN):
        local = bJ * sy * sz + bJ1 * s * (sy + sz)  # (2, 2)
        terms = local[None] + left[:, :, None] + right[:, None, :]
        out[:, col] = logsumexp(terms.reshape(len(left), 4), axis=1)
    return out


def _root_messages(params: ModelParams, level1: np.ndarray) -> np.ndarray:
    """Log weight of each root spin, summing over its three successors."""
    bJ, bJ1 = params.beta * params.J, params.beta * params.J1
    out = np.empty(2)
    for col, s0 in enumerate(_SPIN):
        terms = []
        for i1, s1 in enumerate(_SPIN):
            for i2, s2 in enumerate(_SPIN):
                for i3, s3 in enumerate(_SPIN):
                    terms.append(
                        bJ * (s1 * s2 + s1 * s3 + s2 * s3)
                        + bJ1 * s0 * (s1 + s2 + s3)
                        + level1[0, i1] + level1[1, i2] + level1[2, i3]
                    )
        out[col] = logsumexp(terms)
    return out


def contract(params: ModelParams, field_: FieldAssignment, n: int) -> np.ndarray:
    """Unnormalised log weights of root spin (+1, -1) after summing out V_n \\ {e}."""
    if n < 0:
        raise DomainError("depth must be non-negative")
    if n > SUM_PRODUCT_CAP:
        raise ResourceLimitError(f"sum-product contraction is capped at depth {SUM_PRODUCT_CAP}")
    h = shell_field(field_, n)
    msg = np.stack([h, -h], axis=1)
    if n == 0:
        return msg[0]
    for _ in range(n - 1):
        msg = _pair_messages(params, msg[0::2], msg[1::2])
    return _root_messages(params, msg)


def log_partition_sum_product(params: ModelParams, field_: FieldAssignment, n: int) -> float:
    return float(np.logaddexp(*contract(params, field_, n)))


def root_plus_probability(params: ModelParams, field_: FieldAssignment, n: int) -> float:
    """mu_n(sigma(e) = +1) from the contraction."""
    plus, minus = contract(params, field_, n)
    return float(1.0 / (1.0 + math.exp(minus - plus)))


# -- finite-volume measures --------------------------------------------------


def log_weights(params: ModelParams, field_: FieldAssignment, n: int) -> np.ndarray:
    """-beta H + boundary term for every configuration code on V_n."""
    t = stats_table(n)
    lw = params.beta * params.J * t.A.astype(float) + params.beta * params.J1 * t.B.astype(float)
    if _is_uniform_on_shell(field_):
        lw += shell_field(field_, n)[0] * t.shell_sum
    else:
        lw += shell_field(field_, n) @ shell_spins(n)
    return lw


def log_weight(params: ModelParams, field_: FieldAssignment, config: Configuration) -> float:
    st = stats(config)
    lay = layout(config.depth)
    s = config.array()[lay.shell_indices()]
    return params.beta * (params.J * st.A + params.J1 * st.B) + float(shell_field(field_, config.depth) @ s)


@dataclass
class FiniteVolumeMeasure:
    params: ModelParams
    field: FieldAssignment
    depth: int
    log_Z: float
    method: str
    _log_weights: np.ndarray | None = field(default=None, repr=False)

    def log_weights(self) -> np.ndarray:
        if self._log_weights is None:
            self._log_weights = log_weights(self.params, self.field, self.depth)
        return self._log_weights

    def log_prob(self, config: Configuration) -> float:
        if config.depth != self.depth:
            raise DomainError(f"configuration depth {config.depth} != measure depth {self.depth}")
        return log_weight(self.params, self.field, config) - self.log_Z

    def prob(self, config: Configuration) -> float:
        return math.exp(self.log_prob(config))

    def log_complement(self, config: Configuration) -> float:
        """log(1 - mu(config)), computed without cancellation."""
        check_enumerable(self.depth)
        lw = self.log_weights()
        mask = np.ones(len(lw), dtype=bool)
        mask[config.code()] = False
        return float(logsumexp(lw[mask]) - self.log_Z)

    def probabilities(self) -> np.ndarray:
        """Probabilities of all configurations, indexed by configuration code."""
        check_enumerable(self.depth)
        return np.exp(self.log_weights() - self.log_Z)


def measure_of(params: ModelParams, field_: FieldAssignment, n: int, method: str = "auto") -> FiniteVolumeMeasure:
    """Build mu_n.  ``method`` is "enumeration", "sum_product" or "auto"
    (enumeration where allowed, contraction beyond)."""
    if method == "auto":
        method = "enumeration" if n <= ENUMERATION_CAP else "sum_product"
    if method == "enumeration":
        lw = log_weights(params, field_, n)
        return FiniteVolumeMeasure(params, field_, n, float(logsumexp(lw)), method, lw)
    if method == "sum_product":
        return FiniteVolumeMeasure(params, field_, n, log_partition_sum_product(params, field_, n), method)
    raise DomainError(f"unknown method {method!r}")


# -- consistency -------------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyReport:
    depth: int
    max_discrepancy: float
    tol: float
    recursion_ok: bool
    recursion_residual: float

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tol

    @property
    def agrees_with_recursion(self) -> bool:
        return self.passed == self.recursion_ok


def marginal_on_inner(probs: np.ndarray, n: int) -> np.ndarray:
    """Sum mu_n over the shell W_n; the result is indexed by codes on V_{n-1}."""
    inner = layout(n - 1).size
    return probs.reshape(-1, 2**inner).sum(axis=0)


def check_consistency(params: ModelParams, field_: FieldAssignment, n: int, tol: float = 1e-10, recursion_tol: float = 1e-9) -> ConsistencyReport:
    """Compare the shell marginal of mu_n with mu_{n-1} on every sigma_{n-1}.

    The report also carries the recursion check on the parents in W_{n-1},
    the only fields both measures involve.
    """
    if n < 2:
        raise DomainError("consistency is checked for n >= 2")
    check_enumerable(n)
    outer = measure_of(params, field_, n, "enumeration").probabilities()
    inner = measure_of(params, field_, n - 1, "enumeration").probabilities()
    gap = float(np.max(np.abs(marginal_on_inner(outer, n) - inner)))
    rec = check_recursion(params, field_, n, recursion_tol, last_level_only=True)
    return ConsistencyReport(n, gap, tol, rec.ok, rec.max_residual)


# -- named measures, ground states, zero temperature -------------------------


def named_measures(params: ModelParams) -> list[tuple[str, FieldAssignment]]:
    """mu1, mu2, mu3 from the constant solutions that exist, plus mu12 and
    mu21 when the period-two pair exists."""
    return translation_invariant_measures(params) + parity_measures(params)


def root_marginal(u: float) -> float:
    """u / (u + 1), the single-site plus probability for field h = log(u) / 2."""
    if not u > 0:
        raise DomainError("u must be positive")
    return 1.0 / (1.0 + 1.0 / u)


class GroundConfig(enum.Enum):
    ALL_PLUS = "AllPlus"
    ALL_MINUS = "AllMinus"
    PARITY_PLUS_MINUS = "ParityPlusMinus"
    PARITY_MINUS_PLUS = "ParityMinusPlus"


def ground_configuration(kind: GroundConfig, n: int) -> Configuration:
    lay = layout(n)
    if kind is GroundConfig.ALL_PLUS:
        values = [1] * lay.size
    elif kind is GroundConfig.ALL_MINUS:
        values = [-1] * lay.size
    else:
        even = 1 if kind is GroundConfig.PARITY_PLUS_MINUS else -1
        values = [even if in_even_subgroup(v) else -even for v in lay.vertices]
    return Configuration.from_array(n, values)


@dataclass(frozen=True)
class ZeroTRow:
    beta: float
    theta: float
    theta1: float
    region: Region
    u3: float | None = None
    root_marginal_u3: float | None = None
    mu3_plus: float | None = None
    log_mu3_plus_complement: float | None = None
    mu1_minus: float | None = None
    log_mu1_minus_complement: float | None = None
    mu2_root_marginal: float = 0.5
    mu12_minus_plus: float | None = None
    log_mu12_complement: float | None = None
    mu21_plus_minus: float | None = None
    log_mu21_complement: float | None = None


def _strictly_increasing(xs: Sequence[float | None]) -> bool | None:
    vals = [x for x in xs if x is not None]
    if len(vals) != len(xs) or len(vals) < 2:
        return None
    return all(b > a for a, b in zip(vals, vals[1:]))


@dataclass(frozen=True)
class ZeroTScan:
    J: float
    J1: float
    depth: int
    rows: tuple[ZeroTRow, ...]

    @property
    def u3_increasing(self) -> bool | None:
        return _strictly_increasing([r.u3 for r in self.rows])

    def _approach(self, attr: str) -> bool | None:
        # mu(config) increases strictly iff log(1 - mu(config)) decreases strictly
        xs = [getattr(r, attr) for r in self.rows]
        return _strictly_increasing([None if x is None else -x for x in xs])

    @property
    def mu3_increasing(self) -> bool | None:
        return self._approach("log_mu3_plus_complement")

    @property
    def mu1_increasing(self) -> bool | None:
        return self._approach("log_mu1_minus_complement")

    @property
    def mu12_increasing(self) -> bool | None:
        return self._approach("log_mu12_complement")

    @property
    def mu21_increasing(self) -> bool | None:
        return self._approach("log_mu21_complement")

    @property
    def monotone(self) -> bool:
        """True when every column that is present along the whole schedule is strictly monotone."""
        flags = [self.u3_increasing, self.mu3_increasing, self.mu1_increasing, self.mu12_increasing, self.mu21_increasing]
        present = [f for f in flags if f is not None]
        return bool(present) and all(present)


def _config_columns(params: ModelParams, field_: FieldAssignment, config: Configuration) -> tuple[float, float]:
    m = measure_of(params, field_, config.depth, "enumeration")
    return m.prob(config), m.log_complement(config)


def zero_temperature_scan(J: float, J1: float, betas: Sequence[float], n: int = 2) -> ZeroTScan:
    """Follow mu3 -> all plus, mu1 -> all minus (and the parity measures towards
    the alternating configurations) along an increasing beta schedule.

    Points where a measure does not exist are kept with empty columns.
    """
    betas = [float(b) for b in betas]
    if not betas or any(b <= 0 for b in betas):
        raise DomainError("beta schedule must be non-empty and positive")
    if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
        raise DomainError("beta schedule must be strictly increasing")
    check_enumerable(n)
    plus = ground_configuration(GroundConfig.ALL_PLUS, n)
    minus = ground_configuration(GroundConfig.ALL_MINUS, n)
    pm = ground_configuration(GroundConfig.PARITY_PLUS_MINUS, n)
    mp = ground_configuration(GroundConfig.PARITY_MINUS_PLUS, n)
    rows = []
    for beta in betas:
        params = ModelParams(J, J1, beta)
        region = classify_region(params).tag
        cols: dict = {}
        ti = solve_ti(params)
        if ti.u3 is not None:
            cols["u3"] = ti.u3
            cols["root_marginal_u3"] = root_marginal(ti.u3)
            cols["mu3_plus"], cols["log_mu3_plus_complement"] = _config_columns(params, ConstantField(0.5 * math.log(ti.u3)), plus)
            cols["mu1_minus"], cols["log_mu1_minus_complement"] = _config_columns(params, ConstantField(0.5 * math.log(ti.u1)), minus)
        parity = dict(parity_measures(params))
        if parity:
            cols["mu12_minus_plus"], cols["log_mu12_complement"] = _config_columns(params, parity["mu12"], mp)
            cols["mu21_plus_minus"], cols["log_mu21_complement"] = _config_columns(params, parity["mu21"], pm)
        rows.append(ZeroTRow(beta=beta, theta=params.theta, theta1=params.theta1, region=region, **cols))
    return ZeroTScan(J=J, J1=J1, depth=n, rows=tuple(rows))
