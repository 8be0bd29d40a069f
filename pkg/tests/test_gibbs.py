import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cayley_ising.errors import DomainError, ResourceLimitError
from cayley_ising.gibbs import (
    GroundConfig,
    check_consistency,
    contract,
    ground_configuration,
    log_partition_sum_product,
    marginal_on_inner,
    measure_of,
    named_measures,
    root_marginal,
    root_plus_probability,
    zero_temperature_scan,
)
from cayley_ising.model import Configuration, ModelParams, energy
from cayley_ising.recursion import ConstantField, ExplicitField, ParityField, Region, solve_periodic, solve_ti
from cayley_ising.tree import Vertex, layout

couplings = st.floats(-1.5, 1.5)
fields = st.floats(-1.0, 1.0)


def test_free_measure_is_uniform():
    m = measure_of(ModelParams(0.0, 0.0), ConstantField(0.0), 2)
    assert np.allclose(m.probabilities(), 1 / 1024, rtol=1e-13, atol=0)


def test_probability_matches_boltzmann_weight():
    params, h = ModelParams(0.4, -0.7, 1.3), 0.25
    m = measure_of(params, ConstantField(h), 2)
    cfg = Configuration.from_code(2, 0b0110100101)
    shell = sum(cfg[v] for v in layout(2).levels[2])
    expected = math.exp(-params.beta * energy(params, cfg) + h * shell - m.log_Z)
    assert m.prob(cfg) == pytest.approx(expected, rel=1e-12)


@given(couplings, couplings)
def test_zero_field_measure_is_flip_symmetric(J, J1):
    m = measure_of(ModelParams(J, J1), ConstantField(0.0), 2)
    p = m.probabilities()
    assert np.allclose(p, p[::-1], rtol=1e-12, atol=0)  # code -> complement is reversal


@settings(deadline=None, max_examples=40)
@given(couplings, couplings, fields, fields, st.integers(1, 3))
def test_sum_product_matches_enumeration(J, J1, h_even, h_odd, n):
    params = ModelParams(J, J1)
    field_ = ParityField(h_even, h_odd)
    exact = measure_of(params, field_, n, "enumeration")
    assert log_partition_sum_product(params, field_, n) == pytest.approx(exact.log_Z, rel=1e-12, abs=1e-12)
    p = exact.probabilities()
    root_minus = (np.arange(len(p)) & 1).astype(bool)
    assert root_plus_probability(params, field_, n) == pytest.approx(p[~root_minus].sum(), abs=1e-12)


def test_sum_product_with_explicit_field():
    rng = np.random.default_rng(7)
    params = ModelParams(0.3, 0.8)
    values = {v: float(x) for v, x in zip(layout(3).levels[3], rng.normal(size=12))}
    field_ = ExplicitField(values)
    exact = measure_of(params, field_, 3, "enumeration")
    assert log_partition_sum_product(params, field_, 3) == pytest.approx(exact.log_Z, rel=1e-12)


def test_sum_product_depth_limits():
    params = ModelParams(0.3, 0.8)
    assert np.all(np.isfinite(contract(params, ConstantField(0.1), 12)))
    with pytest.raises(ResourceLimitError):
        contract(params, ConstantField(0.1), 13)
    with pytest.raises(ResourceLimitError):
        measure_of(params, ConstantField(0.1), 4, "enumeration")


def test_marginal_preserves_mass():
    m = measure_of(ModelParams(0.2, 0.5), ConstantField(0.1), 3)
    inner = marginal_on_inner(m.probabilities(), 3)
    assert len(inner) == 2**10
    assert inner.sum() == pytest.approx(1.0, abs=1e-12)


def test_consistency_of_named_measures(ti_point, periodic_point):
    for params in (ti_point, periodic_point):
        for name, field_ in named_measures(params):
            report = check_consistency(params, field_, 2)
            assert report.passed, name
            assert report.recursion_ok and report.agrees_with_recursion


@pytest.mark.parametrize("theta,theta1", [(5.0, 2.0), (5.0, 0.5), (1.0, 1.0), (0.3, 3.0)])
def test_inconsistent_field_is_detected(theta, theta1):
    params = ModelParams.from_thetas(theta, theta1)
    report = check_consistency(params, ConstantField(0.3), 2)
    assert not report.passed and not report.recursion_ok
    assert report.agrees_with_recursion


@settings(deadline=None, max_examples=40)
@given(couplings, couplings, st.lists(fields, min_size=6, max_size=6))
def test_consistency_equivalent_to_recursion(J, J1, level2):
    # Random shell fields on W_2 and the level-1 values forced (or not) by
    # the recursion: consistency holds exactly when the recursion does.
    params = ModelParams(J, J1)
    lay = layout(2)
    values = {v: h for v, h in zip(lay.levels[2], level2)}
    for i, v in enumerate(lay.levels[1]):
        a, b = level2[2 * i], level2[2 * i + 1]
        ux, uy = math.exp(2 * a), math.exp(2 * b)
        fx = params.theta1**2 * params.theta * ux * uy + params.theta1 * (ux + uy) + params.theta
        fy = params.theta * ux * uy + params.theta1 * (ux + uy) + params.theta1**2 * params.theta
        values[v] = 0.5 * math.log(fx / fy)
    good = check_consistency(params, ExplicitField(values), 2)
    assert good.passed and good.recursion_ok
    values[Vertex((2,))] += 0.2
    bad = check_consistency(params, ExplicitField(values), 2)
    assert not bad.passed and not bad.recursion_ok


def test_consistency_needs_depth_two():
    with pytest.raises(DomainError):
        check_consistency(ModelParams(1, 1), ConstantField(0), 1)


def test_named_measures(ti_point, periodic_point):
    assert [n for n, _ in named_measures(ti_point)] == ["mu1", "mu2", "mu3"]
    assert [n for n, _ in named_measures(periodic_point)] == ["mu2", "mu12", "mu21"]
    assert [n for n, _ in named_measures(ModelParams(0.1, 0.1))] == ["mu2"]


def test_root_marginal():
    assert root_marginal(1.0) == 0.5
    assert root_marginal(3.0) == pytest.approx(0.75)
    with pytest.raises(DomainError):
        root_marginal(0.0)


def test_ground_configurations():
    pm = ground_configuration(GroundConfig.PARITY_PLUS_MINUS, 2)
    assert pm[Vertex(())] == 1 and pm[Vertex((1,))] == -1 and pm[Vertex((1, 2))] == 1
    assert ground_configuration(GroundConfig.ALL_MINUS, 2).code() == 2**10 - 1


def test_zero_temperature_ferromagnetic():
    scan = zero_temperature_scan(1.0, 1.0, [1, 2, 4, 8, 16])
    assert all(r.region is Region.THREE_TRANSLATION_INVARIANT for r in scan.rows)
    assert scan.u3_increasing and scan.mu3_increasing and scan.mu1_increasing
    assert scan.mu12_increasing is None
    assert scan.monotone
    assert scan.rows[-1].mu3_plus >= 0.99
    # frozen from this implementation's own log-space computation
    assert scan.rows[0].u3 == pytest.approx(51.578762208443088, rel=1e-12)
    assert scan.rows[-1].log_mu3_plus_complement == pytest.approx(-96.0, abs=1e-9)


def test_zero_temperature_antiferromagnetic_parity():
    scan = zero_temperature_scan(1.0, -1.0, [1, 2, 4, 8])
    assert all(r.region is Region.THREE_PERIODIC for r in scan.rows)
    assert scan.u3_increasing is None
    assert scan.mu12_increasing and scan.mu21_increasing and scan.monotone
    assert scan.rows[-1].mu12_minus_plus > 0.99


def test_zero_temperature_schedule_validation():
    with pytest.raises(DomainError):
        zero_temperature_scan(1.0, 1.0, [2, 1])
