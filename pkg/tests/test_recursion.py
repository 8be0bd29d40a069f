import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from cayley_ising.errors import DomainError
from cayley_ising.model import ModelParams
from cayley_ising.recursion import (
    ConstantField,
    ExplicitField,
    ParityField,
    Region,
    check_recursion,
    classify_periodic_measures,
    classify_region,
    classify_thetas,
    g_map,
    kernel,
    oracle_roots,
    periodic_threshold,
    region_from_counts,
    root_counts_grid,
    solve_periodic,
    solve_ti,
    ti_threshold,
    verify_recursion,
)
from cayley_ising.tree import SubgroupDescriptor, layout

positive = st.floats(0.05, 20.0)
log_theta = st.floats(-3.0, 3.0)


def brute_force_kernel(params, x, y):
    """Ratio of partition sums over two sibling spins below a +/- parent,
    each child carrying boundary weight u = exp(2h)."""
    bJ, bJ1 = params.beta * params.J, params.beta * params.J1
    hx, hy = 0.5 * math.log(x), 0.5 * math.log(y)

    def z(parent):
        return sum(
            math.exp(bJ * a * b + bJ1 * parent * (a + b) + hx * a + hy * b)
            for a, b in itertools.product((1, -1), repeat=2)
        )

    return z(1) / z(-1)


@given(log_theta, log_theta, positive, positive)
def test_kernel_matches_direct_summation(lt, lt1, x, y):
    params = ModelParams.from_thetas(math.exp(lt), math.exp(lt1))
    assert kernel(params, x, y) == pytest.approx(brute_force_kernel(params, x, y), rel=1e-12)


@given(log_theta, log_theta, positive, positive)
def test_kernel_symmetries(lt, lt1, x, y):
    params = ModelParams.from_thetas(math.exp(lt), math.exp(lt1))
    f = kernel(params, x, y)
    assert f == pytest.approx(kernel(params, y, x), rel=1e-13)
    assert kernel(params, 1 / x, 1 / y) == pytest.approx(1 / f, rel=1e-12)
    assert kernel(params, 1.0, 1.0) == pytest.approx(1.0)


@given(log_theta, log_theta, positive)
def test_inverting_theta1_inverts_g(lt, lt1, u):
    t, t1 = math.exp(lt), math.exp(lt1)
    assert g_map(t, 1 / t1, u) == pytest.approx(1 / g_map(t, t1, u), rel=1e-12)


def test_kernel_rejects_nonpositive(ti_point):
    with pytest.raises(DomainError):
        kernel(ti_point, 0.0, 1.0)


def test_ti_roots_closed_form(ti_point):
    ti = solve_ti(ti_point)
    assert ti.u1 == pytest.approx(0.6417424305044160, abs=1e-12)
    assert ti.u3 == pytest.approx(1.5582575694955840, abs=1e-12)
    assert ti.u1 * ti.u3 == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(1.8, 4.0), st.floats(0.0, 1.0))
def test_ti_roots_match_bisection_oracle(t1, frac):
    t = ti_threshold(t1) * (1.05 + 5 * frac)
    params = ModelParams.from_thetas(t, t1)
    ti = solve_ti(params)
    assert ti.u1 is not None
    oracle = oracle_roots(params)
    assert len(oracle) == 3
    for a, b in zip(sorted(ti.roots), oracle):
        assert a == pytest.approx(b, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 0.55), st.floats(0.0, 1.0))
def test_periodic_pair_matches_bisection_oracle(t1, frac):
    t = periodic_threshold(t1) * (1.05 + 5 * frac)
    params = ModelParams.from_thetas(t, t1)
    per = solve_periodic(params)
    assert per.pair is not None
    assert per.u_star * per.v_star == pytest.approx(1.0, abs=1e-12)
    assert g_map(t, t1, per.u_star) == pytest.approx(per.v_star, rel=1e-10)
    oracle = oracle_roots(params, composed=True)
    assert len(oracle) == 3
    assert oracle[0] == pytest.approx(per.u_star, rel=1e-9)
    assert oracle[2] == pytest.approx(per.v_star, rel=1e-9)
    assert solve_ti(params).u1 is None


@settings(max_examples=300, deadline=None)
@given(st.floats(0.2, 4.0), st.floats(0.2, 10.0))
def test_region_agrees_with_root_counts(t1, t):
    rc = classify_thetas(t, t1)
    assume(abs(rc.boundary_distance) > 1e-3)
    fixed = int(root_counts_grid(t, t1))
    cycle = int(root_counts_grid(t, t1, composed=True))
    assert rc.tag is region_from_counts(fixed, cycle)


def test_region_boundaries_are_unique():
    t1 = 2.0
    assert classify_thetas(ti_threshold(t1), t1).tag in (Region.UNIQUE, Region.THREE_TRANSLATION_INVARIANT)
    assert classify_thetas(ti_threshold(t1) * 0.999, t1).tag is Region.UNIQUE
    assert classify_thetas(ti_threshold(t1) * 1.001, t1).tag is Region.THREE_TRANSLATION_INVARIANT
    assert classify_thetas(1.0, 1.0).tag is Region.UNIQUE
    assert classify_thetas(5.0, 0.5).tag is Region.THREE_PERIODIC


@given(log_theta, log_theta, st.floats(0.1, 10.0))
def test_region_is_scale_invariant(J, J1, c):
    p = ModelParams(J, J1, 1.0)
    assert classify_region(p).tag is classify_region(p.scaled(c)).tag


def test_fixed_point_fields_satisfy_recursion(ti_point, periodic_point):
    ti = solve_ti(ti_point)
    for h in (0.0, 0.5 * math.log(ti.u3), 0.5 * math.log(ti.u1)):
        assert verify_recursion(ti_point, ConstantField(h), 4)
    per = solve_periodic(periodic_point)
    hu, hv = 0.5 * math.log(per.u_star), 0.5 * math.log(per.v_star)
    check = check_recursion(periodic_point, ParityField(hu, hv), 4)
    assert check.ok and check.root_verified
    assert not verify_recursion(ti_point, ConstantField(0.3), 3)


def test_explicit_field_round_trip(ti_point):
    u3 = solve_ti(ti_point).u3
    values = {v: 0.5 * math.log(u3) for v in layout(3).vertices}
    check = check_recursion(ti_point, ExplicitField(values), 3)
    assert check.ok


def test_field_range_validation():
    with pytest.raises(DomainError):
        ConstantField(1e4)


def test_periodic_measure_classification(ti_point, periodic_point):
    even = SubgroupDescriptor.even_subgroup()
    full = SubgroupDescriptor.full_group()
    assert classify_periodic_measures(even, periodic_point).names == ("mu2", "mu12", "mu21")
    assert classify_periodic_measures(full, periodic_point).names == ("mu2",)
    assert classify_periodic_measures(even, ti_point).names == ("mu1", "mu2", "mu3")
    abstract = SubgroupDescriptor.abstract(has_generator=True)
    assert classify_periodic_measures(abstract, periodic_point).names == ("mu2",)
    flat = classify_periodic_measures(even, ModelParams.from_thetas(5.0, 1.0))
    assert flat.note is not None


def test_root_count_grid_is_vectorised():
    t = np.array([5.0, 5.0, 1.0])
    t1 = np.array([2.0, 0.5, 1.0])
    assert list(root_counts_grid(t, t1)) == [3, 1, 1]
    assert list(root_counts_grid(t, t1, composed=True)) == [3, 3, 1]
