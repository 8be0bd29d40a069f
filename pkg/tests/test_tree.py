import itertools

import pytest
from hypothesis import given, strategies as st

from cayley_ising.errors import DomainError, ResourceLimitError
from cayley_ising.tree import (
    ROOT,
    SubgroupDescriptor,
    Vertex,
    direct_successors,
    distance,
    enumerate_levels,
    in_even_subgroup,
    is_connected,
    iter_words,
    layout,
    level_size,
    multiply_generator,
    neighbors,
    nn_bonds,
    ternary_bonds,
    volume_size,
)

reduced_words = st.lists(st.sampled_from([1, 2, 3]), max_size=8).filter(
    lambda w: all(a != b for a, b in zip(w, w[1:]))
)


@pytest.mark.parametrize("n", range(6))
def test_ball_matches_brute_force_word_list(n):
    levels, ball = enumerate_levels(n)
    assert set(ball) == set(iter_words(n))
    assert len(ball) == volume_size(n) == 1 + 3 * (2**n - 1)
    assert [len(lv) for lv in levels] == [level_size(m) for m in range(n + 1)]


def test_ball_sizes():
    assert [volume_size(n) for n in (1, 2, 3)] == [4, 10, 22]


def test_levels_are_shortlex_and_children_are_adjacent():
    levels, ball = enumerate_levels(4)
    assert ball == sorted(ball)
    for m in range(1, 4):
        for i, v in enumerate(levels[m]):
            assert levels[m + 1][2 * i : 2 * i + 2] == direct_successors(v)


def test_reduced_word_validation():
    with pytest.raises(DomainError):
        Vertex((1, 1))
    with pytest.raises(DomainError):
        Vertex((4,))


@given(reduced_words, st.sampled_from([1, 2, 3]))
def test_generators_are_involutions(word, a):
    v = Vertex(tuple(word))
    assert multiply_generator(multiply_generator(v, a), a) == v
    assert distance(v, multiply_generator(v, a)) == 1


@given(reduced_words)
def test_every_vertex_has_three_neighbours(word):
    v = Vertex(tuple(word))
    nbrs = neighbors(v)
    assert len(set(nbrs)) == 3
    assert all(v in neighbors(w) for w in nbrs)
    assert len(direct_successors(v)) == (3 if v.is_root else 2)


@pytest.mark.parametrize("n", range(1, 6))
def test_bond_counts(n):
    assert len(nn_bonds(n)) == volume_size(n) - 1
    # three sibling pairs under the root, one under each other internal vertex
    assert len(ternary_bonds(n)) == 3 + (volume_size(n - 1) - 1)


def test_depth_two_bonds_explicit():
    tern = {frozenset((x.word, y.word)) for x, y in ternary_bonds(2)}
    expected = {frozenset(p) for p in itertools.combinations([(1,), (2,), (3,)], 2)}
    expected |= {frozenset(((1, 2), (1, 3))), frozenset(((2, 1), (2, 3))), frozenset(((3, 1), (3, 2)))}
    assert tern == expected
    for x, y in nn_bonds(2):
        assert distance(x, y) == 1 and y.parent == x


def test_ternary_bonds_are_siblings_at_distance_two():
    for x, y in ternary_bonds(4):
        assert x.parent == y.parent and distance(x, y) == 2


def test_shell_occupies_high_indices():
    lay = layout(3)
    assert list(lay.shell_indices()) == list(range(volume_size(2), volume_size(3)))
    assert all(lay.vertices[i].level == 3 for i in lay.shell_indices())


def test_depth_cap():
    with pytest.raises(ResourceLimitError):
        enumerate_levels(17)
    with pytest.raises(DomainError):
        enumerate_levels(-1)


def test_connectivity():
    assert is_connected([ROOT, Vertex((1,)), Vertex((1, 2))])
    assert not is_connected([Vertex((1,)), Vertex((2,))])


def test_subgroups():
    even = SubgroupDescriptor.even_subgroup()
    assert not even.has_generator
    assert even.contains(Vertex((1, 2))) and not even.contains(Vertex((1,)))
    assert SubgroupDescriptor.full_group().contains(Vertex((3,)))
    assert in_even_subgroup(ROOT)
    with pytest.raises(DomainError):
        SubgroupDescriptor(SubgroupDescriptor.even_subgroup().kind, True)
