import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_good
from nested_qsearch.csp import (
    CspInstance,
    InvalidInstanceError,
    PartialAssignment,
    TooLargeError,
    beta_params,
    count_could_be,
    decode,
    encode,
    enumerate_solutions,
    good_mask,
    graph_coloring_instance,
    is_good,
    random_instance,
)


def test_triangle_has_nine_nogoods(triangle3):
    assert triangle3.xi == 9
    assert triangle3.k == 2
    assert triangle3.provenance == "graph-coloring"


def test_empty_graph_every_assignment_solves():
    inst = graph_coloring_instance([], 4, 2)
    assert inst.xi == 0
    assert len(enumerate_solutions(inst)) == 2**4


def test_path_nogoods_unrolled():
    inst = graph_coloring_instance([(0, 1)], 2, 2)
    assert set(inst.nogoods) == {((0, 1), (0, 0)), ((0, 1), (1, 1))}


@pytest.mark.parametrize("edges, nodes", [
    ([(0, 0)], 2),
    ([(0, 5)], 3),
    ([(0, 1), (1, 0)], 2),
])
def test_graph_coloring_rejects_bad_edges(edges, nodes):
    with pytest.raises(InvalidInstanceError):
        graph_coloring_instance(edges, nodes, 3)


def test_random_saturated_has_every_ground_instance():
    inst = random_instance(4, 2, 2, 24, seed=3)
    expected = {(c, v) for c in itertools.combinations(range(4), 2)
                for v in itertools.product(range(2), repeat=2)}
    assert set(inst.nogoods) == expected


def test_random_empty():
    assert random_instance(10, 3, 2, 0, seed=1).xi == 0


def test_random_is_deterministic():
    assert random_instance(6, 2, 2, 5, seed=42) == random_instance(6, 2, 2, 5, seed=42)


def test_random_rejects_too_many():
    with pytest.raises(InvalidInstanceError):
        random_instance(4, 2, 2, 25, seed=0)
    with pytest.raises(InvalidInstanceError):
        random_instance(2, 2, 3, 1, seed=0)


def test_random_marginals_uniform():
    # each of the 24 ground instances should be picked with probability 5/24
    counts = {}
    for s in range(3000):
        for ng in random_instance(4, 2, 2, 5, seed=s).nogoods:
            counts[ng] = counts.get(ng, 0) + 1
    freq = np.array(list(counts.values())) / 3000
    assert len(counts) == 24
    sigma = math.sqrt((5 / 24) * (19 / 24) / 3000)
    assert np.all(np.abs(freq - 5 / 24) < 4 * sigma)


@pytest.mark.parametrize("values, expected", [((0, 1), True), ((0, 0), False), ((), True)])
def test_is_good_examples(triangle3, values, expected):
    assert is_good(triangle3, PartialAssignment(values)) is expected


def test_count_could_be_examples(triangle3):
    assert count_could_be(triangle3, 2) == 6
    assert count_could_be(triangle3, 0) == 1
    assert count_could_be(triangle3, 3) == 6


def test_solution_counts(triangle3, triangle2):
    assert len(enumerate_solutions(triangle3)) == 6
    assert enumerate_solutions(triangle2) == []
    assert len(enumerate_solutions(graph_coloring_instance([(0, 1)], 2, 2))) == 2


def test_triangle_solutions_are_permutations(triangle3):
    assert sorted(enumerate_solutions(triangle3)) == sorted(itertools.permutations(range(3)))


def test_beta_params(triangle3):
    beta, beta_c = beta_params(triangle3)
    assert beta == 3
    assert beta_c == pytest.approx(9.8875106, abs=1e-6)
    _, bc2 = beta_params(graph_coloring_instance([(0, 1)], 2, 2))
    assert bc2 == pytest.approx(2.7725887, abs=1e-6)


def test_enumeration_guard():
    inst = random_instance(10, 3, 2, 4, seed=0)
    with pytest.raises(TooLargeError):
        good_mask(inst, 10, guard=1000)


def test_json_round_trip(triangle3):
    again = CspInstance.from_json(triangle3.to_json())
    assert again == triangle3
    assert again.to_json() == triangle3.to_json()


def test_json_rejects_garbage():
    with pytest.raises(InvalidInstanceError):
        CspInstance.from_dict({"mu": 3, "b": 2})
    with pytest.raises(InvalidInstanceError):
        CspInstance.from_dict({"mu": 3, "b": 2, "k": 2, "nogoods": [{"vars": [0, 0], "vals": [1, 1]}]})


def test_from_nogoods_canonicalises():
    inst = CspInstance.from_nogoods(3, 2, 2, [((2, 0), (1, 0)), ((0, 2), (0, 1))])
    assert inst.nogoods == (((0, 2), (0, 1)),)


def test_encode_decode():
    assert decode(5, 3, 2) == (1, 0, 1)
    assert encode((2, 1, 0), 3) == 21
    assert decode(encode((2, 1, 0), 3), 3, 3) == (2, 1, 0)


instances = st.builds(
    lambda mu, b, frac, seed: random_instance(mu, b, 2, int(frac * b**2 * math.comb(mu, 2)), seed),
    st.integers(2, 5), st.integers(2, 3), st.floats(0, 1), st.integers(0, 2**31),
)


@settings(max_examples=40, deadline=None)
@given(instances)
def test_good_mask_matches_brute_force(inst):
    for level in range(inst.mu + 1):
        np.testing.assert_array_equal(good_mask(inst, level), brute_force_good(inst, level))


@settings(max_examples=40, deadline=None)
@given(instances)
def test_goodness_is_monotone(inst):
    for level in range(1, inst.mu + 1):
        child = good_mask(inst, level).reshape(-1, inst.b)
        parent = good_mask(inst, level - 1)
        assert not np.any(child.any(axis=1) & ~parent)


@settings(max_examples=30, deadline=None)
@given(instances)
def test_level_zero_and_full_counts(inst):
    assert count_could_be(inst, 0) == 1
    assert count_could_be(inst, inst.mu) == len(enumerate_solutions(inst))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(2, 4), st.randoms(use_true_random=False))
def test_color_permutation_invariance(n, b, rnd):
    edges = [e for e in itertools.combinations(range(n), 2) if rnd.random() < 0.5]
    perm = list(range(b))
    rnd.shuffle(perm)
    inst = graph_coloring_instance(edges, n, b)
    mapped = {tuple(perm[c] for c in sol) for sol in enumerate_solutions(inst)}
    assert mapped == set(enumerate_solutions(inst))


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 5), st.integers(2, 3), st.integers(0, 1000))
def test_saturated_kills_everything_past_k(mu, b, seed):
    inst = random_instance(mu, b, 2, b**2 * math.comb(mu, 2), seed)
    for level in range(2, mu + 1):
        assert count_could_be(inst, level) == 0


def test_chunking_is_invisible(monkeypatch):
    from nested_qsearch import csp

    inst = random_instance(9, 2, 2, 20, seed=4)
    whole = good_mask(inst, 9)
    monkeypatch.setattr(csp, "_CHUNK", 7)
    np.testing.assert_array_equal(good_mask(inst, 9), whole)
