import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hsbm.network import (COUNT, Network, NetworkCollection, NetworkValidationError, Partition,
                          block_sufficient_stats, canonical_labels, clustering_coefficient,
                          degree_sequence, validate_network)
from hsbm.kernels import KernelSpec


def test_valid_undirected_binary():
    y = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    net = validate_network(y, directed=False, acyclic=True)
    assert net.num_actors == 3 and not net.directed


def test_structural_zero_violation():
    y = np.zeros((3, 3))
    y[1, 1] = 1
    with pytest.raises(NetworkValidationError, match="structural zero violated"):
        validate_network(y, acyclic=True)


def test_symmetry_violation():
    y = np.zeros((3, 3))
    y[0, 1] = 1
    with pytest.raises(NetworkValidationError, match="symmetry violated"):
        validate_network(y, directed=False)


@pytest.mark.parametrize("bad,family", [([[0, 2], [2, 0]], "binary"), ([[0, 1.5], [1.5, 0]], "count"),
                                        ([[0, -1], [-1, 0]], "count")])
def test_out_of_family(bad, family):
    with pytest.raises(NetworkValidationError, match="out-of-family"):
        validate_network(bad, family=family)


def test_non_square():
    with pytest.raises(NetworkValidationError, match="square"):
        validate_network(np.zeros((2, 3)))


def test_values_are_read_only():
    net = validate_network(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        net.values[0, 1] = 1


def test_canonical_labels_first_appearance():
    assert canonical_labels([5, 5, 2, 9, 2]) == (1, 1, 2, 3, 2)
    with pytest.raises(ValueError):
        Partition((2, 1))
    p = Partition.from_labels(["b", "a", "b"])
    assert p.labels == (1, 2, 1) and p.sizes == (2, 1) and p.num_blocks == 2


def test_single_faction_undirected_stats():
    net = validate_network(np.ones((3, 3)) - np.eye(3))
    st = block_sufficient_stats(net, Partition.single_block(3))
    assert st.dyad_count[0, 0] == 3 and st.value_sum[0, 0] == 3


def test_singletons_have_empty_diagonal_blocks():
    net = validate_network(np.ones((4, 4)) - np.eye(4))
    st = block_sufficient_stats(net, Partition.singletons(4))
    assert np.all(np.diag(st.dyad_count) == 0)


def test_directed_two_blocks_all_ones():
    net = validate_network(np.ones((4, 4)) - np.eye(4), directed=True)
    st = block_sufficient_stats(net, Partition((1, 1, 2, 2)))
    assert st.dyad_count.tolist() == [[2, 4], [4, 2]]
    assert st.value_sum.tolist() == [[2, 4], [4, 2]]


def test_total_dyads_and_sums():
    rng = np.random.default_rng(0)
    y = (rng.random((6, 6)) < 0.4).astype(int)
    np.fill_diagonal(y, 0)
    net = validate_network(y, directed=True)
    st = block_sufficient_stats(net, Partition((1, 2, 1, 3, 2, 1)))
    assert st.dyad_count.sum() == 30 and st.value_sum.sum() == y.sum()
    und = validate_network(np.triu(y, 1) + np.triu(y, 1).T)
    st = block_sufficient_stats(und, Partition((1, 2, 1, 3, 2, 1)))
    assert st.dyad_count.sum() == 15


def test_length_mismatch():
    with pytest.raises(ValueError):
        block_sufficient_stats(validate_network(np.zeros((3, 3))), Partition((1, 1)))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 1), min_size=n * n, max_size=n * n),
    st.lists(st.integers(1, 3), min_size=n, max_size=n),
    st.permutations(list(range(n))), st.booleans())))
def test_stats_permutation_invariant(case):
    flat, labels, perm, directed = case
    n = len(labels)
    y = np.array(flat).reshape(n, n)
    np.fill_diagonal(y, 0)
    if not directed:
        y = np.triu(y, 1) + np.triu(y, 1).T
    part = Partition.from_labels(labels)
    a = block_sufficient_stats(validate_network(y, directed), part)
    perm = np.array(perm)
    inv = np.argsort(perm)
    yp = y[np.ix_(inv, inv)]                # actor perm[i] becomes actor i
    parts = Partition.from_labels([part.labels[inv[i]] for i in range(n)])
    b = block_sufficient_stats(validate_network(yp, directed), parts)
    key = lambda st: sorted(zip(st.dyad_count.ravel() + st.dyad_count.T.ravel(),
                                st.value_sum.ravel() + st.value_sum.T.ravel()))
    assert key(a) == key(b)
    assert a.value_sum.sum() == b.value_sum.sum()


def test_degrees():
    assert np.all(degree_sequence(validate_network(np.zeros((4, 4)))) == 0)
    assert np.all(degree_sequence(validate_network(np.ones((5, 5)) - np.eye(5))) == 4)
    y = np.zeros((3, 3))
    y[0, 1] = y[1, 2] = y[2, 0] = 1
    din, dout = degree_sequence(validate_network(y, directed=True))
    assert din.tolist() == [1, 1, 1] and dout.tolist() == [1, 1, 1]


def test_clustering_coefficient_examples():
    k3 = validate_network(np.ones((3, 3)) - np.eye(3))
    assert clustering_coefficient(k3) == 1.0
    star = np.zeros((4, 4))
    star[0, 1:] = star[1:, 0] = 1
    assert clustering_coefficient(validate_network(star)) == 0.0
    k4 = np.ones((4, 4)) - np.eye(4)
    k4[0, 1] = k4[1, 0] = 0
    assert clustering_coefficient(validate_network(k4)) == pytest.approx(0.75)
    assert clustering_coefficient(validate_network(np.zeros((3, 3)))) == 0.0


def test_clustering_rejects_directed_and_counts():
    with pytest.raises(ValueError):
        clustering_coefficient(validate_network(np.zeros((3, 3)), directed=True))
    with pytest.raises(ValueError):
        clustering_coefficient(validate_network(np.zeros((3, 3)), family=COUNT))


def test_clustering_erdos_renyi_near_edge_probability():
    rng = np.random.default_rng(3)
    y = np.triu(rng.random((300, 300)) < 0.2, 1).astype(int)
    c = clustering_coefficient(validate_network(y + y.T))
    assert abs(c - 0.2) < 0.01


def test_collection_checks():
    a = validate_network(np.zeros((3, 3)))
    with pytest.raises(ValueError, match="actor count"):
        NetworkCollection([a, validate_network(np.zeros((4, 4)))], [KernelSpec()] * 2)
    with pytest.raises(ValueError, match="incompatible"):
        NetworkCollection([a], [KernelSpec("poisson-gamma")])
    with pytest.raises(ValueError, match="one kernel"):
        NetworkCollection([a], [])
