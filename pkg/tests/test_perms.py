import numpy as np
import pytest

from coinwalk.perms import (
    ALL_PERMS,
    ONE_PLUS_P3,
    Permutation4,
    from_cycles,
    matrix_to_perm,
    perm_matrix,
)


def test_identity_matrix():
    assert np.array_equal(perm_matrix((1, 2, 3, 4)), np.eye(4))


def test_transposition_12():
    m = perm_matrix("(12)")
    expected = np.eye(4)[[1, 0, 2, 3]]
    assert np.array_equal(m, expected)


def test_four_cycle_1324():
    # pi: 1->3, 3->2, 2->4, 4->1
    m = perm_matrix("(1324)")
    ones = {(i, j) for i in range(4) for j in range(4) if m[i, j] == 1}
    assert ones == {(0, 2), (2, 1), (1, 3), (3, 0)}


def test_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation4((1, 1, 3, 4))


def test_round_trip_all():
    for p in ALL_PERMS:
        assert matrix_to_perm(p.matrix()) == p
        assert from_cycles(p.cycles()) == p
        assert np.abs(p.matrix() @ p.matrix().T - np.eye(4)).max() == 0


def test_compose_and_inverse():
    a = from_cycles("(123)")
    b = from_cycles("(34)")
    ab = a.compose(b)
    assert all(ab(i) == a(b(i)) for i in (1, 2, 3, 4))
    # row convention p_ij = [pi(i) = j] makes composition reverse the product
    assert np.array_equal(ab.matrix(), b.matrix() @ a.matrix())
    assert a.compose(a.inverse()).cycles() == "id"


def test_one_plus_p3_fixes_1_and_is_lexicographic():
    assert len(ONE_PLUS_P3) == 6
    assert all(p.mapping[0] == 1 for p in ONE_PLUS_P3)
    maps = [p.mapping for p in ONE_PLUS_P3]
    assert maps == sorted(maps)
