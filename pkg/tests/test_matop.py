import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posinormal.errors import InputError
from posinormal.matop import (
    FAMILY_KINDS,
    OperatorMatrix,
    block_example,
    family_of,
    identity,
    jordan_block,
    random_ep,
    random_unitary,
    toeplitz_truncation,
    truncated_shift,
)


def test_operator_matrix_is_read_only():
    M = identity(3)
    with pytest.raises(ValueError):
        M.entries[0, 0] = 2


@pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros((0, 0)), [[np.inf]]])
def test_operator_matrix_rejects(bad):
    with pytest.raises(InputError):
        OperatorMatrix(bad)


def test_truncated_shift_orientation():
    U = np.asarray(truncated_shift(4))
    e0 = np.eye(4)[:, 0]
    assert np.allclose(U @ e0, np.eye(4)[:, 1])
    assert np.allclose(U.conj().T @ U, np.diag([1, 1, 1, 0]))


def test_toeplitz_matches_shift_expression():
    n = 6
    U = np.eye(n, k=-1)
    T = np.asarray(toeplitz_truncation({-1: 1.0, 1: 2.0}, n))
    assert np.allclose(T, U.T + 2 * U)


@pytest.mark.parametrize("coeffs, n", [({}, 3), ({3: 1.0}, 3), ({-5: 1.0}, 4)])
def test_toeplitz_rejects(coeffs, n):
    with pytest.raises(InputError):
        toeplitz_truncation(coeffs, n)


def test_block_example_layout():
    T = np.asarray(block_example([1.0, 0.5]))
    expected = np.array([[1, 0, 1, 0], [0, 0.5, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0]])
    assert np.allclose(T, expected)


def test_block_example_rejects_empty():
    with pytest.raises(InputError):
        block_example([])


def test_jordan_block_nilpotent():
    J = jordan_block(4)
    assert np.allclose(np.asarray(J.power(4)), 0)
    assert not np.allclose(np.asarray(J.power(3)), 0)


def test_random_unitary(rng):
    Q = random_unitary(7, rng)
    assert np.allclose(Q.conj().T @ Q, np.eye(7), atol=1e-12)


@given(st.integers(1, 12), st.data(), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_random_ep_rank_and_ranges(n, data, seed):
    r = data.draw(st.integers(0, n))
    A = np.asarray(random_ep(n, r, seed))
    s = np.linalg.svd(A, compute_uv=False)
    assert int(np.sum(s > 1e-10 * max(s[0], 1e-300))) == r
    # EP: the orthogonal projector onto ran A also projects onto ran A*
    U, _, Vh = np.linalg.svd(A)
    P = U[:, :r] @ U[:, :r].conj().T
    assert np.allclose(P @ A.conj().T, A.conj().T, atol=1e-9 * max(s[0], 1))


def test_random_ep_deterministic():
    assert np.array_equal(np.asarray(random_ep(5, 3, 7)), np.asarray(random_ep(5, 3, 7)))


def test_random_ep_power_guard():
    A = np.asarray(random_ep(8, 6, 3, powers=5))
    for j in range(1, 6):
        s = np.linalg.svd(np.linalg.matrix_power(A, j), compute_uv=False)
        assert s[0] / s[5] <= 1e6 * 1.0001
        assert s[6] <= 1e-10 * s[0]


@pytest.mark.parametrize("bad", [(3, 4), (3, -1), (0, 0), (2.5, 1)])
def test_random_ep_rejects(bad):
    with pytest.raises(InputError):
        random_ep(*bad)


@pytest.mark.parametrize("kind", FAMILY_KINDS)
def test_families_have_declared_dimension(kind):
    fam = family_of(kind)
    for n in (2, 5):
        assert fam(n).dim == (2 * n if kind == "example1" else n)


def test_family_underscore_alias():
    assert family_of("diag_inv_k").label == "diag-inv-k"


def test_unknown_family():
    with pytest.raises(InputError, match="unknown family"):
        family_of("nope")
