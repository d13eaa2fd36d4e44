import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posinormal.errors import InputError
from posinormal.numkernel import ToleranceConfig
from posinormal.qtop import (
    IDENTITY,
    SHIFT,
    SHIFT_ADJ,
    QuasiToeplitzOperator,
    from_jsonable,
    qt_adjoint,
    qt_bounded_below_probe,
    qt_from_symbol,
    qt_is_hyponormal,
    qt_truncate,
    qt_verify_equal,
    self_commutator,
    to_jsonable,
)

B = qt_from_symbol({-1: 1.0, 1: 2.0})


@st.composite
def quasi_toeplitz(draw, max_band=2, max_window=3):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    offsets = range(-draw(st.integers(0, max_band)), draw(st.integers(0, max_band)) + 1)
    # arbitrary complex coefficients, all nonzero so the band is exact
    coeffs = {k: complex(rng.standard_normal(), rng.standard_normal()) for k in offsets}
    w = draw(st.integers(0, max_window))
    C = rng.standard_normal((w, w)) + 1j * rng.standard_normal((w, w))
    return QuasiToeplitzOperator(coeffs, C)


class TestConstruction:
    def test_identity_and_shift_blocks(self):
        assert np.allclose(IDENTITY.block(3, 3), np.eye(3))
        assert np.allclose(SHIFT.block(4, 4), np.eye(4, k=-1))
        assert np.allclose(SHIFT_ADJ.block(4, 4), np.eye(4, k=1))

    def test_zero_correction_trimmed(self):
        X = QuasiToeplitzOperator({0: 1.0}, np.diag([1.0, 0.0, 0.0]))
        assert X.window == 1

    def test_rejects_non_finite(self):
        with pytest.raises(InputError):
            QuasiToeplitzOperator({0: np.nan})
        with pytest.raises(InputError):
            QuasiToeplitzOperator({0: 1.0}, np.zeros((2, 3)))

    def test_apply_shift(self):
        assert np.allclose(SHIFT.apply([1.0, 2.0]), [0.0, 1.0, 2.0])

    def test_json_round_trip(self):
        X = (B @ B) + 3j * SHIFT
        Y = from_jsonable(to_jsonable(X))
        assert qt_verify_equal(X, Y)[0]

    def test_json_malformed(self):
        with pytest.raises(InputError):
            from_jsonable({"correction": []})


class TestShiftRelations:
    def test_isometry(self):
        # U*U = I exactly
        assert qt_verify_equal(SHIFT_ADJ @ SHIFT, IDENTITY) == (True, 0.0)

    def test_co_isometry_defect(self):
        # UU* = I - e0 e0*
        X = SHIFT @ SHIFT_ADJ
        assert X.symbol == {0: 1.0}
        assert np.allclose(X.correction, [[-1.0]])

    def test_shift_identity(self):
        assert qt_verify_equal(SHIFT, SHIFT_ADJ @ SHIFT @ SHIFT)[0]

    def test_example_self_commutator_is_three(self):
        C = self_commutator(B)
        assert C.shape == (1, 1) and C[0, 0] == pytest.approx(3.0)
        assert qt_is_hyponormal(B) == (True, pytest.approx(3.0))

    def test_square_self_commutator_closed_form(self):
        C = self_commutator(B @ B)
        expected = np.array([[15, 0, 6], [0, 15, 0], [6, 0, 0]], dtype=float)
        assert np.allclose(C, expected, atol=1e-12)
        ok, lam = qt_is_hyponormal(B @ B)
        assert not ok
        assert lam == pytest.approx((15 - 3 * np.sqrt(41)) / 2, abs=1e-10)

    def test_square_self_commutator_large_truncation_oracle(self):
        # build X = B^2 and its commutator from exact finite blocks only
        m, pad = 40, 60
        X2 = B.block(pad, pad + 4) @ B.block(pad + 4, pad)
        Xh = X2.conj().T
        comm = (Xh @ X2 - X2 @ Xh)[:m, :m]
        expected = np.zeros((m, m))
        expected[:3, :3] = [[15, 0, 6], [0, 15, 0], [6, 0, 0]]
        assert np.allclose(comm, expected, atol=1e-12)

    def test_truncation_is_not_hyponormal_in_the_corner(self):
        # compressions pick up a negative corner that the operator does not have
        T = np.asarray(qt_truncate(B, 12))
        eig = np.linalg.eigvalsh(T.conj().T @ T - T @ T.conj().T)
        assert eig.min() < -1


class TestAlgebra:
    @given(quasi_toeplitz(), quasi_toeplitz())
    @settings(max_examples=50, deadline=None)
    def test_product_matches_truncated_product(self, X, Y):
        N = 32
        exact = (X @ Y).block(N - 8, N - 8)
        approx = X.block(N - 8, N) @ Y.block(N, N - 8)
        scale = max(X.norm_bound() * Y.norm_bound(), 1.0)
        assert np.abs(exact - approx).max() <= 1e-12 * scale

    @given(quasi_toeplitz())
    @settings(max_examples=50, deadline=None)
    def test_adjoint_contract(self, X):
        N = 12
        assert np.allclose(qt_adjoint(X).block(N, N), X.block(N, N).conj().T)
        assert qt_verify_equal(X.H.H, X)[0]

    @given(quasi_toeplitz(), quasi_toeplitz(), quasi_toeplitz())
    @settings(max_examples=30, deadline=None)
    def test_associative(self, X, Y, Z):
        tol = ToleranceConfig(residual_rtol=1e-12)
        lhs, rhs = (X @ Y) @ Z, X @ (Y @ Z)
        _, res = qt_verify_equal(lhs, rhs, tol)
        assert res <= 1e-12 * max(X.norm_bound() * Y.norm_bound() * Z.norm_bound(), 1.0)

    @given(quasi_toeplitz(), quasi_toeplitz(), quasi_toeplitz())
    @settings(max_examples=30, deadline=None)
    def test_distributive(self, X, Y, Z):
        _, res = qt_verify_equal(X @ (Y + Z), X @ Y + X @ Z)
        assert res <= 1e-12 * max(X.norm_bound() * (Y.norm_bound() + Z.norm_bound()), 1.0)

    @given(quasi_toeplitz())
    @settings(max_examples=30, deadline=None)
    def test_adjoint_reverses_products(self, X):
        Y = X @ SHIFT + 2 * IDENTITY
        _, res = qt_verify_equal((X @ Y).H, Y.H @ X.H)
        assert res <= 1e-12 * max(X.norm_bound() * Y.norm_bound(), 1.0)

    @given(quasi_toeplitz())
    @settings(max_examples=30, deadline=None)
    def test_self_commutator_matches_blocks(self, X):
        C = self_commutator(X)
        m = max(C.shape[0], 1) + 2
        pad = m + X.bandwidth + X.window + 2
        M = X.block(pad, pad)
        full = (M.conj().T @ M - M @ M.conj().T)[:m, :m]
        expected = np.zeros((m, m), dtype=complex)
        expected[: C.shape[0], : C.shape[0]] = C
        assert np.allclose(full, expected, atol=1e-10 * max(X.norm_bound() ** 2, 1.0))

    def test_power_and_scalars(self):
        assert qt_verify_equal(B ** 2, B @ B)[0]
        assert qt_verify_equal(B ** 0, IDENTITY)[0]
        assert qt_verify_equal(2 - SHIFT, -(SHIFT - 2))[0]
        with pytest.raises(InputError):
            B ** -1

    def test_verify_detects_correction_difference(self):
        equal, res = qt_verify_equal(SHIFT @ SHIFT_ADJ, IDENTITY)
        assert not equal and res == pytest.approx(1.0)


class TestTruncateAndProbe:
    def test_truncate_requires_window(self):
        X = B @ B
        with pytest.raises(InputError):
            qt_truncate(X, 1)
        assert qt_truncate(X, 5).dim == 5

    def test_probe_bounded_below(self):
        # ||(U* + 2U) v|| >= (2 - 1)||v||
        res = qt_bounded_below_probe(B, 1.0, trials=2000, max_support=128)
        assert not res.falsified and res.worst_ratio >= 1.0

    def test_probe_falsifies_adjoint_shift(self):
        res = qt_bounded_below_probe(SHIFT_ADJ, 0.5, trials=10)
        assert res.falsified and res.worst_ratio == pytest.approx(0.0, abs=1e-15)
        assert np.allclose(res.witness, [res.witness[0]])

    def test_probe_rejects(self):
        with pytest.raises(InputError):
            qt_bounded_below_probe(B, 0.0)
        with pytest.raises(InputError):
            qt_bounded_below_probe(B, 1.0, trials=0)
