import numpy as np
import pytest

from posinormal.errors import DegenerateInputError, InputError
from posinormal.matop import block_example, family_of, jordan_block, random_ep
from posinormal.rangelab import (
    BoundedBelowCertificate,
    CRLViolation,
    CurvePoint,
    classify_closed_range,
    lemma_crl_check,
    power_range_report,
    sigma_curve,
)

SIZES = [4, 8, 16, 32, 64, 128, 256]


def test_example1_curves():
    report = power_range_report(family_of("example1"), 2, SIZES)
    first, second = report[1], report[2]
    assert first.classification == "stable"
    assert all(1 - 1e-12 <= p.sigma <= np.sqrt(2) + 1e-12 for p in first.curve)
    assert second.classification == "decaying"
    assert second.fitted_decay_exponent == pytest.approx(1.0, abs=0.1)
    for p in second.curve:
        assert p.sigma == pytest.approx(np.sqrt(1 / p.n**2 + 1 / p.n**4), rel=1e-10)


def test_example1_square_closed_form_independent_of_family():
    # T^2 = [[A^2, A], [0, 0]]; its smallest nonzero singular value is that of [A^2, A]
    n = 10
    a = 1.0 / np.arange(1, n + 1)
    T = np.asarray(block_example(a))
    s = np.linalg.svd(T @ T, compute_uv=False)
    assert s[n - 1] == pytest.approx(np.sqrt(a[-1] ** 4 + a[-1] ** 2), rel=1e-12)


def test_shift_is_stable():
    d = classify_closed_range(sigma_curve(family_of("shift"), SIZES))
    assert d.classification == "stable" and d.stable_floor == pytest.approx(1.0)


def test_diag_inverse_decays():
    d = classify_closed_range(sigma_curve(family_of("diag-inv-k"), SIZES))
    assert d.classification == "decaying"
    assert d.fitted_decay_exponent == pytest.approx(1.0, abs=1e-6)


def test_zero_power_is_inconclusive():
    curve = [CurvePoint(n, None, 0) for n in SIZES]
    assert classify_closed_range(curve).classification == "inconclusive"


def test_oscillating_is_inconclusive():
    curve = [CurvePoint(n, s, n) for n, s in zip(SIZES, [1.0, 0.5, 1.0, 0.5, 1.0, 0.5, 1.0])]
    assert classify_closed_range(curve).classification == "inconclusive"


def test_curve_validation():
    with pytest.raises(InputError):
        sigma_curve(family_of("shift"), [8, 4, 16])
    with pytest.raises(InputError):
        sigma_curve(family_of("shift"), SIZES, power=0)
    with pytest.raises(InputError):
        classify_closed_range([CurvePoint(4, 1.0, 4)])
    with pytest.raises(InputError):
        power_range_report(family_of("shift"), 0, SIZES)


@pytest.mark.parametrize("seed", range(10))
def test_crl_bound_on_ep(seed):
    A = np.asarray(random_ep(8, 5, seed))
    cert = lemma_crl_check(A, seed=seed)
    assert isinstance(cert, BoundedBelowCertificate) and cert.verified_power_bound
    Q = np.linalg.svd(A)[2][:5].conj().T  # ran A* = span of the leading right singular vectors
    assert cert.c == pytest.approx(np.linalg.svd(A @ Q, compute_uv=False).min(), rel=1e-10)
    assert cert.sampled_min_ratio >= cert.c**2 * (1 - 1e-8)
    assert cert.power_min >= cert.c**2 * (1 - 1e-8)


def test_crl_violation_on_jordan():
    res = lemma_crl_check(np.asarray(jordan_block(2)))
    assert isinstance(res, CRLViolation) and not res.verified_power_bound
    assert res.power_min == pytest.approx(0.0, abs=1e-15)
    assert np.linalg.norm(res.minimizer) == pytest.approx(1.0)


def test_crl_zero_matrix():
    with pytest.raises(DegenerateInputError):
        lemma_crl_check(np.zeros((3, 3)))
