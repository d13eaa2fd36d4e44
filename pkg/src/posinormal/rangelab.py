"""Closed-range diagnostics over truncation families.

Closed range is a property of the infinite operator and cannot be decided
from finitely many truncations.  :func:`classify_closed_range` is therefore a
heuristic with fixed thresholds: a plateau (< 10% variation over the last
half of the curve, above 1e-6) reads as ``stable``; a strictly decreasing
tail with a drop factor of at least 5 reads as ``decaying``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, InputError
from .matop import TruncationFamily
from .numkernel import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_square,
    numerical_rank,
    orthonormal_range,
)

PLATEAU_VARIATION = 0.10
PLATEAU_FLOOR = 1e-6
DROP_FACTOR = 5.0
POWER_BOUND_SLACK = 1e-8


@dataclass(frozen=True)
class CurvePoint:
    n: int
    sigma: float | None  # None when the power is numerically zero
    rank: int


@dataclass(frozen=True)
class RangeDiagnosis:
    curve: tuple
    classification: str  # 'stable' | 'decaying' | 'inconclusive'
    stable_floor: float | None = None
    fitted_decay_exponent: float | None = None
    power: int = 1


def sigma_curve(family: TruncationFamily, sizes: Sequence[int], power: int = 1,
                tol: ToleranceConfig = DEFAULT_TOL) -> list[CurvePoint]:
    """Smallest nonzero singular value and rank of ``family(n)^power`` per size."""
    sizes = [int(n) for n in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InputError("sizes must be strictly increasing")
    if power < 1:
        raise InputError(f"power must be >= 1, got {power}")
    curve = []
    for n in sizes:
        M = np.linalg.matrix_power(family(n).entries, power)
        s = np.linalg.svd(M, compute_uv=False)
        r = numerical_rank(s, tol)
        curve.append(CurvePoint(n, float(s[r - 1]) if r else None, r))
    return curve


def classify_closed_range(curve: Sequence[CurvePoint], power: int = 1) -> RangeDiagnosis:
    if len(curve) < 4:
        raise InputError(f"need at least 4 curve points, got {len(curve)}")
    curve = tuple(curve)
    window = curve[len(curve) // 2:]
    if any(p.sigma is None for p in window):
        return RangeDiagnosis(curve, "inconclusive", power=power)
    sig = np.array([p.sigma for p in window])
    ns = np.array([p.n for p in window], dtype=float)
    if sig.min() > PLATEAU_FLOOR and (sig.max() - sig.min()) < PLATEAU_VARIATION * sig.max():
        return RangeDiagnosis(curve, "stable", stable_floor=float(sig.min()), power=power)
    if np.all(np.diff(sig) < 0) and sig[-1] / sig[0] <= 1.0 / DROP_FACTOR:
        slope = np.polyfit(np.log(ns), np.log(sig), 1)[0]
        return RangeDiagnosis(curve, "decaying", fitted_decay_exponent=float(-slope), power=power)
    return RangeDiagnosis(curve, "inconclusive", power=power)


def power_range_report(family: TruncationFamily, k_max: int, sizes: Sequence[int],
                       tol: ToleranceConfig = DEFAULT_TOL) -> dict[int, RangeDiagnosis]:
    if k_max < 1:
        raise InputError(f"k_max must be >= 1, got {k_max}")
    return {
        k: classify_closed_range(sigma_curve(family, sizes, k, tol), power=k)
        for k in range(1, k_max + 1)
    }


@dataclass(frozen=True)
class BoundedBelowCertificate:
    """``c = min ||Ah||`` over unit ``h`` in ``ran A*`` and the bound on ``A^2``."""

    c: float
    verified_power_bound: bool
    power_min: float  # min ||A^2 h|| over unit h in ran A*
    sampled_min_ratio: float
    chain_slack: float  # worst violation of ||A^2 h|| >= c ||A h|| >= c^2 ||h||


@dataclass(frozen=True)
class CRLViolation:
    c: float
    power_min: float
    minimizer: np.ndarray = field(repr=False)

    verified_power_bound = False


def lemma_crl_check(A, tol: ToleranceConfig = DEFAULT_TOL, samples: int = 200, seed: int = 0):
    """Bounded-below certificate for ``A`` on ``ran A*`` and its square.

    ``c`` is the smallest singular value of ``A Q`` with ``Q`` an orthonormal
    basis of ``ran A*`` (A is injective there since ``ker A ⊥ ran A*``).
    When ``ran A ⊆ ran A*``, ``||A^2 h|| >= c ||Ah|| >= c^2 ||h||`` on that
    subspace.  Returns a :class:`BoundedBelowCertificate`, or a
    :class:`CRLViolation` with the minimizing ``h`` when the bound fails.
    """
    A = as_square(np.asarray(A, dtype=complex))
    Q = orthonormal_range(A.conj().T, tol).basis
    if Q.shape[1] == 0:
        raise DegenerateInputError("matrix is numerically zero")
    AQ = A @ Q
    s = np.linalg.svd(AQ, compute_uv=False)
    if numerical_rank(s, tol) != Q.shape[1]:
        raise DegenerateInputError("A restricted to ran A* lost rank")
    c = float(s[-1])
    _, s2, Vh2 = np.linalg.svd(A @ AQ, full_matrices=False)
    power_min = float(s2[-1])
    if power_min < c**2 * (1 - POWER_BOUND_SLACK):
        return CRLViolation(c, power_min, Q @ Vh2[-1].conj())
    rng = np.random.default_rng(seed)
    r = Q.shape[1]
    Z = rng.standard_normal((r, samples)) + 1j * rng.standard_normal((r, samples))
    H = Q @ (Z / np.linalg.norm(Z, axis=0))
    AH = A @ H
    A2H = A @ AH
    n1 = np.linalg.norm(AH, axis=0)
    n2 = np.linalg.norm(A2H, axis=0)
    slack = max(
        float(np.max(c * n1 - n2)) / max(c * n1.max(), 1e-300),
        float(np.max(c - n1)) / c,
        0.0,
    )
    return BoundedBelowCertificate(c, slack <= POWER_BOUND_SLACK, power_min, float(n2.min()), slack)
