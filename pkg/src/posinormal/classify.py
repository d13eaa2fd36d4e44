"""Checkers for normality, hyponormality, posinormality and the EP property.

In finite dimension every range is closed, so posinormal, coposinormal and
EP coincide for matrices; the checkers still compute each condition through
its own definition so that the decisions can be compared against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InternalConsistencyError, PreconditionError
from .numkernel import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    as_square,
    intersection,
    is_psd,
    numerical_rank,
    opnorm,
    orthogonal_complement_within,
    orthonormal_kernel,
    orthonormal_range,
    pseudoinverse,
    subspace_angle,
    subspace_inclusion,
)

_TINY = np.finfo(float).tiny
BISECTION_STEPS = 53
MINIMALITY_SHRINK = 1e-4
LAMBDA_AGREEMENT = 1e-6
# loose on purpose: near-singular A^2 rotates its computed kernel slightly
KERNEL_SANITY_ATOL = 1e-6


def _adj(A):
    return A.conj().T


def is_normal(A, tol: ToleranceConfig = DEFAULT_TOL):
    """Returns ``(flag, ||AA* - A*A|| / ||A||^2)``."""
    A = as_square(A)
    scale = max(opnorm(A) ** 2, _TINY)
    defect = opnorm(A @ _adj(A) - _adj(A) @ A) / scale
    return bool(defect <= tol.residual_rtol), float(defect)


def self_commutator(A) -> np.ndarray:
    A = as_square(A)
    return _adj(A) @ A - A @ _adj(A)


def is_hyponormal(A, tol: ToleranceConfig = DEFAULT_TOL):
    """Returns ``(flag, smallest eigenvalue of A*A - AA*)``."""
    A = as_square(A)
    return is_psd(self_commutator(A), tol, scale=opnorm(A) ** 2)


def is_posinormal(A, tol: ToleranceConfig = DEFAULT_TOL):
    """Range inclusion ``ran A ⊆ ran A*``; returns ``(flag, defect)``."""
    A = as_square(A)
    return subspace_inclusion(orthonormal_range(A, tol), orthonormal_range(_adj(A), tol), tol)


def is_coposinormal(A, tol: ToleranceConfig = DEFAULT_TOL):
    A = as_square(A)
    return is_posinormal(_adj(A), tol)


def range_equality_defect(A, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Larger of the two inclusion defects between ``ran A`` and ``ran A*``."""
    A = as_square(A)
    R, Rs = orthonormal_range(A, tol), orthonormal_range(_adj(A), tol)
    return max(subspace_inclusion(R, Rs, tol)[1], subspace_inclusion(Rs, R, tol)[1])


def is_ep(A, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return bool(is_posinormal(A, tol)[0] and is_coposinormal(A, tol)[0])


@dataclass(frozen=True)
class PosinormalCertificate:
    """Witness ``T`` with ``A = A*T``, interrupter ``P = TT*`` and minimal lambda."""

    witness: np.ndarray = field(repr=False)
    interrupter: np.ndarray = field(repr=False)
    lambda_min: float
    residual_factorization: float
    residual_interrupter: float
    lambda_bisection: float = float("nan")
    minimality_verified: bool = False


def lambda_psd(A, lam: float, tol: ToleranceConfig = DEFAULT_TOL):
    """PSD test of ``lam^2 A*A - AA*``; returns ``(flag, smallest eigenvalue)``."""
    A = as_square(A)
    H = lam**2 * (_adj(A) @ A) - A @ _adj(A)
    return is_psd(H, tol, scale=max(lam**2, 1.0) * opnorm(A) ** 2)


def lambda_upper_bound(A, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``||A|| / sigma_min^+(A)``, an upper bound on the minimal lambda (0 for A = 0)."""
    A = as_square(A)
    s = np.linalg.svd(A, compute_uv=False)
    r = numerical_rank(s, tol)
    if r == 0:
        return 0.0
    return float(s[0] / s[r - 1])


def lambda_exists(A, tol: ToleranceConfig = DEFAULT_TOL):
    """Does some lambda satisfy ``AA* <= lambda^2 A*A``?

    It suffices to test at the upper bound ``||A|| / sigma_min^+``: any valid
    lambda is at most that large, and the condition is monotone in lambda.
    Returns ``(flag, smallest eigenvalue at the bound)``.
    """
    return lambda_psd(A, lambda_upper_bound(A, tol) * (1 + 1e-8), tol)


def _whitened_pencil(A, tol):
    """``AA*`` expressed relative to ``A*A`` on ``ran A*``.

    With ``Q`` an orthonormal basis for ``ran A*`` and ``AQ = U S V*``, the
    condition ``Q*AA*Q <= lambda^2 Q*A*AQ`` is equivalent to ``W <= lambda^2 I``
    where ``W = M*M`` and ``M = A*Q V S^{-1}``.  Going through the SVD of
    ``AQ`` (rather than forming ``Q*A*AQ``) keeps the test well scaled for
    ill-conditioned ``A``.
    """
    Q = orthonormal_range(_adj(A), tol).basis
    _, s, Vh = np.linalg.svd(A @ Q, full_matrices=False)
    M = (_adj(A) @ Q @ _adj(Vh)) / s
    W = _adj(M) @ M
    return (W + _adj(W)) / 2


def lambda_bisection(A, tol: ToleranceConfig = DEFAULT_TOL, steps: int = BISECTION_STEPS) -> float:
    """Minimal lambda by bisection over a PSD test, independent of any pseudoinverse.

    Bisects on ``[0, ||A|| / sigma_min^+]`` with the PSD test of
    ``lambda^2 I - W`` in whitened coordinates (see :func:`_whitened_pencil`).
    Assumes ``A`` is posinormal, so ``ker A`` contributes nothing.
    """
    A = as_square(A)
    hi = lambda_upper_bound(A, tol)
    if hi == 0.0:
        return 0.0
    W = _whitened_pencil(A, tol)
    eye = np.eye(W.shape[0])
    lo = 0.0
    hi *= 1 + 1e-8
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        ok, _ = is_psd(mid**2 * eye - W, tol, scale=mid**2)
        if ok:
            hi = mid
        else:
            lo = mid
    return hi


def douglas_candidate(A, tol: ToleranceConfig = DEFAULT_TOL):
    """Least-norm candidate ``T = pinv(A*) A`` and ``P = TT*``, without any precondition.

    Returns ``(T, P, ||A - A*T||, ||AA* - A*PA||)``.  The residuals vanish iff
    ``A = A*T`` is solvable, which is how the construction decides
    posinormality independently of the range test.
    """
    A = as_square(A)
    T = pseudoinverse(_adj(A), tol) @ A
    P = T @ _adj(T)
    P = (P + _adj(P)) / 2
    res_f = opnorm(A - _adj(A) @ T)
    res_p = opnorm(A @ _adj(A) - _adj(A) @ P @ A)
    return T, P, res_f, res_p


def candidate_succeeds(A, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    A = as_square(A)
    normA = opnorm(A)
    _, _, res_f, res_p = douglas_candidate(A, tol)
    return bool(res_f <= tol.residual_rtol * normA and res_p <= tol.residual_rtol * normA**2)


def posinormal_certificate(A, tol: ToleranceConfig = DEFAULT_TOL) -> PosinormalCertificate:
    """Douglas-type certificate for a posinormal matrix.

    ``T = pinv(A*) A`` is the least-norm solution of ``A = A*T``; then
    ``AA* = (A*T)(A*T)* = A*(TT*)A`` so ``P = TT*`` is an interrupter and
    ``||T||`` is the least lambda with ``AA* <= lambda^2 A*A``.  The norm
    route is cross-checked against :func:`lambda_bisection`.
    """
    A = as_square(A)
    ok, defect = is_posinormal(A, tol)
    if not ok:
        raise PreconditionError(f"matrix is not posinormal (inclusion defect {defect:.3g})", defect)
    n = A.shape[0]
    if numerical_rank(np.linalg.svd(A, compute_uv=False), tol) == 0:
        Z = np.zeros((n, n), dtype=complex)
        return PosinormalCertificate(Z, Z, 0.0, 0.0, 0.0, 0.0, True)
    T, P, res_f, res_p = douglas_candidate(A, tol)
    lam = opnorm(T)
    lam_b = lambda_bisection(A, tol)
    if abs(lam - lam_b) > LAMBDA_AGREEMENT * max(lam, lam_b):
        raise InternalConsistencyError(
            f"minimal lambda disagrees: norm route {lam!r}, bisection {lam_b!r}"
        )
    passes = lambda_psd(A, lam, tol)[0]
    W = _whitened_pencil(A, tol)
    shrunk = lam * (1 - MINIMALITY_SHRINK)
    fails = not is_psd(shrunk**2 * np.eye(W.shape[0]) - W, tol, scale=shrunk**2)[0]
    return PosinormalCertificate(T, P, lam, res_f, res_p, lam_b, bool(passes and fails))


def certificate_valid(A, cert: PosinormalCertificate, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Residuals within tolerance, interrupter PSD, lambda equal to ||witness||."""
    A = as_square(A)
    normA = opnorm(A)
    if normA == 0.0:
        return cert.residual_factorization == 0.0 and cert.residual_interrupter == 0.0
    return bool(
        cert.residual_factorization <= tol.residual_rtol * normA
        and cert.residual_interrupter <= tol.residual_rtol * normA**2
        and is_psd(cert.interrupter, tol)[0]
        and abs(cert.lambda_min - opnorm(cert.witness)) <= 1e-8 * max(cert.lambda_min, 1.0)
    )


def interrupter_residual(A, P) -> float:
    """``||AA* - A*PA||`` for a candidate interrupter ``P``."""
    A = as_square(A)
    return opnorm(A @ _adj(A) - _adj(A) @ np.asarray(P) @ A)


def kernel_power_equal(A, tol: ToleranceConfig = DEFAULT_TOL):
    """Compare ``ker A`` and ``ker A^2``; returns ``(equal, (dim ker A, dim ker A^2))``."""
    A = as_square(A)
    K1 = orthonormal_kernel(A, tol)
    K2 = orthonormal_kernel(A @ A, tol)
    sanity = subspace_inclusion(K1, K2, tol)[1]
    if sanity > KERNEL_SANITY_ATOL:
        raise InternalConsistencyError(f"ker A is not contained in ker A^2 (defect {sanity:.3g})")
    equal = K1.dim == K2.dim and subspace_inclusion(K2, K1, tol)[0]
    return bool(equal), (K1.dim, K2.dim)


def kernel_inclusion_defect(A, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Defect of ``ker A^2 ⊆ ker A``."""
    A = as_square(A)
    return subspace_inclusion(orthonormal_kernel(A @ A, tol), orthonormal_kernel(A, tol), tol)[1]


@dataclass(frozen=True)
class AngleResult:
    theta: float
    subspace_dims: dict


def bouldin_angle(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> AngleResult:
    """Angle between ``ran B`` and ``ker A ∩ (ker A ∩ ran B)⊥``.

    For closed-range ``A`` and ``B``, ``AB`` has closed range iff this angle is
    positive.
    """
    A, B = as_square(A), as_square(B)
    M = orthonormal_range(B, tol)
    K = orthonormal_kernel(A, tol)
    J = intersection(K, M, tol)
    N = orthogonal_complement_within(K, J, tol)
    theta = subspace_angle(M, N)
    dims = {"ran_B": M.dim, "ker_A": K.dim, "intersection": J.dim, "N": N.dim}
    return AngleResult(theta, dims)


TRUNCATION_CAVEAT = (
    "finite compression of an infinite operator: corner effects can break "
    "hyponormality of the truncation even when the infinite operator is hyponormal"
)


@dataclass(frozen=True)
class PropertyReport:
    normal: bool
    hyponormal: bool
    posinormal: bool
    coposinormal: bool
    ep: bool
    normal_defect: float
    commutator_min_eig: float
    posinormal_defect: float
    coposinormal_defect: float
    kernel_dims: tuple
    certificate: PosinormalCertificate | None = None
    certificate_valid: bool | None = None
    caveat: str | None = None


def analyze(A, tol: ToleranceConfig = DEFAULT_TOL, truncation: bool = False) -> PropertyReport:
    """Run every checker and enforce normal ⇒ hyponormal ⇒ posinormal, EP ⇒ both.

    ``truncation=True`` marks the matrix as a compression of an infinite
    operator and attaches the corresponding caveat when hyponormality fails.
    """
    A = np.asarray(A, dtype=complex)
    A = as_square(A)
    normal, ndef = is_normal(A, tol)
    hypo, lam = is_hyponormal(A, tol)
    pos, pdef = is_posinormal(A, tol)
    copos, cdef = is_coposinormal(A, tol)
    ep = pos and copos
    if normal and not hypo:
        raise InternalConsistencyError("normal matrix failed the hyponormality test")
    if hypo and not pos:
        raise InternalConsistencyError("hyponormal matrix failed the posinormality test")
    _, kdims = kernel_power_equal(A, tol)
    cert = posinormal_certificate(A, tol) if pos else None
    valid = certificate_valid(A, cert, tol) if cert is not None else None
    caveat = TRUNCATION_CAVEAT if truncation and not hypo else None
    return PropertyReport(
        normal, hypo, pos, copos, ep, ndef, lam, pdef, cdef, kdims, cert, valid, caveat
    )
