"""Tolerance-aware dense linear algebra primitives.

Every rank decision in the package goes through :func:`numerical_rank`,
which treats a singular value as zero when it is at most
``rank_rtol * sigma_max``.  All routines are deterministic (plain LAPACK SVD
and Hermitian eigensolvers, no randomized sketches).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, InputError


@dataclass(frozen=True)
class ToleranceConfig:
    """Relative thresholds used by the rank, PSD and residual decisions."""

    rank_rtol: float = 1e-10
    psd_rtol: float = 1e-10
    residual_rtol: float = 1e-10

    def __post_init__(self):
        for name in ("rank_rtol", "psd_rtol", "residual_rtol"):
            value = getattr(self, name)
            if not (0.0 < value <= 1e-2):
                raise InputError(f"{name} must lie in (0, 1e-2], got {value!r}")

    def as_dict(self):
        return {
            "rank_rtol": self.rank_rtol,
            "psd_rtol": self.psd_rtol,
            "residual_rtol": self.residual_rtol,
        }


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class Subspace:
    """Subspace of C^ambient_dim given by an orthonormal column basis.

    A basis with zero columns encodes the trivial subspace {0}.
    """

    basis: np.ndarray = field(repr=False)
    ambient_dim: int

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[0] != self.ambient_dim:
            raise InputError(
                f"basis shape {basis.shape} does not match ambient dimension "
                f"{self.ambient_dim}"
            )
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_trivial(self) -> bool:
        return self.dim == 0

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    @classmethod
    def trivial(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0), dtype=complex), ambient_dim)


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a finite, nonempty 2-D complex array."""
    arr = np.asarray(M, dtype=complex)
    if arr.ndim != 2 or arr.size == 0:
        raise InputError(f"expected a nonempty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has non-finite entries")
    return arr


def as_square(M) -> np.ndarray:
    arr = as_matrix(M)
    if arr.shape[0] != arr.shape[1]:
        raise InputError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def opnorm(M) -> float:
    """Spectral norm; 0 for empty arrays."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def numerical_rank(s: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Count singular values (sorted descending) above ``rank_rtol * s[0]``."""
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rtol * s[0]))


def _svd(M):
    return np.linalg.svd(M, full_matrices=True)


def orthonormal_range(M, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis for the column space of ``M``."""
    M = as_matrix(M)
    U, s, _ = _svd(M)
    r = numerical_rank(s, tol)
    return Subspace(U[:, :r], M.shape[0])


def orthonormal_kernel(M, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis for the numerical null space of ``M``."""
    M = as_matrix(M)
    _, s, Vh = _svd(M)
    r = numerical_rank(s, tol)
    return Subspace(Vh[r:].conj().T, M.shape[1])


def pseudoinverse(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse with the relative rank cutoff applied."""
    M = as_matrix(M)
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    r = numerical_rank(s, tol)
    return (Vh[:r].conj().T / s[:r]) @ U[:, :r].conj().T


def is_psd(H, tol: ToleranceConfig = DEFAULT_TOL, scale: float | None = None):
    """Decide whether the Hermitian matrix ``H`` is positive semidefinite.

    Returns ``(flag, smallest_eigenvalue)``.  ``H`` is symmetrized before the
    eigenvalue computation.  The negativity threshold is
    ``psd_rtol * max(||H||, scale)``; pass ``scale`` when ``H`` is a difference
    of larger terms (e.g. a commutator), so cancellation noise is measured
    against the size of the terms rather than against the result.
    """
    H = as_square(H)
    ref = opnorm(H)
    if scale is not None:
        ref = max(ref, float(scale))
    if opnorm(H - H.conj().T) > tol.residual_rtol * ref:
        raise InputError("matrix is not Hermitian within residual tolerance")
    Hs = (H + H.conj().T) / 2
    lam_min = float(np.linalg.eigvalsh(Hs)[0])
    return lam_min >= -tol.psd_rtol * ref, lam_min


def smallest_nonzero_singular(M, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Smallest singular value exceeding the rank cutoff."""
    M = as_matrix(M)
    s = np.linalg.svd(M, compute_uv=False)
    r = numerical_rank(s, tol)
    if r == 0:
        raise DegenerateInputError("matrix is numerically zero")
    return float(s[r - 1])


def _check_ambient(S1: Subspace, S2: Subspace):
    if S1.ambient_dim != S2.ambient_dim:
        raise InputError(
            f"ambient dimensions differ: {S1.ambient_dim} vs {S2.ambient_dim}"
        )


def subspace_inclusion(S1: Subspace, S2: Subspace, tol: ToleranceConfig = DEFAULT_TOL):
    """Test ``S1 ⊆ S2``; returns ``(flag, defect)``.

    The defect is the norm of the component of S1's basis orthogonal to S2.
    """
    _check_ambient(S1, S2)
    if S1.is_trivial:
        return True, 0.0
    B1, B2 = S1.basis, S2.basis
    residual = B1 - B2 @ (B2.conj().T @ B1)
    defect = opnorm(residual)
    return defect <= tol.residual_rtol, defect


def subspace_angle(S1: Subspace, S2: Subspace) -> float:
    """Smallest angle between two subspaces, in [0, pi/2].

    The angle is pi/2 when either subspace is trivial (the supremum over an
    empty set of inner products is taken as 0).
    """
    _check_ambient(S1, S2)
    if S1.is_trivial or S2.is_trivial:
        return np.pi / 2
    # Put the lower-dimensional subspace second so the sine route below is
    # the same computation whichever order the arguments come in.
    A, B = (S1.basis, S2.basis) if S1.dim >= S2.dim else (S2.basis, S1.basis)
    cos_max = float(np.linalg.svd(A.conj().T @ B, compute_uv=False).max())
    if cos_max ** 2 < 0.5:
        return float(np.arccos(min(cos_max, 1.0)))
    # near-zero angles: arccos loses half the digits, so use the sine of
    # the smallest principal angle, the least singular value of (I - AA*)B
    resid = B - A @ (A.conj().T @ B)
    sin_min = float(np.linalg.svd(resid, compute_uv=False).min())
    return float(np.arcsin(min(sin_min, 1.0)))


def intersection(S1: Subspace, S2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Intersection of two subspaces.

    Solves ``B1 a = B2 b`` through the null space of ``[B1, -B2]`` and maps the
    ``a`` coordinates back through ``B1``.
    """
    _check_ambient(S1, S2)
    n = S1.ambient_dim
    if S1.is_trivial or S2.is_trivial:
        return Subspace.trivial(n)
    stacked = np.hstack([S1.basis, -S2.basis])
    null = orthonormal_kernel(stacked, tol).basis
    if null.shape[1] == 0:
        return Subspace.trivial(n)
    return orthonormal_range(S1.basis @ null[: S1.dim], tol)


def orthogonal_complement_within(S: Subspace, J: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """``S ∩ J⊥`` for ``J ⊆ S``: vectors of S orthogonal to J."""
    _check_ambient(S, J)
    if S.is_trivial:
        return S
    if J.is_trivial:
        return S
    coeffs = orthonormal_kernel(J.basis.conj().T @ S.basis, tol).basis
    if coeffs.shape[1] == 0:
        return Subspace.trivial(S.ambient_dim)
    return Subspace(S.basis @ coeffs, S.ambient_dim)
