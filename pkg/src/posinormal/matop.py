"""Constructors for finite and truncated operators.

Orientation: the shift ``U`` maps e_k to e_{k+1}, so it sits on the first
subdiagonal.  Toeplitz offsets follow the same convention: offset ``+1`` is
the subdiagonal (``U`` direction), ``-1`` the superdiagonal (``U*``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex square matrix with a provenance label."""

    entries: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.size == 0:
            raise InputError(f"operator matrix must be square and nonempty, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("operator matrix has non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, f"({self.label})*")

    def power(self, k: int) -> "OperatorMatrix":
        return OperatorMatrix(np.linalg.matrix_power(self.entries, k), f"({self.label})^{k}")


def _positive(n, name="n"):
    if int(n) != n or n < 1:
        raise InputError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def identity(n: int) -> OperatorMatrix:
    n = _positive(n)
    return OperatorMatrix(np.eye(n), f"identity({n})")


def truncated_shift(n: int) -> OperatorMatrix:
    """n x n compression of the unilateral shift (ones on the subdiagonal)."""
    n = _positive(n)
    return OperatorMatrix(np.eye(n, k=-1), f"shift({n})")


def toeplitz_truncation(coeffs: Mapping[int, complex], n: int, label: str | None = None) -> OperatorMatrix:
    """n x n matrix with ``M[i, k] = coeffs[i - k]``."""
    n = _positive(n)
    if not coeffs:
        raise InputError("coefficient set is empty")
    M = np.zeros((n, n), dtype=complex)
    for offset, value in coeffs.items():
        offset = int(offset)
        if not -n < offset < n:
            raise InputError(f"offset {offset} out of range for n = {n}")
        M += value * np.eye(n, k=-offset)
    if label is None:
        label = f"toeplitz({_symbol_text(coeffs)}, {n})"
    return OperatorMatrix(M, label)


def _symbol_text(coeffs):
    return ", ".join(f"{k}:{complex(v):g}" for k, v in sorted(coeffs.items()))


def block_example(diag_entries) -> OperatorMatrix:
    """The block operator ``[[A, I], [0, 0]]`` with ``A = diag(diag_entries)``.

    With ``A`` lacking closed range (e.g. entries 1/k as n grows) this is a
    closed-range operator whose square does not have closed range.
    """
    a = np.asarray(diag_entries, dtype=complex).ravel()
    if a.size == 0:
        raise InputError("diag_entries is empty")
    if not np.all(np.isfinite(a)):
        raise InputError("diag_entries must be finite")
    n = a.size
    T = np.zeros((2 * n, 2 * n), dtype=complex)
    T[:n, :n] = np.diag(a)
    T[:n, n:] = np.eye(n)
    return OperatorMatrix(T, f"block_example({n})")


def jordan_block(n: int, eigenvalue: complex = 0.0) -> OperatorMatrix:
    n = _positive(n)
    J = eigenvalue * np.eye(n, dtype=complex) + np.eye(n, k=1)
    return OperatorMatrix(J, f"jordan({n}, {complex(eigenvalue):g})")


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR of a complex Gaussian matrix."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_dense(n: int, seed: int = 0) -> OperatorMatrix:
    n = _positive(n)
    rng = np.random.default_rng(seed)
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    return OperatorMatrix(Z, f"dense({n}, seed={seed})")


def random_ep(n: int, r: int, seed: int = 0, max_cond: float = 1e3,
              powers: int = 1, power_cond: float = 1e6) -> OperatorMatrix:
    """Random EP matrix ``Q diag(B, 0) Q*`` of rank exactly ``r``.

    ``B`` is a complex Gaussian r x r matrix resampled until its condition
    number is at most ``max_cond``; ``Q`` is a seeded random unitary.  With
    ``powers > 1``, ``B^j`` for ``j = 2..powers`` must also have condition
    number at most ``power_cond``, so that rank decisions on ``A^j`` stay
    unambiguous.
    """
    n = _positive(n)
    if int(r) != r or not 0 <= r <= n:
        raise InputError(f"rank r must be an integer in [0, {n}], got {r!r}")
    r = int(r)
    rng = np.random.default_rng(seed)
    Q = random_unitary(n, rng)
    core = np.zeros((n, n), dtype=complex)
    if r > 0:
        while True:
            B = (rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))) / np.sqrt(2)
            if np.linalg.cond(B) <= max_cond and all(
                np.linalg.cond(np.linalg.matrix_power(B, j)) <= power_cond
                for j in range(2, powers + 1)
            ):
                break
        core[:r, :r] = B
    return OperatorMatrix(Q @ core @ Q.conj().T, f"ep({n}, {r}, seed={seed})")


def diagonal(values, label: str = "diagonal") -> OperatorMatrix:
    return OperatorMatrix(np.diag(np.asarray(values, dtype=complex)), label)


@dataclass(frozen=True)
class TruncationFamily:
    """Deterministic rule ``n -> OperatorMatrix`` approximating an infinite operator."""

    generator: Callable[[int], OperatorMatrix] = field(repr=False)
    label: str
    description: str = ""
    dim_rule: Callable[[int], int] = field(default=lambda n: n, repr=False)

    def __call__(self, n: int) -> OperatorMatrix:
        M = self.generator(n)
        if M.dim != self.dim_rule(n):
            raise InputError(f"family {self.label} produced dimension {M.dim} at n = {n}")
        return M


PHI_EXAMPLE2 = {-1: 1.0, 1: 2.0}  # conj(z) + 2z, i.e. U* + 2U

FAMILY_KINDS = ("example1", "shift", "toeplitz", "diag-inv-k", "identity")


def family_of(kind: str, **params) -> TruncationFamily:
    """Registered truncation families.

    kinds: ``example1`` (block example with a_k = 1/k, dimension 2n),
    ``shift``, ``toeplitz`` (``coeffs=`` symbol, default conj(z) + 2z),
    ``diag-inv-k`` (diag(1, 1/2, ..., 1/n)), ``identity``.
    """
    kind = kind.replace("_", "-")
    if kind == "example1":
        return TruncationFamily(
            lambda n: block_example(1.0 / np.arange(1, _positive(n) + 1)),
            "example1",
            "[[diag(1/k), I], [0, 0]] on H ⊕ H; closed range, square not closed",
            lambda n: 2 * n,
        )
    if kind == "shift":
        return TruncationFamily(truncated_shift, "shift", "unilateral shift U on l^2")
    if kind == "toeplitz":
        coeffs = dict(params.get("coeffs") or PHI_EXAMPLE2)
        text = _symbol_text(coeffs)
        return TruncationFamily(
            lambda n: toeplitz_truncation(coeffs, n),
            f"toeplitz({text})",
            f"Toeplitz operator with banded symbol {{{text}}}",
        )
    if kind == "diag-inv-k":
        return TruncationFamily(
            lambda n: diagonal(1.0 / np.arange(1, _positive(n) + 1), f"diag-inv-k({n})"),
            "diag-inv-k",
            "diag(1/k): normal, spectrum accumulates at 0",
        )
    if kind == "identity":
        return TruncationFamily(identity, "identity", "identity operator")
    raise InputError(f"unknown family kind {kind!r}; expected one of {', '.join(FAMILY_KINDS)}")
