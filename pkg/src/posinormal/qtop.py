"""Exact algebra of banded quasi-Toeplitz operators on one-sided l^2.

An operator is stored as a banded Toeplitz part (``symbol``: diagonal offset
-> coefficient, offset +1 is the subdiagonal / ``U`` direction) plus a finite
top-left ``correction`` block, so that::

    entry(i, k) = symbol[i - k] + correction[i, k]   (i, k < window)
    entry(i, k) = symbol[i - k]                      (otherwise)

Indices start at 0; the basis vector e_1 of one-based notation is index 0.
Sums, products and adjoints stay in this class and are computed with no
truncation error beyond floating-point rounding of the coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import InputError, InternalConsistencyError
from .matop import OperatorMatrix
from .numkernel import DEFAULT_TOL, ToleranceConfig, is_psd

# entries below this (relative to the operands' scale) are rounding residue
_SNAP = 1e-15
SYMBOL_ATOL = 1e-14


@dataclass(frozen=True)
class QuasiToeplitzOperator:
    symbol: Mapping[int, complex]
    correction: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=complex))

    def __post_init__(self):
        sym = {int(k): complex(v) for k, v in dict(self.symbol).items() if v != 0}
        if not all(np.isfinite(v) for v in sym.values()):
            raise InputError("symbol coefficients must be finite")
        C = np.array(self.correction, dtype=complex)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise InputError(f"correction must be square, got shape {C.shape}")
        if not np.all(np.isfinite(C)):
            raise InputError("correction entries must be finite")
        w = C.shape[0]
        while w > 0 and not C[w - 1, :w].any() and not C[:w, w - 1].any():
            w -= 1
        C = C[:w, :w].copy()
        C.setflags(write=False)
        object.__setattr__(self, "symbol", dict(sorted(sym.items())))
        object.__setattr__(self, "correction", C)

    @property
    def window(self) -> int:
        return self.correction.shape[0]

    @property
    def lower_bandwidth(self) -> int:
        """Largest positive offset (0 if none)."""
        return max([k for k in self.symbol if k > 0], default=0)

    @property
    def upper_bandwidth(self) -> int:
        return max([-k for k in self.symbol if k < 0], default=0)

    @property
    def bandwidth(self) -> int:
        return max(self.lower_bandwidth, self.upper_bandwidth)

    def norm_bound(self) -> float:
        """Cheap upper bound on the operator norm."""
        C = self.correction
        cnorm = float(np.linalg.norm(C, 2)) if C.size else 0.0
        return sum(abs(v) for v in self.symbol.values()) + cnorm

    def entry(self, i: int, k: int) -> complex:
        value = self.symbol.get(i - k, 0j)
        if i < self.window and k < self.window:
            value += self.correction[i, k]
        return value

    def block(self, rows: int, cols: int) -> np.ndarray:
        """Exact leading ``rows x cols`` block of the infinite matrix."""
        M = np.zeros((rows, cols), dtype=complex)
        for offset, value in self.symbol.items():
            # M[i, i - offset] over the valid range
            i0 = max(offset, 0)
            i1 = min(rows, cols + offset)
            if i1 > i0:
                idx = np.arange(i0, i1)
                M[idx, idx - offset] += value
        w = self.window
        if w:
            r, c = min(rows, w), min(cols, w)
            M[:r, :c] += self.correction[:r, :c]
        return M

    def apply(self, v) -> np.ndarray:
        """Exact image of a finitely supported vector (length grows by the lower bandwidth)."""
        v = np.asarray(v, dtype=complex).ravel()
        return self.block(v.size + self.lower_bandwidth, v.size) @ v

    # operator syntax
    def __add__(self, other):
        return qt_add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return qt_add(self, qt_scale(-1, _coerce(other)))

    def __rsub__(self, other):
        return qt_add(_coerce(other), qt_scale(-1, self))

    def __neg__(self):
        return qt_scale(-1, self)

    def __matmul__(self, other):
        return qt_multiply(self, other)

    def __mul__(self, other):
        if isinstance(other, QuasiToeplitzOperator):
            return qt_multiply(self, other)
        return qt_scale(other, self)

    def __rmul__(self, other):
        return qt_scale(other, self)

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise InputError(f"power must be a nonnegative integer, got {k!r}")
        result = IDENTITY
        for _ in range(int(k)):
            result = qt_multiply(result, self)
        return result

    @property
    def H(self):
        return qt_adjoint(self)


def _coerce(x):
    if isinstance(x, QuasiToeplitzOperator):
        return x
    if np.isscalar(x):
        return QuasiToeplitzOperator({0: x})
    raise TypeError(f"cannot combine quasi-Toeplitz operator with {type(x).__name__}")


def qt_from_symbol(coeffs: Mapping[int, complex]) -> QuasiToeplitzOperator:
    if not coeffs:
        raise InputError("coefficient set is empty")
    return QuasiToeplitzOperator(coeffs)


def _snap(C: np.ndarray, scale: float) -> np.ndarray:
    C = C.copy()
    C[np.abs(C) <= _SNAP * max(scale, 1.0)] = 0
    return C


def _convolve(a: Mapping[int, complex], b: Mapping[int, complex]) -> dict:
    out: dict[int, complex] = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0j) + x * y
    return out


def qt_multiply(X: QuasiToeplitzOperator, Y: QuasiToeplitzOperator) -> QuasiToeplitzOperator:
    """Exact product ``X Y``.

    The symbol is the convolution of the factor symbols.  Outside a window of
    size ``w_X + w_Y + bw_X + bw_Y`` the product agrees with that Toeplitz
    part, so the correction is read off from an exact finite block product.
    """
    symbol = _convolve(X.symbol, Y.symbol)
    W = X.window + Y.window + X.bandwidth + Y.bandwidth
    if W == 0:
        return QuasiToeplitzOperator(symbol)
    # inner dimension large enough that every X[i, j] with i < W has j < inner
    inner = W + X.upper_bandwidth + X.window
    P = X.block(W, inner) @ Y.block(inner, W)
    T = QuasiToeplitzOperator(symbol).block(W, W)
    scale = X.norm_bound() * Y.norm_bound()
    return QuasiToeplitzOperator(symbol, _snap(P - T, scale))


def qt_adjoint(X: QuasiToeplitzOperator) -> QuasiToeplitzOperator:
    symbol = {-k: np.conj(v) for k, v in X.symbol.items()}
    return QuasiToeplitzOperator(symbol, X.correction.conj().T)


def qt_add(X: QuasiToeplitzOperator, Y: QuasiToeplitzOperator) -> QuasiToeplitzOperator:
    symbol = dict(X.symbol)
    for k, v in Y.symbol.items():
        symbol[k] = symbol.get(k, 0j) + v
    w = max(X.window, Y.window)
    C = np.zeros((w, w), dtype=complex)
    C[: X.window, : X.window] += X.correction
    C[: Y.window, : Y.window] += Y.correction
    scale = X.norm_bound() + Y.norm_bound()
    tiny = _SNAP * max(scale, 1.0)
    symbol = {k: v for k, v in symbol.items() if abs(v) > tiny}
    return QuasiToeplitzOperator(symbol, _snap(C, scale))


def qt_scale(c: complex, X: QuasiToeplitzOperator) -> QuasiToeplitzOperator:
    c = complex(c)
    return QuasiToeplitzOperator({k: c * v for k, v in X.symbol.items()}, c * X.correction)


def self_commutator(X: QuasiToeplitzOperator) -> np.ndarray:
    """Finite Hermitian matrix ``X*X - XX*``.

    The Toeplitz parts of ``X*X`` and ``XX*`` coincide because symbol
    multiplication is commutative, leaving a finite-rank difference.
    """
    Xh = qt_adjoint(X)
    D = qt_add(qt_multiply(Xh, X), qt_scale(-1, qt_multiply(X, Xh)))
    scale = X.norm_bound() ** 2
    leftover = max((abs(v) for v in D.symbol.values()), default=0.0)
    if leftover > SYMBOL_ATOL * max(scale, 1.0):
        raise InternalConsistencyError(
            f"symbol part of the self-commutator did not cancel (max {leftover:.3g})"
        )
    C = D.correction
    if C.size and np.abs(C - C.conj().T).max() > SYMBOL_ATOL * max(scale, 1.0):
        raise InternalConsistencyError("self-commutator is not Hermitian")
    return np.array(C)


def qt_is_hyponormal(X: QuasiToeplitzOperator, tol: ToleranceConfig = DEFAULT_TOL):
    """Returns ``(flag, smallest commutator eigenvalue)``."""
    C = self_commutator(X)
    if C.size == 0:
        return True, 0.0
    return is_psd(C, tol, scale=X.norm_bound() ** 2)


def qt_residuals(X: QuasiToeplitzOperator, Y: QuasiToeplitzOperator):
    """``(symbol residual, correction residual)`` as max absolute differences."""
    offsets = set(X.symbol) | set(Y.symbol)
    sym_res = max((abs(X.symbol.get(k, 0j) - Y.symbol.get(k, 0j)) for k in offsets), default=0.0)
    w = max(X.window, Y.window)
    D = np.zeros((w, w), dtype=complex)
    D[: X.window, : X.window] += X.correction
    D[: Y.window, : Y.window] -= Y.correction
    corr_res = float(np.abs(D).max()) if w else 0.0
    return float(sym_res), corr_res


def qt_verify_equal(X: QuasiToeplitzOperator, Y: QuasiToeplitzOperator, tol: ToleranceConfig = DEFAULT_TOL):
    """Returns ``(equal, residual)`` with the residual the larger of the two parts."""
    sym_res, corr_res = qt_residuals(X, Y)
    scale = max(X.norm_bound(), Y.norm_bound(), 1.0)
    equal = sym_res <= SYMBOL_ATOL and corr_res <= tol.residual_rtol * scale
    return equal, max(sym_res, corr_res)


def qt_truncate(X: QuasiToeplitzOperator, n: int) -> OperatorMatrix:
    """Leading n x n compression."""
    if int(n) != n or n < max(X.window, 1) or n <= X.bandwidth:
        raise InputError(
            f"truncation size {n} must be >= window {X.window} and > bandwidth {X.bandwidth}"
        )
    return OperatorMatrix(X.block(int(n), int(n)), f"qt_truncate({n})")


@dataclass(frozen=True)
class ProbeResult:
    falsified: bool
    worst_ratio: float
    trials: int
    witness: np.ndarray | None = field(default=None, repr=False)


def qt_bounded_below_probe(
    X: QuasiToeplitzOperator,
    c: float,
    trials: int = 1000,
    max_support: int = 64,
    seed: int = 0,
) -> ProbeResult:
    """Search for a vector with ``||Xv|| < c ||v||``.

    Trial ``t`` draws a complex Gaussian unit vector supported on the first
    ``1 + t mod max_support`` coordinates and applies ``X`` exactly.  Never
    being falsified is evidence, not proof, of the bound.
    """
    if not c > 0:
        raise InputError(f"c must be positive, got {c!r}")
    if trials < 1 or max_support < 1:
        raise InputError("trials and max_support must be positive")
    rng = np.random.default_rng(seed)
    M = X.block(max_support + X.lower_bandwidth, max_support)
    worst = np.inf
    witness = None
    for t in range(trials):
        N = 1 + t % max_support
        v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        v /= np.linalg.norm(v)
        ratio = float(np.linalg.norm(M[: N + X.lower_bandwidth, :N] @ v))
        if ratio < worst:
            worst, witness = ratio, v
    return ProbeResult(worst < c - 1e-12, worst, trials, witness)


IDENTITY = QuasiToeplitzOperator({0: 1.0})
SHIFT = QuasiToeplitzOperator({1: 1.0})
SHIFT_ADJ = QuasiToeplitzOperator({-1: 1.0})


def to_jsonable(X: QuasiToeplitzOperator) -> dict:
    return {
        "symbol": {str(k): [v.real, v.imag] for k, v in X.symbol.items()},
        "correction": [[[z.real, z.imag] for z in row] for row in X.correction],
        "window": X.window,
    }


def from_jsonable(data: dict) -> QuasiToeplitzOperator:
    try:
        symbol = {int(k): complex(v[0], v[1]) for k, v in data["symbol"].items()}
        rows = data.get("correction", [])
        C = np.array([[complex(z[0], z[1]) for z in row] for row in rows], dtype=complex)
        if C.size == 0:
            C = np.zeros((0, 0), dtype=complex)
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise InputError(f"malformed quasi-Toeplitz record: {exc}") from exc
    return QuasiToeplitzOperator(symbol, C)
