"""Reproducible verification suites, one per result being checked.

Each suite returns a :class:`SuiteResult` holding one :class:`Check` per
criterion, so the CLI and the test-suite print the same pass/fail table.
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import classify, matop, qtop, rangelab
from .numkernel import DEFAULT_TOL, ToleranceConfig, orthonormal_range, subspace_inclusion

EXAMPLE1_SIZES = (4, 8, 16, 32, 64, 128, 256)


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class SuiteResult:
    name: str
    checks: list
    elapsed: float = 0.0
    budget: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and self.within_budget

    @property
    def within_budget(self) -> bool:
        return self.budget is None or self.elapsed < self.budget

    def table(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(f"[{'PASS' if c.passed else 'FAIL'}] {self.name}: {c.name}")
        if self.budget is not None:
            status = "PASS" if self.within_budget else "FAIL"
            lines.append(f"[{status}] {self.name}: runtime {self.elapsed:.2f}s < {self.budget:g}s")
        return "\n".join(lines)


def _timed(name, budget):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            checks = fn(*args, **kwargs)
            return SuiteResult(name, checks, time.perf_counter() - t0, budget)
        run.suite_name = name
        return run
    return wrap


def mixed_corpus(count: int = 500, seed: int = 0, max_n: int = 10):
    """Round-robin corpus of random EP, random dense, Jordan and truncated matrices."""
    rng = np.random.default_rng(seed)
    eigenvalues = (0.0, 0.0, 1.0, 2.0, -1.5, 1j)
    out = []
    for i in range(count):
        kind = i % 5
        sub = int(rng.integers(2**31))
        if kind == 0:
            n = int(rng.integers(1, max_n + 1))
            out.append(matop.random_ep(n, int(rng.integers(0, n + 1)), sub))
        elif kind == 1:
            out.append(matop.random_dense(int(rng.integers(1, max_n + 1)), sub))
        elif kind == 2:
            lam = eigenvalues[int(rng.integers(len(eigenvalues)))]
            out.append(matop.jordan_block(int(rng.integers(1, 7)), lam))
        elif kind == 3:
            out.append(matop.truncated_shift(int(rng.integers(1, max_n + 1))))
        else:
            out.append(matop.toeplitz_truncation(matop.PHI_EXAMPLE2, int(rng.integers(2, max_n + 1))))
    return out


def ep_corpus(count: int, seed: int, max_n: int, powers: int = 1):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        r = int(rng.integers(0, n + 1))
        out.append(matop.random_ep(n, r, int(rng.integers(2**31)), powers=powers))
    return out


@_timed("theorem1", 60.0)
def theorem1(instances: int = 500, seed: int = 0, tol: ToleranceConfig = DEFAULT_TOL):
    """Range inclusion, Douglas construction and lambda existence agree."""
    disagreements = []
    n_pos = 0
    for M in mixed_corpus(instances, seed):
        A = M.entries
        by_range = classify.is_posinormal(A, tol)[0]
        by_factor = classify.candidate_succeeds(A, tol)
        by_lambda = classify.lambda_exists(A, tol)[0]
        n_pos += by_range
        if not by_range == by_factor == by_lambda:
            disagreements.append({"label": M.label, "range": by_range,
                                  "factor": by_factor, "lambda": by_lambda})
    return [Check(
        "three posinormality decisions agree on every instance",
        not disagreements,
        {"instances": instances, "posinormal": n_pos, "disagreements": disagreements},
    )]


@_timed("main-theorem", 30.0)
def main_theorem(instances: int = 200, seed: int = 0, tol: ToleranceConfig = DEFAULT_TOL,
                 k_max: int = 5):
    """Powers of random EP matrices stay EP; ran (A*)^k = ran A*."""
    bound = 1e-8
    # powers of ill-conditioned B lose digits; EP is judged at the 1e-8 defect bound
    ep_tol = replace(tol, residual_rtol=max(tol.residual_rtol, bound))
    worst_ep, worst_adj, failures = 0.0, 0.0, []
    for M in ep_corpus(instances, seed, 12, powers=k_max):
        A = M.entries
        Ra = orthonormal_range(A.conj().T, tol)
        for k in range(1, k_max + 1):
            Ak = np.linalg.matrix_power(A, k)
            ep = classify.is_ep(Ak, ep_tol)
            d_ep = classify.range_equality_defect(Ak, tol)
            Rk = orthonormal_range(Ak.conj().T, tol)
            d_adj = max(subspace_inclusion(Ra, Rk, tol)[1], subspace_inclusion(Rk, Ra, tol)[1])
            worst_ep, worst_adj = max(worst_ep, d_ep), max(worst_adj, d_adj)
            if not (ep and d_ep <= bound and d_adj <= bound):
                failures.append({"label": M.label, "k": k, "ep": ep,
                                 "ep_defect": d_ep, "adjoint_range_defect": d_adj})
    return [
        Check(f"A^k is EP for k = 1..{k_max}, defect <= 1e-8",
              not any(not f["ep"] or f["ep_defect"] > bound for f in failures),
              {"instances": instances, "worst_defect": worst_ep}),
        Check("ran (A*)^k = ran A* both ways, defect <= 1e-8",
              not any(f["adjoint_range_defect"] > bound for f in failures),
              {"worst_defect": worst_adj, "failures": failures}),
    ]


@_timed("lemma2", 10.0)
def lemma2(instances: int = 500, seed: int = 0, tol: ToleranceConfig = DEFAULT_TOL):
    """Posinormal matrices have ker A = ker A^2; the 2x2 Jordan block does not."""
    failures, n_pos, worst = [], 0, 0.0
    for M in mixed_corpus(instances, seed):
        A = M.entries
        if not classify.is_posinormal(A, tol)[0]:
            continue
        n_pos += 1
        _, dims = classify.kernel_power_equal(A, tol)
        defect = classify.kernel_inclusion_defect(A, tol)
        worst = max(worst, defect)
        if dims[0] != dims[1] or defect > 1e-8:
            failures.append({"label": M.label, "dims": dims, "defect": defect})
    eq, jdims = classify.kernel_power_equal(matop.jordan_block(2).entries, tol)
    return [
        Check("posinormal instances: dim ker A = dim ker A^2, ker A^2 ⊆ ker A (<= 1e-8)",
              not failures, {"posinormal": n_pos, "worst_defect": worst, "failures": failures}),
        Check("Jordan J2 fails with kernel dims (1, 2)", (not eq) and jdims == (1, 2),
              {"dims": jdims}),
    ]


@_timed("lemma-crl", 20.0)
def lemma_crl(instances: int = 500, seed: int = 0, tol: ToleranceConfig = DEFAULT_TOL):
    """Posinormal A: ||A^2 h|| >= c^2 ||h|| on ran A* (200 sampled h each)."""
    failures, n_checked = [], 0
    for i, M in enumerate(mixed_corpus(instances, seed)):
        A = M.entries
        if not classify.is_posinormal(A, tol)[0] or not np.any(A):
            continue
        n_checked += 1
        try:
            cert = rangelab.lemma_crl_check(A, tol, samples=200, seed=seed + i)
        except rangelab.DegenerateInputError as exc:
            failures.append({"label": M.label, "error": str(exc)})
            continue
        ok = (isinstance(cert, rangelab.BoundedBelowCertificate) and cert.c > 0
              and cert.sampled_min_ratio >= cert.c**2 * (1 - 1e-8)
              and cert.verified_power_bound)
        if not ok:
            failures.append({"label": M.label, "c": cert.c})
    return [Check("c > 0 and min ||A^2 h|| / ||h|| >= c^2 (1 - 1e-8)", not failures,
                  {"checked": n_checked, "failures": failures})]


@_timed("example1", 30.0)
def example1(tol: ToleranceConfig = DEFAULT_TOL, sizes=EXAMPLE1_SIZES):
    """Block example: T has a sigma plateau, T^2 decays like 1/n."""
    fam = matop.family_of("example1")
    report = rangelab.power_range_report(fam, 2, sizes, tol)
    d1, d2 = report[1], report[2]
    s1 = [p.sigma for p in d1.curve]
    rel = [abs(p.sigma - np.sqrt(1 / p.n**2 + 1 / p.n**4)) / np.sqrt(1 / p.n**2 + 1 / p.n**4)
           for p in d2.curve]
    return [
        Check("sigma+_min(T_n) in [1, sqrt 2]", all(1 - 1e-12 <= s <= np.sqrt(2) + 1e-12 for s in s1),
              {"sigmas": s1}),
        Check("T classified stable", d1.classification == "stable", {"floor": d1.stable_floor}),
        Check("sigma+_min(T_n^2) = sqrt(1/n^2 + 1/n^4) within 1e-10 relative",
              max(rel) <= 1e-10, {"max_rel_error": max(rel)}),
        Check("T^2 classified decaying with alpha = 1.0 +- 0.1",
              d2.classification == "decaying" and abs(d2.fitted_decay_exponent - 1.0) <= 0.1,
              {"alpha": d2.fitted_decay_exponent}),
    ]


@_timed("example2", 30.0)
def example2(tol: ToleranceConfig = DEFAULT_TOL, trials: int = 10_000, max_support: int = 512,
             seed: int = 0):
    """U* + 2U is hyponormal and bounded below; its square is not hyponormal."""
    X = qtop.SHIFT_ADJ + 2 * qtop.SHIFT
    C = qtop.self_commutator(X)
    expected = np.zeros_like(C)
    expected[0, 0] = 3.0
    res = float(np.abs(C - expected).max()) if C.shape == (1, 1) else np.inf
    hypo, _ = qtop.qt_is_hyponormal(X, tol)
    hypo2, lam2 = qtop.qt_is_hyponormal(X @ X, tol)
    probe = qtop.qt_bounded_below_probe(X, 1.0, trials, max_support, seed)
    return [
        Check("self-commutator of U* + 2U = 3 e1 e1* (residual <= 1e-14)", res <= 1e-14,
              {"commutator": C.real.tolist(), "residual": res}),
        Check("U* + 2U hyponormal", bool(hypo)),
        Check("(U* + 2U)^2 not hyponormal, min eigenvalue <= -psd_rtol",
              (not hypo2) and lam2 <= -tol.psd_rtol,
              {"min_eigenvalue": lam2, "closed_form": (15 - 3 * np.sqrt(41)) / 2}),
        Check(f"bounded-below probe at c = 1 not falsified ({trials} vectors)",
              not probe.falsified, {"worst_ratio": probe.worst_ratio}),
    ]


@_timed("minimality", 5.0)
def minimality(tol: ToleranceConfig = DEFAULT_TOL):
    """Minimal lambda for [[1, 1], [0, 1]] is the golden ratio."""
    A = np.array([[1.0, 1.0], [0.0, 1.0]])
    golden = (1 + np.sqrt(5)) / 2
    cert = classify.posinormal_certificate(A, tol)
    lam_b = classify.lambda_bisection(A, tol)
    return [
        Check("lambda_min = (1 + sqrt 5) / 2 within 1e-8", abs(cert.lambda_min - golden) <= 1e-8,
              {"lambda_min": cert.lambda_min}),
        Check("bisection and norm routes agree within 1e-6 relative",
              abs(lam_b - cert.lambda_min) <= 1e-6 * cert.lambda_min, {"bisection": lam_b}),
        Check("AA* <= lambda^2 A*A passes at lambda_min", classify.lambda_psd(A, cert.lambda_min, tol)[0]),
        Check("fails at lambda_min (1 - 1e-4)",
              not classify.lambda_psd(A, cert.lambda_min * (1 - 1e-4), tol)[0]),
    ]


@_timed("bouldin", 20.0)
def bouldin(instances: int = 100, seed: int = 0, tol: ToleranceConfig = DEFAULT_TOL):
    """Angle pi/2 for posinormal T; cos theta = n / sqrt(n^2 + 1) for the block example."""
    worst = 0.0
    for M in ep_corpus(instances, seed, 10):
        worst = max(worst, abs(classify.bouldin_angle(M.entries, M.entries, tol).theta - np.pi / 2))
    errs = {}
    for n in (1, 2, 4, 8):
        T = matop.block_example(1.0 / np.arange(1, n + 1)).entries
        errs[n] = abs(np.cos(classify.bouldin_angle(T, T, tol).theta) - n / np.sqrt(n**2 + 1))
    return [
        Check("random EP: theta = pi/2 within 1e-8", worst <= 1e-8, {"worst_error": worst}),
        Check("block example: cos theta = n / sqrt(n^2 + 1) within 1e-8",
              max(errs.values()) <= 1e-8, {"errors": {str(k): v for k, v in errs.items()}}),
    ]


@_timed("shift-witness", 1.0)
def shift_witness(tol: ToleranceConfig = DEFAULT_TOL):
    """U = U* U^2, UU* = U* (U^2 U*^2) U, U*U = I, checked exactly."""
    U, Us, I = qtop.SHIFT, qtop.SHIFT_ADJ, qtop.IDENTITY
    P = (U @ U) @ (Us @ Us)
    cases = {
        "U = U* U^2": (U, Us @ (U @ U)),
        "UU* = U* (U^2 U*^2) U": (U @ Us, Us @ P @ U),
        "U*U = I": (Us @ U, I),
    }
    checks = []
    for name, (X, Y) in cases.items():
        sym, corr = qtop.qt_residuals(X, Y)
        equal, _ = qtop.qt_verify_equal(X, Y, tol)
        checks.append(Check(name, equal and sym == 0.0 and corr <= 1e-14,
                            {"symbol_residual": sym, "correction_residual": corr}))
    return checks


SUITES = {
    "theorem1": theorem1,
    "main-theorem": main_theorem,
    "lemma2": lemma2,
    "lemma-crl": lemma_crl,
    "example1": example1,
    "example2": example2,
    "minimality": minimality,
    "bouldin": bouldin,
    "shift-witness": shift_witness,
}
