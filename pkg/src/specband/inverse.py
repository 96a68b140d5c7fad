"""Inverse spectral problem for the hat subclass.

Given eigenvalues ``lambda`` of the full matrix, eigenvalues ``mu`` of its
leading (n-1)x(n-1) block and the coupling product ``beta``, decide
solvability and rebuild every matrix with that data.

For each k put ``chi = chi_n(mu_k)`` and ``d = chi'_{n-1}(mu_k)``. The
unknown ``X_k = |b_n u_k1|^2`` solves

    d^2 X^2 + (chi + 2 Re beta) d X + |beta|^2 = 0,

and the other root is ``|b_{n-1} u_{k,n-1}|^2``. Choosing a root per k
fixes ``|b_n|^2 = sum X_k`` and the weights ``|u_k1|^2 = X_k / |b_n|^2``,
hence the leading Jacobi block (from its spectral measure) and the rest
of the matrix.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .direct import (
    EQ_TOL_BASE,
    NecessaryRow,
    alternating_sign,
    check_necessary_conditions,
    equality_tolerance,
    full_spectrum,
    regime_name,
)
from .errors import Breakdown, InfeasibleBranch, InvalidData, InvalidMeasure, VerificationFailed
from .matrices import MIN_SIZE, PeriodicMatrixHat, as_general, is_real_number
from .poly import ComplexPolynomial, leave_one_out_products

VERIFY_TOL = 1e-8
DISTINCT_TOL = 1e-8


@dataclass(frozen=True)
class SpectralData:
    lambda_: tuple
    mu: tuple
    beta: complex

    def __post_init__(self):
        try:
            lam = tuple(complex(x) for x in np.ravel(self.lambda_))
            mu = tuple(float(x) for x in np.ravel(self.mu))
            beta = complex(self.beta)
        except (TypeError, ValueError) as exc:
            raise InvalidData(f"non-numeric entry: {exc}") from None
        object.__setattr__(self, "lambda_", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "beta", beta)
        if len(lam) < MIN_SIZE:
            raise InvalidData(f"need at least {MIN_SIZE} eigenvalues, got {len(lam)}", "lambda")
        if len(mu) != len(lam) - 1:
            raise InvalidData(f"expected {len(lam) - 1} submatrix eigenvalues, got {len(mu)}", "mu")
        for k, z in enumerate(lam):
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise InvalidData("non-finite entry", f"lambda[{k}]")
        for k, x in enumerate(mu):
            if not math.isfinite(x):
                raise InvalidData("non-finite entry", f"mu[{k}]")
        if any(b <= a for a, b in zip(mu, mu[1:])):
            raise InvalidData("mu not strictly increasing", "mu")
        if not (math.isfinite(beta.real) and math.isfinite(beta.imag)) or beta == 0:
            raise InvalidData("beta must be finite and nonzero", "beta")

    @property
    def n(self) -> int:
        return len(self.lambda_)

    def lam(self) -> np.ndarray:
        return np.asarray(self.lambda_, dtype=complex)

    def mus(self) -> np.ndarray:
        return np.asarray(self.mu, dtype=float)


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    regime: str
    passed: bool
    beta: complex
    beta_real: bool
    a_hat: complex
    an_real: bool
    rows: tuple
    m1: int
    m2: int
    degenerate: tuple
    branch_count: int
    tau_eq: np.ndarray
    chi_n_at_mu: np.ndarray
    chi_prime_at_mu: np.ndarray
    failures: tuple

    @property
    def m(self) -> int:
        """Total number of equalities among the conditions."""
        return self.m1 + self.m2


@dataclass(frozen=True, eq=False)
class BranchSolution:
    selector: tuple
    X: np.ndarray
    Y: np.ndarray
    b_n_abs: float
    b_nm1_abs_formula: float
    weights: np.ndarray
    psi: ComplexPolynomial
    matrix: PeriodicMatrixHat


@dataclass(frozen=True)
class VerificationReport:
    lambda_residual: float
    mu_residual: float
    beta_residual: float
    weight_sum_residual: float
    b_nm1_residual: float
    tol: float

    @property
    def worst(self) -> float:
        return max(self.lambda_residual, self.mu_residual, self.beta_residual,
                   self.weight_sum_residual, self.b_nm1_residual)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tol


def _chi_prime(mu: np.ndarray) -> np.ndarray:
    return np.array([np.prod(mu[k] - np.delete(mu, k)) for k in range(mu.size)])


def _location_failures(lam, mu, beta_real, an_real, side, tol):
    """Hypotheses on where lambda may lie, per regime."""
    scale = max(1.0, float(np.max(np.abs(lam))), float(np.max(np.abs(mu))))
    loc = tol * scale
    out = []
    if an_real:
        worst = float(np.max(np.abs(lam.imag)))
        if worst > loc:
            out.append(f"lambda must be real in this regime (max |Im| = {worst:.3e})")
            return out
        x = np.sort(lam.real)
        gaps = np.diff(x)
        if not beta_real:
            if gaps.size and np.min(gaps) <= loc:
                out.append("lambda must be distinct when beta is nonreal and a_n is real")
            near = np.min(np.abs(x[:, None] - mu[None, :]))
            if near <= loc:
                out.append("lambda and mu must have no common elements when beta is nonreal")
        else:
            run = 1
            for j, gap in enumerate(gaps):
                run = run + 1 if gap <= loc else 1
                if run > 2:
                    out.append(f"eigenvalue {x[j]:.6g} has multiplicity above two")
                    break
                if run == 2 and np.min(np.abs(mu - x[j])) > loc:
                    out.append(f"double eigenvalue {x[j]:.6g} is not one of the mu")
                    break
    else:
        signed = side * lam.imag
        if not beta_real:
            if np.min(signed) <= 0:
                out.append("lambda must lie in the open half-plane of Im a_n")
        else:
            if np.min(signed) < -loc:
                out.append("lambda must lie in the closed half-plane of Im a_n")
            for z in lam[np.abs(lam.imag) <= loc]:
                if np.min(np.abs(mu - z.real)) > loc:
                    out.append(f"real eigenvalue {z.real:.6g} must be one of the mu")
                    break
    return out


def feasibility_check(d: SpectralData, tol: float = EQ_TOL_BASE) -> FeasibilityReport:
    """Decide solvability, count equalities and the number of solutions."""
    if not isinstance(d, SpectralData):
        raise InvalidData("expected SpectralData")
    lam, mu, n = d.lam(), d.mus(), d.n
    beta_real = is_real_number(d.beta, tol)
    beta = complex(d.beta.real) if beta_real else d.beta
    a_hat = complex(np.sum(lam) - np.sum(mu))
    an_real = is_real_number(a_hat, tol, max(1.0, float(np.sum(np.abs(lam)))))
    if an_real:
        a_hat = complex(a_hat.real)
        lam_used = lam.real.astype(complex)
    else:
        lam_used = lam
    chi = np.array([np.prod(mu_k - lam_used) for mu_k in mu])
    chip = _chi_prime(mu)
    tau = equality_tolerance(chi, beta, tol)

    failures = _location_failures(lam, mu, beta_real, an_real, np.sign(a_hat.imag), tol)
    rows = check_necessary_conditions(chi, beta, tau, beta_real=beta_real)
    for r in rows:
        if not r.chi_real:
            failures.append(f"k={r.k}: chi_n(mu_k) is not real (Im = {r.chi.imag:.3e})")
        elif not r.passed:
            failures.append(
                f"k={r.k}: sign margin {r.sign_margin:.6g}, modulus margin {r.modulus_margin:.6g}"
            )
    m1 = sum(r.sign_equal for r in rows)
    m2 = sum(r.modulus_equal for r in rows)
    degenerate = tuple(r.k - 1 for r in rows if r.sign_equal or r.modulus_equal)
    passed = not failures
    return FeasibilityReport(
        regime=regime_name(beta_real, an_real),
        passed=passed,
        beta=beta,
        beta_real=beta_real,
        a_hat=a_hat,
        an_real=an_real,
        rows=tuple(rows),
        m1=int(m1),
        m2=int(m2),
        degenerate=degenerate,
        branch_count=2 ** (n - 1 - len(degenerate)) if passed else 0,
        tau_eq=tau,
        chi_n_at_mu=chi.real.copy(),
        chi_prime_at_mu=chip,
        failures=tuple(failures),
    )


def branch_candidates(d: SpectralData, report: FeasibilityReport) -> np.ndarray:
    """Rows ``(X_k^(1), X_k^(2))``: the '+' and '-' roots of the per-k quadratic."""
    if not report.passed:
        raise InfeasibleBranch("spectral data are infeasible: " + "; ".join(report.failures))
    n = d.n
    chi = report.chi_n_at_mu
    chip = report.chi_prime_at_mu
    beta = report.beta
    tau = report.tau_eq
    out = np.empty((n - 1, 2))
    for k in range(1, n):
        t = chi[k - 1] + 2.0 * beta.real
        s = alternating_sign(n, k) * t
        disc = t * t - 4.0 * abs(beta) ** 2
        degenerate = (k - 1) in report.degenerate
        if degenerate:
            disc = 0.0
        elif disc < 0:
            raise InfeasibleBranch(f"k={k}: negative discriminant {disc:.3e}")
        top = s + math.sqrt(disc)
        if top <= -tau[k - 1] or top <= 0:
            raise InfeasibleBranch(f"k={k}: non-positive root {top:.3e}")
        x1 = top / (2.0 * abs(chip[k - 1]))
        # The smaller root from the product X1 X2 = |beta|^2 / d^2 avoids cancellation.
        x2 = x1 if degenerate else abs(beta) ** 2 / (chip[k - 1] ** 2 * x1)
        out[k - 1] = (x1, x2)
    return out


def norm_formulas(chi, chi_prime, beta: complex, plus: Sequence[bool], real_form: bool = False):
    """|b_n|, |b_{n-1}|, |u_k1|^2 and |u_{k,n-1}|^2 in closed form.

    ``plus[k]`` picks the '+' root for |b_n u_k1|^2 (the complementary
    root then goes to |b_{n-1} u_{k,n-1}|^2). With ``real_form`` the
    discriminant is written as ``chi (chi + 4 beta)``, valid for real beta.
    """
    chi = np.asarray(chi, dtype=float)
    chi_prime = np.asarray(chi_prime, dtype=float)
    n = chi.size + 1
    signs = np.array([alternating_sign(n, k) for k in range(1, n)])
    beta = complex(beta)
    if real_form:
        t = chi + 2.0 * beta.real
        disc = chi * (chi + 4.0 * beta.real)
    else:
        t = chi + 2.0 * beta.real
        disc = t ** 2 - 4.0 * abs(beta) ** 2
    root = np.sqrt(np.maximum(disc, 0.0))
    pm = np.where(np.asarray(plus, dtype=bool), 1.0, -1.0)
    first = (signs * t + pm * root) / (2.0 * np.abs(chi_prime))
    second = (signs * t - pm * root) / (2.0 * np.abs(chi_prime))
    b_n_abs = math.sqrt(float(np.sum(first)))
    b_nm1_abs = math.sqrt(float(np.sum(second)))
    return b_n_abs, b_nm1_abs, first / b_n_abs ** 2, second / b_nm1_abs ** 2


def jacobi_from_measure(nodes, weights):
    """Jacobi matrix whose spectral measure at e_1 is sum w_k delta(mu_k).

    Discrete Stieltjes procedure, written as Lanczos on diag(nodes) started
    from sqrt(weights), with one full reorthogonalization pass per step.
    Returns (diagonal, positive off-diagonal).
    """
    x = np.asarray(nodes, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if x.size != w.size or x.size == 0:
        raise InvalidMeasure("nodes and weights must be non-empty and of equal length")
    if np.any(~(w > 0)):
        raise InvalidMeasure("weights must be positive")
    if abs(np.sum(w) - 1.0) > 1e-10:
        raise InvalidMeasure(f"weights sum to {np.sum(w):.16g}, expected 1")
    if np.unique(x).size != x.size:
        raise InvalidMeasure("nodes must be distinct")
    diag, off = _lanczos(x, w[None, :])
    return diag[0], off[0]


def _lanczos(x: np.ndarray, W: np.ndarray):
    """Lanczos on diag(x) for every row of ``W`` at once (one measure per row)."""
    B, N = W.shape
    scale = max(1.0, float(np.max(np.abs(x))))
    Q = np.zeros((B, N, N))
    Q[:, :, 0] = np.sqrt(W)
    diag = np.zeros((B, N))
    off = np.zeros((B, N - 1))
    for j in range(N):
        q = Q[:, :, j]
        v = x * q
        diag[:, j] = np.einsum("bi,bi->b", q, v)
        v -= diag[:, j, None] * q
        if j > 0:
            v -= off[:, j - 1, None] * Q[:, :, j - 1]
        basis = Q[:, :, : j + 1]
        v -= np.einsum("bik,bk->bi", basis, np.einsum("bi,bik->bk", v, basis))
        if j == N - 1:
            break
        nv = np.sqrt(np.einsum("bi,bi->b", v, v))
        if np.min(nv) < 1e-13 * scale:
            raise Breakdown(f"recurrence norm {np.min(nv):.3e} at step {j + 1}: "
                            "measure is numerically degenerate")
        off[:, j] = nv
        Q[:, :, j + 1] = v / nv[:, None]
    return diag, off


@dataclass(frozen=True, eq=False)
class _BranchSetup:
    """Branch-independent pieces shared by every selector."""

    data: SpectralData
    report: FeasibilityReport
    candidates: np.ndarray
    free: tuple
    mu: np.ndarray
    basis: np.ndarray


def _setup(d: SpectralData, report: FeasibilityReport) -> _BranchSetup:
    mu = d.mus()
    return _BranchSetup(
        data=d,
        report=report,
        candidates=branch_candidates(d, report),
        free=tuple(k for k in range(d.n - 1) if k not in report.degenerate),
        mu=mu,
        basis=leave_one_out_products(mu),
    )


def selector_bits(selector, report: FeasibilityReport, n: int) -> tuple:
    free = n - 1 - len(report.degenerate)
    if isinstance(selector, (int, np.integer)):
        if not 0 <= selector < 2 ** free:
            raise ValueError(f"selector {selector} out of range [0, {2 ** free})")
        return tuple((int(selector) >> j) & 1 for j in range(free))
    bits = tuple(int(b) for b in selector)
    if len(bits) != free or any(b not in (0, 1) for b in bits):
        raise ValueError(f"selector needs {free} bits")
    return bits


def reconstruct_branch(d: SpectralData, selector=0, report: FeasibilityReport | None = None,
                       tol: float = EQ_TOL_BASE) -> BranchSolution:
    """Rebuild the hat-class matrix of one branch.

    Bit j of ``selector`` (least significant first) belongs to the j-th
    non-degenerate index; 0 assigns the '+' root to |b_n u_k1|^2.
    """
    if report is None:
        report = feasibility_check(d, tol)
    return _build(_setup(d, report), [selector_bits(selector, report, d.n)])[0]


def _build(setup: _BranchSetup, bit_rows) -> list:
    """Solutions for a batch of selectors sharing one setup."""
    cand = setup.candidates
    n1 = cand.shape[0]
    pick = np.zeros((len(bit_rows), n1), dtype=int)
    if setup.free:
        pick[:, list(setup.free)] = np.asarray(bit_rows, dtype=int).reshape(len(bit_rows), -1)
    rows = np.arange(n1)
    X = cand[rows, pick]
    Y = cand[rows, 1 - pick]
    totals = np.sum(X, axis=1)
    weights = X / totals[:, None]
    c_hat, b_inner = _lanczos(setup.mu, weights)
    beta = setup.report.beta
    b_n_abs = np.sqrt(totals)
    b_hat_n = b_n_abs * (beta / abs(beta))
    b_nm1 = beta / (np.prod(b_inner, axis=1) * b_hat_n)
    out = []
    for i, bits in enumerate(bit_rows):
        # Phases cancel, so b_{n-1} is real up to roundoff.
        if abs(b_nm1[i].imag) > 1e-8 * abs(b_nm1[i]):
            raise InfeasibleBranch(f"b_(n-1) came out nonreal: {b_nm1[i]}")
        out.append(BranchSolution(
            selector=tuple(bits),
            X=X[i],
            Y=Y[i],
            b_n_abs=float(b_n_abs[i]),
            b_nm1_abs_formula=math.sqrt(float(np.sum(Y[i]))),
            weights=weights[i],
            psi=ComplexPolynomial(weights[i] @ setup.basis),
            matrix=PeriodicMatrixHat(
                c_hat=c_hat[i],
                b_hat=tuple(b_inner[i]) + (b_nm1[i].real,),
                b_hat_n=b_hat_n[i],
                a_hat_n=setup.report.a_hat,
            ),
        ))
    return out


def _hausdorff(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise Hausdorff distance between point sets ``a[i]`` and ``b``."""
    dist = np.abs(a[:, :, None] - np.asarray(b, dtype=complex)[None, None, :])
    return np.maximum(np.max(np.min(dist, axis=2), axis=1), np.max(np.min(dist, axis=1), axis=1))


def _recomputed_lapack(matrices):
    dense = np.stack([as_general(m).dense() for m in matrices])
    lam = np.linalg.eigvals(dense)
    mu = np.linalg.eigvalsh(dense[:, :-1, :-1]).astype(complex)
    beta = np.array([np.prod(np.asarray(as_general(m).b, dtype=complex)) for m in matrices])
    return lam, mu, beta


def _recomputed_direct(matrices):
    reps = [full_spectrum(as_general(m)) for m in matrices]
    lam = np.stack([r.lambda_ for r in reps])
    mu = np.stack([np.asarray(r.mu, dtype=complex) for r in reps])
    beta = np.array([r.beta for r in reps])
    return lam, mu, beta


ROUTES = {"direct": _recomputed_direct, "lapack": _recomputed_lapack}


def _residuals(matrices, d: SpectralData, tol: float, solutions=None, route: str = "direct") -> list:
    if route not in ROUTES:
        raise ValueError(f"unknown verification route {route!r}")
    lam_re, mu_re, beta_re = ROUTES[route](matrices)
    lam, mu = d.lam(), d.mus()
    scale = max(1.0, float(np.max(np.abs(lam))), float(np.max(np.abs(mu))))
    lam_res = _hausdorff(lam_re, lam) / scale
    mu_res = _hausdorff(mu_re, mu) / scale
    beta_res = np.abs(beta_re - d.beta) / abs(d.beta)
    out = []
    for i in range(len(matrices)):
        weight_res = b_res = 0.0
        if solutions is not None:
            sol = solutions[i]
            weight_res = abs(float(np.sum(sol.weights)) - 1.0)
            b_nm1 = abs(sol.matrix.b_hat[-1])
            b_res = abs(b_nm1 - sol.b_nm1_abs_formula) / max(b_nm1, 1e-300)
        out.append(VerificationReport(
            lambda_residual=float(lam_res[i]),
            mu_residual=float(mu_res[i]),
            beta_residual=float(beta_res[i]),
            weight_sum_residual=weight_res,
            b_nm1_residual=b_res,
            tol=tol,
        ))
    return out


def _raise_if_failed(report: VerificationReport):
    if not report.passed:
        raise VerificationFailed(f"reconstruction residual {report.worst:.3e} exceeds {report.tol:.1e}",
                                 report.worst, report)


def verify_reconstruction(sol, d: SpectralData, tol: float = VERIFY_TOL,
                          route: str = "direct") -> VerificationReport:
    """Recompute the spectral data of a matrix (or branch) and compare.

    ``route="direct"`` recomputes the spectra through the direct solver;
    ``route="lapack"`` uses dense LAPACK eigensolvers, which share nothing
    with either solver and are much cheaper in bulk. Residuals are
    relative: Hausdorff distances are divided by
    ``max(1, max |lambda|, max |mu|)``; beta by ``|beta|``. Raises
    VerificationFailed when the worst one exceeds ``tol``.
    """
    if isinstance(sol, BranchSolution):
        report = _residuals([sol.matrix], d, tol, [sol], route)[0]
    else:
        report = _residuals([sol], d, tol, None, route)[0]
    _raise_if_failed(report)
    return report


BATCH = 256


def enumerate_solutions(d: SpectralData, tol: float = EQ_TOL_BASE, verify_tol: float = VERIFY_TOL,
                        max_workers: int | None = None):
    """All ``branch_count`` solutions, ordered by selector, each verified.

    Selectors are processed in batches; with ``max_workers > 1`` batches
    run on a thread pool (the dense eigensolvers release the GIL). Each
    solution is checked on the LAPACK route of :func:`verify_reconstruction`.
    """
    report = feasibility_check(d, tol)
    if not report.passed:
        raise InfeasibleBranch("spectral data are infeasible: " + "; ".join(report.failures))
    setup = _setup(d, report)

    def run(start):
        stop = min(start + BATCH, report.branch_count)
        sols = _build(setup, [selector_bits(s, report, d.n) for s in range(start, stop)])
        for rep in _residuals([s.matrix for s in sols], d, verify_tol, sols, "lapack"):
            _raise_if_failed(rep)
        return sols

    starts = range(0, report.branch_count, BATCH)
    if max_workers and max_workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            chunks = list(pool.map(run, starts))
    else:
        chunks = [run(s) for s in starts]
    return [sol for chunk in chunks for sol in chunk]


def matrix_distance(a, b) -> float:
    """Max entrywise difference of the dense forms, relative to max(1, max |a|)."""
    A, B = as_general(a).dense(), as_general(b).dense()
    return float(np.max(np.abs(A - B)) / max(1.0, float(np.max(np.abs(A)))))


def pairwise_distinct(solutions, tol: float = DISTINCT_TOL) -> bool:
    if len(solutions) < 2:
        return True
    dense = np.stack([s.matrix.dense() for s in solutions])
    for i in range(len(solutions) - 1):
        gaps = np.max(np.abs(dense[i + 1:] - dense[i]), axis=(1, 2))
        if np.min(gaps) <= tol:
            return False
    return True
