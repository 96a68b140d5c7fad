"""Direct spectral problem for the general class.

The characteristic polynomial is assembled from the leading block's
spectrum and the residues of chi_n / chi_{n-1} at its poles (the Schur
complement form), never from a dense determinant. The localization
statements that depend on whether beta and a_n are real are then
checked one by one and collected as named pass/fail rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .matrices import REAL_TOL, beta_of, is_real_number, validate
from .poly import ComplexPolynomial, poly_from_roots, poly_roots, partial_fraction_numerator
from .tridiag import SubmatrixSpectrum, phase_reduce, submatrix_spectrum

EQ_TOL_BASE = 1e-8
LOCATION_TOL = 1e-8
HALF_PLANE_STRICT_TOL = 1e-12
HALF_PLANE_CLOSED_TOL = 1e-10

REGIMES = (
    "beta-nonreal/an-real",
    "beta-nonreal/an-nonreal",
    "beta-real/an-real",
    "beta-real/an-nonreal",
)


def regime_name(beta_real: bool, an_real: bool) -> str:
    return f"beta-{'real' if beta_real else 'nonreal'}/an-{'real' if an_real else 'nonreal'}"


def equality_tolerance(chi_values, beta: complex, base: float = EQ_TOL_BASE) -> np.ndarray:
    """Per-index threshold ``base * max(1, |chi_k|, 2|beta|)``.

    Each condition compares chi_k against beta only, so its threshold is
    scaled by those two magnitudes and not by the largest chi overall.
    """
    chi = np.abs(np.asarray(chi_values, dtype=complex))
    return base * np.maximum(np.maximum(chi, 2.0 * abs(beta)), 1.0)


def alternating_sign(n: int, k: int) -> int:
    """(-1)^(n-k) for a 1-based index k."""
    return 1 if (n - k) % 2 == 0 else -1


@dataclass(frozen=True, eq=False)
class Residues:
    alpha: np.ndarray
    zero_set: tuple


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    witness: str = ""


@dataclass(frozen=True)
class NecessaryRow:
    k: int
    chi: complex
    sign_margin: float
    modulus_margin: float
    sign_equal: bool
    modulus_equal: bool
    chi_real: bool
    passed: bool


@dataclass(frozen=True, eq=False)
class DirectReport:
    n: int
    lambda_: np.ndarray
    multiplicities: tuple
    mu: np.ndarray
    chi_n_at_mu: np.ndarray
    chi_prime_at_mu: np.ndarray
    alpha: Residues
    beta: complex
    beta_real: bool
    a_n: complex
    an_real: bool
    regime: str
    chi_n: ComplexPolynomial
    chi_n_minus_1: ComplexPolynomial
    tau_eq: np.ndarray
    root_residual: float
    checks: tuple = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_checks(self):
        return [c for c in self.checks if not c.passed]


def residues_alpha(m, s: SubmatrixSpectrum, tol: float = EQ_TOL_BASE) -> Residues:
    """alpha_k = |b_n u_k1 + conj(b_{n-1}) u_{k,n-1}|^2 from eigenvector endpoints."""
    g = validate(m)
    _, phases = phase_reduce(g)
    u1 = phases[0] * s.u_first
    ulast = phases[-1] * s.u_last
    b_n, b_nm1 = g.b[-1], g.b[-2]
    alpha = np.abs(b_n * u1 + np.conj(b_nm1) * ulast) ** 2
    chi_like = alpha * np.abs(s.chi_prime_at_mu)
    tau = equality_tolerance(chi_like, complex(np.prod(g.b)), tol)
    zero = tuple(int(k) for k in np.flatnonzero(chi_like <= tau))
    return Residues(alpha=alpha, zero_set=zero)


def assemble_charpoly(mu, alpha, a_n: complex) -> ComplexPolynomial:
    """chi_n = chi_{n-1} (x - Re a_n) - sum_k alpha_k prod_{j!=k}(x - mu_j) - i Im a_n chi_{n-1}."""
    mu = np.asarray(mu, dtype=float)
    a_n = complex(a_n)
    chi_sub = poly_from_roots(mu)
    real_part = chi_sub * ComplexPolynomial([1.0, -a_n.real]) - partial_fraction_numerator(mu, alpha)
    return real_part - chi_sub * (1j * a_n.imag)


def check_necessary_conditions(chi_n_at_mu, beta, tol: float | None = None,
                               base: float = EQ_TOL_BASE, beta_real: bool | None = None):
    """Evaluate the necessary conditions on chi_n(mu_k) row by row.

    Nonreal beta: ``(-1)^(n-k) chi > 0`` and ``|chi + 2 Re beta| >= 2|beta|``.
    Real beta: ``(-1)^(n-k) chi >= 0`` and ``|chi| >= 4 (-1)^(n-k-1) beta``.
    Equalities are detected within ``tol``, a scalar or one value per k
    (default: :func:`equality_tolerance`).
    """
    if hasattr(beta, "is_real"):
        beta_real = beta.is_real if beta_real is None else beta_real
        beta = beta.value
    beta = complex(beta)
    if beta_real is None:
        beta_real = is_real_number(beta, base)
    chi = np.asarray(chi_n_at_mu, dtype=complex)
    n = chi.size + 1
    if tol is None:
        tol = equality_tolerance(chi, beta, base)
    tols = np.broadcast_to(np.asarray(tol, dtype=float), chi.shape)
    rows = []
    for k in range(1, n):
        c = chi[k - 1]
        tol = float(tols[k - 1])
        x = c.real
        sgn = alternating_sign(n, k)
        sign_margin = sgn * x
        chi_real = abs(c.imag) <= tol
        if beta_real:
            modulus_margin = abs(x) - 4.0 * (-sgn) * beta.real
            sign_ok = sign_margin >= -tol
        else:
            modulus_margin = abs(x + 2.0 * beta.real) - 2.0 * abs(beta)
            sign_ok = sign_margin > tol
        rows.append(NecessaryRow(
            k=k,
            chi=complex(c),
            sign_margin=float(sign_margin),
            modulus_margin=float(modulus_margin),
            sign_equal=bool(abs(sign_margin) <= tol),
            modulus_equal=bool(abs(modulus_margin) <= tol),
            chi_real=bool(chi_real),
            passed=bool(sign_ok and modulus_margin >= -tol and chi_real),
        ))
    return rows


def full_spectrum(m, tol: float = EQ_TOL_BASE) -> DirectReport:
    """Spectrum of ``m`` through the assembled characteristic polynomial, plus all checks."""
    g = validate(m)
    s, _ = submatrix_spectrum(g)
    res = residues_alpha(g, s, tol)
    chi_n = assemble_charpoly(s.mu, res.alpha, g.a_n)
    roots = poly_roots(chi_n)
    chi_at_mu = chi_n(s.mu)
    beta = beta_of(g, tol)
    an_real = is_real_number(g.a_n, tol, max(1.0, abs(g.a_n)))
    report = DirectReport(
        n=g.n,
        lambda_=roots.roots,
        multiplicities=roots.multiplicities,
        mu=s.mu,
        chi_n_at_mu=chi_at_mu,
        chi_prime_at_mu=s.chi_prime_at_mu,
        alpha=res,
        beta=beta.value,
        beta_real=beta.is_real,
        a_n=g.a_n,
        an_real=an_real,
        regime=regime_name(beta.is_real, an_real),
        chi_n=chi_n,
        chi_n_minus_1=poly_from_roots(s.mu),
        tau_eq=equality_tolerance(chi_at_mu, beta.value, tol),
        root_residual=roots.residual,
    )
    return classify_and_verify(report, g)


def _fmt(x) -> str:
    if isinstance(x, complex):
        return f"{x.real:.6g}{x.imag:+.6g}j"
    return f"{x:.6g}"


def _interlacing(report: DirectReport, strict_at, slack: float):
    """Compare sorted real parts of lambda with mu; ``strict_at(k)`` for 1-based k."""
    x = np.sort(report.lambda_.real)
    mu = report.mu
    for k in range(1, report.n):
        lo, mid, hi = x[k - 1], mu[k - 1], x[k]
        if strict_at(k):
            ok = lo < mid < hi
        else:
            ok = lo <= mid + slack and mid <= hi + slack
        if not ok:
            return False, f"k={k}: {lo:.6g} / {mid:.6g} / {hi:.6g}"
    return True, ""


def classify_and_verify(report: DirectReport, m) -> DirectReport:
    g = validate(m)
    n = report.n
    lam = report.lambda_
    mu = report.mu
    chi = report.chi_n_at_mu
    chip = report.chi_prime_at_mu
    tau = report.tau_eq
    beta = report.beta
    loc_scale = max(1.0, float(np.max(np.abs(lam))), float(np.max(np.abs(mu))))
    loc_tol = LOCATION_TOL * loc_scale
    checks = []

    ks = np.arange(1, n)
    expected = np.where((n - ks - 1) % 2 == 0, 1.0, -1.0)
    bad = np.flatnonzero(np.sign(chip) != expected)
    checks.append(Check("submatrix_sign_law", bad.size == 0,
                        "" if bad.size == 0 else f"k={int(bad[0]) + 1}"))

    alpha = report.alpha.alpha
    res_scale = max(1.0, float(np.max(np.abs(chi))), float(np.max(alpha * np.abs(chip))))
    resid = float(np.max(np.abs(alpha * chip + chi)))
    checks.append(Check("residue_consistency", resid <= 1e-9 * res_scale, f"max={resid:.3e}"))

    trace_err = abs(complex(np.sum(lam)) - (sum(g.c) + g.a_n))
    trace_scale = max(1.0, float(np.sum(np.abs(lam))))
    checks.append(Check("trace_identity", trace_err <= 1e-10 * trace_scale, f"err={trace_err:.3e}"))

    checks.append(Check("root_residual", report.root_residual <= 1e-10,
                        f"backward_error={report.root_residual:.3e}"))

    if not report.an_real:
        sub = report.chi_n_minus_1.padded(n)
        imag = report.chi_n.padded(n).imag
        err = float(np.max(np.abs(imag + g.a_n.imag * sub.real)))
        checks.append(Check("imag_part_identity",
                            err <= 1e-10 * max(1.0, abs(g.a_n.imag) * float(np.max(np.abs(sub)))),
                            f"err={err:.3e}"))

    worst_imag = float(np.max(np.abs(chi.imag)))
    checks.append(Check("chi_n_real_at_mu", bool(np.all(np.abs(chi.imag) <= tau)),
                        f"max_imag={worst_imag:.3e}"))

    rows = check_necessary_conditions(chi, beta, tau, beta_real=report.beta_real)
    failing = [r.k for r in rows if not r.passed]
    checks.append(Check("necessary_conditions", not failing,
                        "" if not failing else f"k={failing}"))

    signs = np.array([alternating_sign(n, k) for k in ks])
    sign_margin = signs * chi.real

    if not report.beta_real:
        checks.append(Check("no_zero_residues", not report.alpha.zero_set,
                            "" if not report.alpha.zero_set else f"k={[k + 1 for k in report.alpha.zero_set]}"))
        k_bad = np.flatnonzero(~(sign_margin > 0))
        checks.append(Check("sign_pattern_strict", k_bad.size == 0,
                            "" if k_bad.size == 0 else f"k={int(k_bad[0]) + 1}"))
        if report.an_real:
            worst = float(np.max(np.abs(lam.imag)))
            checks.append(Check("eigenvalues_real", worst <= loc_tol, f"max_imag={worst:.3e}"))
            ok, w = _interlacing(report, lambda k: True, 0.0)
            checks.append(Check("strict_interlacing", ok, w))
        else:
            side = np.sign(g.a_n.imag)
            worst = float(np.min(side * lam.imag))
            checks.append(Check("open_half_plane",
                                worst > HALF_PLANE_STRICT_TOL * loc_scale,
                                f"min_signed_imag={worst:.3e}"))
    else:
        beta_r = beta.real
        strict = (-signs * beta_r) > 0
        ok_pattern = np.where(strict, sign_margin > 0, sign_margin >= -tau)
        k_bad = np.flatnonzero(~ok_pattern)
        checks.append(Check("sign_pattern_real_beta", k_bad.size == 0,
                            "" if k_bad.size == 0 else f"k={int(k_bad[0]) + 1}"))
        if report.an_real:
            worst = float(np.max(np.abs(lam.imag)))
            checks.append(Check("eigenvalues_real", worst <= loc_tol, f"max_imag={worst:.3e}"))
            ok, w = _interlacing(report, lambda k: bool(strict[k - 1]), loc_tol)
            checks.append(Check("weak_interlacing", ok, w))
            mult_ok, w = True, ""
            for z, mlt in _distinct_with_multiplicity(lam, loc_tol):
                if mlt > 2:
                    mult_ok, w = False, f"{_fmt(z)} has multiplicity {mlt}"
                    break
                if mlt == 2 and np.min(np.abs(mu - z.real)) > loc_tol:
                    mult_ok, w = False, f"double eigenvalue {_fmt(z)} is not in the submatrix spectrum"
                    break
            checks.append(Check("multiplicity_at_most_two", mult_ok, w))
        else:
            side = np.sign(g.a_n.imag)
            worst = float(np.min(side * lam.imag))
            checks.append(Check("closed_half_plane",
                                worst >= -HALF_PLANE_CLOSED_TOL * loc_scale,
                                f"min_signed_imag={worst:.3e}"))
            ok, w = True, ""
            for z in lam[np.abs(lam.imag) <= loc_tol]:
                if np.min(np.abs(mu - z.real)) > loc_tol:
                    ok, w = False, f"real eigenvalue {_fmt(complex(z))} is not in the submatrix spectrum"
                    break
            checks.append(Check("real_eigenvalues_in_submatrix_spectrum", ok, w))

    return replace(report, checks=tuple(checks))


def _distinct_with_multiplicity(values, tol):
    vals = sorted((complex(v) for v in values), key=lambda z: (z.real, z.imag))
    out = []
    for z in vals:
        if out and abs(out[-1][0] - z) <= tol:
            out[-1] = (out[-1][0], out[-1][1] + 1)
        else:
            out.append((z, 1))
    return out
