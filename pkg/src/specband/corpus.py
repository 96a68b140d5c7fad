"""Seeded random instances and constructed spectral-data fixtures."""

from __future__ import annotations

import numpy as np

from .direct import REGIMES, alternating_sign
from .inverse import SpectralData
from .matrices import PeriodicMatrixGeneral, PeriodicMatrixHat
from .poly import ComplexPolynomial, partial_fraction_numerator, poly_from_roots, poly_roots


def _beta_phase(rng, beta_real: bool) -> complex:
    if beta_real:
        return complex(rng.choice([-1.0, 1.0]))
    # Keep arg(beta) well away from the real axis.
    angle = rng.uniform(0.3, np.pi - 0.3) * rng.choice([-1.0, 1.0])
    return complex(np.exp(1j * angle))


def _a_n(rng, an_real: bool) -> complex:
    re = rng.uniform(-2.0, 2.0)
    if an_real:
        return complex(re)
    return complex(re, rng.uniform(0.2, 2.0) * rng.choice([-1.0, 1.0]))


def random_hat(rng, n: int, regime: str) -> PeriodicMatrixHat:
    """Hat-class matrix with positive couplings b_1..b_{n-1} in the given regime."""
    beta_real = regime.startswith("beta-real")
    an_real = regime.endswith("an-real")
    return PeriodicMatrixHat(
        c_hat=rng.uniform(-2.0, 2.0, n - 1),
        b_hat=rng.uniform(0.5, 1.5, n - 1),
        b_hat_n=rng.uniform(0.5, 1.5) * _beta_phase(rng, beta_real),
        a_hat_n=_a_n(rng, an_real),
    )


def random_general(rng, n: int, regime: str) -> PeriodicMatrixGeneral:
    """General-class matrix whose couplings carry arbitrary phases."""
    beta_real = regime.startswith("beta-real")
    an_real = regime.endswith("an-real")
    mods = rng.uniform(0.5, 1.5, n)
    phases = np.exp(1j * rng.uniform(-np.pi, np.pi, n - 1))
    b = np.empty(n, dtype=complex)
    b[:-1] = mods[:-1] * phases
    # Fix the corner phase so that arg(beta) lands where the regime wants it.
    target = _beta_phase(rng, beta_real)
    b[-1] = mods[-1] * target / np.prod(phases)
    return PeriodicMatrixGeneral(c=rng.uniform(-2.0, 2.0, n - 1), b=b, a_n=_a_n(rng, an_real))


def corpus(seed: int, count: int, sizes=range(3, 13), kind: str = "hat"):
    """``count`` matrices cycling through all four regimes and the given sizes."""
    rng = np.random.default_rng(seed)
    sizes = list(sizes)
    make = random_hat if kind == "hat" else random_general
    out = []
    for i in range(count):
        regime = REGIMES[i % len(REGIMES)]
        n = sizes[(i // len(REGIMES)) % len(sizes)]
        out.append(make(rng, n, regime))
    return out


def data_from_chi_values(mu, chi_values, beta: complex, a_hat: complex) -> SpectralData:
    """Spectral data whose chi_n takes prescribed values at the nodes mu.

    ``chi_n = (x - a_hat) chi_{n-1} + L`` where ``L`` is the degree n-2
    Lagrange interpolant of ``chi_values`` at ``mu``; the trace then forces
    ``a_hat = sum(lambda) - sum(mu)``.
    """
    mu = np.asarray(mu, dtype=float)
    chi_values = np.asarray(chi_values, dtype=float)
    chi_sub = poly_from_roots(mu)
    dprime = np.array([np.prod(mu[k] - np.delete(mu, k)) for k in range(mu.size)])
    lagrange = partial_fraction_numerator(mu, chi_values / dprime)
    chi_n = chi_sub * ComplexPolynomial([1.0, -complex(a_hat)]) + lagrange
    lam = poly_roots(chi_n).roots
    if complex(a_hat).imag == 0:
        lam = lam.real
    return SpectralData(lam, mu, beta)


def degenerate_chi_values(n: int, beta: complex, equal_at, slack=1.0, rng=None):
    """chi_n(mu_k) values that are feasible with equality exactly at ``equal_at``.

    Indices are 1-based. For nonreal beta the modulus condition is made
    tight; for real beta the tight condition is whichever one can be.
    """
    beta = complex(beta)
    out = []
    for k in range(1, n):
        sgn = alternating_sign(n, k)
        extra = 0.0 if k in equal_at else slack * (1.0 + (rng.uniform() if rng is not None else 0.0))
        if beta.imag != 0:
            out.append(sgn * (2.0 * abs(beta) + extra) - 2.0 * beta.real)
        elif -sgn * beta.real > 0:
            # |chi| >= 4 (-1)^(n-k-1) beta is the binding condition here.
            out.append(sgn * (4.0 * abs(beta) + extra))
        else:
            # chi = 0 is allowed here.
            out.append(sgn * extra)
    return np.array(out)
