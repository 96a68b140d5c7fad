"""Periodic-Jacobi-type matrix classes and their elementary operations.

Layout of a general member of size n (1-based)::

    (k, k)   = c_k          k < n       (n, n)   = a_n
    (k, k+1) = b_k          (k+1, k) = conj(b_k)       k < n
    (1, n)   = conj(b_n)    (n, 1)   = b_n

The hat subclass has real couplings b_1..b_{n-1}; only the corner coupling
``b_hat_n`` and the bottom-right entry ``a_hat_n`` may be complex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidMatrix, OracleOverflow
from .poly import ComplexPolynomial

MIN_SIZE = 3
ORACLE_MAX_SIZE = 64
REAL_TOL = 1e-8


def _finite(x) -> bool:
    return math.isfinite(x.real) and math.isfinite(x.imag)


@dataclass(frozen=True)
class PeriodicMatrixGeneral:
    c: tuple
    b: tuple
    a_n: complex

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(x) for x in np.ravel(self.c)))
        object.__setattr__(self, "b", tuple(complex(x) for x in np.ravel(self.b)))
        object.__setattr__(self, "a_n", complex(self.a_n))

    @property
    def n(self) -> int:
        return len(self.b)

    def dense(self) -> np.ndarray:
        return _dense(self.c, self.b, self.a_n)

    def leading_submatrix(self) -> np.ndarray:
        return self.dense()[:-1, :-1]


@dataclass(frozen=True)
class PeriodicMatrixHat:
    c_hat: tuple
    b_hat: tuple
    b_hat_n: complex
    a_hat_n: complex

    def __post_init__(self):
        object.__setattr__(self, "c_hat", tuple(float(x) for x in np.ravel(self.c_hat)))
        object.__setattr__(self, "b_hat", tuple(float(x) for x in np.ravel(self.b_hat)))
        object.__setattr__(self, "b_hat_n", complex(self.b_hat_n))
        object.__setattr__(self, "a_hat_n", complex(self.a_hat_n))

    @property
    def n(self) -> int:
        return len(self.b_hat) + 1

    def to_general(self) -> PeriodicMatrixGeneral:
        return PeriodicMatrixGeneral(self.c_hat, self.b_hat + (self.b_hat_n,), self.a_hat_n)

    def dense(self) -> np.ndarray:
        return _dense(self.c_hat, self.b_hat + (self.b_hat_n,), self.a_hat_n)


@dataclass(frozen=True)
class Beta:
    value: complex
    is_real: bool


def _dense(c, b, a_n) -> np.ndarray:
    n = len(b)
    A = np.zeros((n, n), dtype=complex)
    A[np.arange(n - 1), np.arange(n - 1)] = c
    A[n - 1, n - 1] = a_n
    for k in range(n - 1):
        A[k, k + 1] = b[k]
        A[k + 1, k] = np.conj(b[k])
    A[0, n - 1] = np.conj(b[n - 1])
    A[n - 1, 0] = b[n - 1]
    return A


def as_general(m) -> PeriodicMatrixGeneral:
    if isinstance(m, PeriodicMatrixHat):
        return m.to_general()
    if isinstance(m, PeriodicMatrixGeneral):
        return m
    raise TypeError(f"expected a periodic matrix, got {type(m).__name__}")


def validate_general(m: PeriodicMatrixGeneral) -> None:
    n = m.n
    if n < MIN_SIZE:
        raise InvalidMatrix(f"size {n} is below the minimum {MIN_SIZE}", "n")
    if len(m.c) != n - 1:
        raise InvalidMatrix(f"expected {n - 1} diagonal entries, got {len(m.c)}", "c")
    for k, x in enumerate(m.c):
        if not math.isfinite(x):
            raise InvalidMatrix("non-finite entry", f"c[{k}]")
    for k, x in enumerate(m.b):
        if not _finite(x):
            raise InvalidMatrix("non-finite entry", f"b[{k}]")
        if x == 0:
            raise InvalidMatrix("zero coupling", f"b[{k}]")
    if not _finite(m.a_n):
        raise InvalidMatrix("non-finite entry", "a_n")


def validate_hat(m: PeriodicMatrixHat) -> None:
    n = m.n
    if n < MIN_SIZE:
        raise InvalidMatrix(f"size {n} is below the minimum {MIN_SIZE}", "n")
    if len(m.c_hat) != n - 1:
        raise InvalidMatrix(f"expected {n - 1} diagonal entries, got {len(m.c_hat)}", "c_hat")
    for name, seq in (("c_hat", m.c_hat), ("b_hat", m.b_hat)):
        for k, x in enumerate(seq):
            if not math.isfinite(x):
                raise InvalidMatrix("non-finite entry", f"{name}[{k}]")
    for k, x in enumerate(m.b_hat):
        if x == 0:
            raise InvalidMatrix("zero coupling", f"b_hat[{k}]")
    if not _finite(m.b_hat_n):
        raise InvalidMatrix("non-finite entry", "b_hat_n")
    if m.b_hat_n == 0:
        raise InvalidMatrix("zero coupling", "b_hat_n")
    if not _finite(m.a_hat_n):
        raise InvalidMatrix("non-finite entry", "a_hat_n")


def validate(m) -> PeriodicMatrixGeneral:
    """Validate either class and return the general view of ``m``."""
    if isinstance(m, PeriodicMatrixHat):
        validate_hat(m)
        return m.to_general()
    validate_general(m)
    return m


def is_real_number(z: complex, tol: float = REAL_TOL, scale: float | None = None) -> bool:
    ref = abs(z) if scale is None else scale
    return abs(complex(z).imag) <= tol * ref


def beta_of(m, tol: float = REAL_TOL) -> Beta:
    g = validate(m)
    value = complex(np.prod(np.asarray(g.b, dtype=complex)))
    return Beta(value=value, is_real=is_real_number(value, tol))


def canonicalize(m) -> PeriodicMatrixHat:
    """Member of the hat class with the same spectra and the same beta.

    Couplings become ``|b_k|`` and the corner absorbs the phases:
    ``b_hat_n = b_n * exp(i sum arg b_k)``, which equals ``beta / prod|b_k|``.
    Positive couplings have argument exactly 0, so canonical input comes
    back bit-for-bit unchanged.
    """
    g = validate(m)
    b = np.asarray(g.b, dtype=complex)
    mods = np.abs(b[:-1])
    total = float(np.sum(np.angle(b[:-1])))
    phase = 1.0 if total == 0.0 else complex(np.exp(1j * total))
    return PeriodicMatrixHat(
        c_hat=g.c,
        b_hat=tuple(float(x) for x in mods),
        b_hat_n=b[-1] * phase,
        a_hat_n=g.a_n,
    )


def faddeev_leverrier(A: np.ndarray) -> ComplexPolynomial:
    """Characteristic polynomial det(x I - A) by the trace recursion."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    M = np.zeros_like(A)
    eye = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        # Overflow is detected below and reported as OracleOverflow.
        with np.errstate(over="ignore", invalid="ignore"):
            M = A @ M + coeffs[k - 1] * eye
            AM = A @ M
            coeffs[k] = -np.trace(AM) / k
        if not np.all(np.isfinite(AM)) or np.max(np.abs(AM)) > 1e300 or abs(coeffs[k]) > 1e300:
            raise OracleOverflow(f"intermediate magnitude exceeded 1e300 at step {k}")
    return ComplexPolynomial(coeffs)


def charpoly_oracle(m) -> ComplexPolynomial:
    g = validate(m)
    if g.n > ORACLE_MAX_SIZE:
        raise ValueError(f"oracle limited to n <= {ORACLE_MAX_SIZE}")
    return faddeev_leverrier(g.dense())
