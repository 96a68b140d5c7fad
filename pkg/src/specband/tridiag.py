"""Spectral decomposition of the Hermitian tridiagonal leading block.

The block is first made real by a diagonal unitary similarity, then
diagonalized by implicit-shift QL. A Sturm-count bisection routine lives
here too; it shares no code with the QL path and serves as its oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence
from .matrices import validate

_EPS = np.finfo(float).eps
CLUSTER_TOL = 1e-10


@dataclass(frozen=True)
class RealTridiag:
    diag: tuple
    offdiag: tuple

    def __post_init__(self):
        d = tuple(float(x) for x in np.ravel(self.diag))
        e = tuple(float(x) for x in np.ravel(self.offdiag))
        if len(d) == 0 or len(e) != len(d) - 1:
            raise ValueError("need m diagonal and m-1 off-diagonal entries")
        if any(not x > 0 for x in e):
            raise ValueError("off-diagonal entries must be positive (unreduced)")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def size(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        e = np.asarray(self.offdiag)
        return np.diag(self.diag) + np.diag(e, 1) + np.diag(e, -1)

    def norm(self) -> float:
        """Max absolute row sum, an upper bound for the spectral radius."""
        return float(np.max(np.sum(np.abs(self.dense()), axis=1)))


@dataclass(frozen=True, eq=False)
class SubmatrixSpectrum:
    """Eigenvalues of the leading block and the endpoint eigenvector entries.

    ``u_first`` and ``u_last`` are the first and last components of the
    orthonormal eigenvectors of the *real* reduced matrix, each vector
    scaled so its first component is positive. Multiply by the reduction
    phases to get the entries of the complex block's eigenvectors.
    """

    mu: np.ndarray
    u_first: np.ndarray
    u_last: np.ndarray
    chi_prime_at_mu: np.ndarray


def phase_reduce(m):
    """Diagonal unitary D with ``D* J_{n-1} D`` real symmetric tridiagonal.

    Returns the reduced matrix and the diagonal of D; ``d_1 = 1`` and
    ``d_{k+1} = d_k |b_k| / b_k``.
    """
    g = validate(m)
    b = np.asarray(g.b[:-2], dtype=complex)
    phases = np.ones(g.n - 1, dtype=complex)
    for k, bk in enumerate(b):
        phases[k + 1] = phases[k] * abs(bk) / bk
    return RealTridiag(g.c, np.abs(b)), phases


def tql_eigh(diag, offdiag, max_iter: int = 60):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns).

    Implicit QL with a Wilkinson-type shift taken from the leading 2x2 block
    of the active window, rotations accumulated into the identity.
    """
    d = np.array(diag, dtype=float)
    n = d.size
    e = np.zeros(n)
    e[: n - 1] = offdiag
    z = np.eye(n)
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise NonConvergence(f"QL iteration did not converge for eigenvalue {l}")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * zi1
                z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    order = np.argsort(d, kind="stable")
    return d[order], z[:, order]


def eig_endpoints(t: RealTridiag) -> SubmatrixSpectrum:
    mu, vecs = tql_eigh(t.diag, t.offdiag)
    scale = max(t.norm(), np.finfo(float).tiny)
    gaps = np.diff(mu)
    if gaps.size and np.min(gaps) < CLUSTER_TOL * scale:
        k = int(np.argmin(gaps))
        raise NonConvergence(
            f"eigenvalues {k} and {k + 1} agree to {gaps[k]:.3e}; an unreduced "
            "tridiagonal matrix has a simple spectrum"
        )
    first = vecs[0, :].copy()
    if np.any(first == 0):
        raise NonConvergence("eigenvector with vanishing first component")
    sign = np.sign(first)
    vecs = vecs * sign
    chi_prime = np.array([np.prod(mu[k] - np.delete(mu, k)) for k in range(mu.size)])
    return SubmatrixSpectrum(
        mu=mu,
        u_first=vecs[0, :].copy(),
        u_last=vecs[-1, :].copy(),
        chi_prime_at_mu=chi_prime,
    )


def submatrix_spectrum(m) -> tuple[SubmatrixSpectrum, np.ndarray]:
    """Reduce and diagonalize the leading block of ``m``; also return phases."""
    t, phases = phase_reduce(m)
    return eig_endpoints(t), phases


def sturm_count(diag, offdiag, x: float) -> int:
    """Number of eigenvalues strictly below ``x`` (LDL^T inertia count)."""
    count = 0
    q = 1.0
    tiny = np.finfo(float).tiny
    for k, dk in enumerate(diag):
        off2 = offdiag[k - 1] ** 2 if k else 0.0
        q = dk - x - (off2 / q if k else 0.0)
        if q == 0.0:
            q = -tiny
        if q < 0:
            count += 1
    return count


def bisect_eigenvalues(diag, offdiag) -> np.ndarray:
    """All eigenvalues by Sturm bisection to (near) full precision."""
    d = np.asarray(diag, dtype=float)
    e = np.abs(np.asarray(offdiag, dtype=float))
    radius = np.zeros_like(d)
    radius[:-1] += e
    radius[1:] += e
    lo0, hi0 = float(np.min(d - radius)), float(np.max(d + radius))
    span = max(hi0 - lo0, abs(lo0), abs(hi0), 1.0)
    lo0 -= _EPS * span
    hi0 += _EPS * span
    out = np.empty(d.size)
    for k in range(d.size):
        lo, hi = lo0, hi0
        while hi - lo > 2.0 * _EPS * max(abs(lo), abs(hi), _EPS * span):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if sturm_count(d, e, mid) > k:
                hi = mid
            else:
                lo = mid
        out[k] = 0.5 * (lo + hi)
    return out


def inverse_iteration(diag, offdiag, shift: float, iters: int = 3) -> np.ndarray:
    """Unit eigenvector for the eigenvalue nearest ``shift``."""
    T = np.diag(diag) + np.diag(offdiag, 1) + np.diag(offdiag, -1)
    n = T.shape[0]
    perturbed = shift + 1e2 * _EPS * max(1.0, abs(shift))
    v = np.ones(n) / math.sqrt(n)
    for _ in range(iters):
        v = np.linalg.solve(T - perturbed * np.eye(n), v)
        v /= np.linalg.norm(v)
    return v * np.sign(v[0])
