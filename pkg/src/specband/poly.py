"""Dense complex polynomials.

Coefficients are stored highest degree first, as in ``numpy.polyval``.
Root finding uses the Aberth-Ehrlich simultaneous iteration; no eigenvalue
library is involved, so the companion-matrix route in ``numpy.roots`` stays
available as an independent check in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidMeasure, NonConvergence

_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class ComplexPolynomial:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        nz = np.flatnonzero(c)
        c = c[nz[0]:] if nz.size else c[-1:]
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[0])

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, z):
        return np.polyval(self.coeffs, z)

    def derivative(self) -> ComplexPolynomial:
        if self.degree == 0:
            return ComplexPolynomial([0.0])
        powers = np.arange(self.degree, 0, -1)
        return ComplexPolynomial(self.coeffs[:-1] * powers)

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def padded(self, degree: int) -> np.ndarray:
        """Coefficients left-padded with zeros to length ``degree + 1``."""
        out = np.zeros(degree + 1, dtype=complex)
        out[degree - self.degree:] = self.coeffs
        return out

    def __add__(self, other):
        other = _as_poly(other)
        d = max(self.degree, other.degree)
        return ComplexPolynomial(self.padded(d) + other.padded(d))

    __radd__ = __add__

    def __neg__(self):
        return ComplexPolynomial(-self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return ComplexPolynomial(self.coeffs * other)
        return ComplexPolynomial(np.convolve(self.coeffs, _as_poly(other).coeffs))

    __rmul__ = __mul__

    def real_part(self) -> ComplexPolynomial:
        return ComplexPolynomial(self.coeffs.real)

    def imag_part(self) -> ComplexPolynomial:
        return ComplexPolynomial(self.coeffs.imag)

    def allclose(self, other, rtol=1e-9) -> bool:
        other = _as_poly(other)
        d = max(self.degree, other.degree)
        a, b = self.padded(d), other.padded(d)
        return bool(np.max(np.abs(a - b)) <= rtol * max(self.scale(), other.scale(), 1e-300))

    def __repr__(self):
        return f"ComplexPolynomial({np.array2string(self.coeffs, precision=6)})"


def _as_poly(x) -> ComplexPolynomial:
    if isinstance(x, ComplexPolynomial):
        return x
    return ComplexPolynomial(np.atleast_1d(np.asarray(x, dtype=complex)))


@dataclass(frozen=True, eq=False)
class RootSet:
    """Roots with multiplicity, sorted by (real part, imaginary part).

    ``residual`` is the worst relative backward error
    ``|p(z)| / sum_i |c_i| |z|^i`` over the returned roots and
    ``multiplicities[i]`` is the size of the cluster ``roots[i]`` belongs to.
    """

    roots: np.ndarray
    residual: float
    multiplicities: tuple
    iterations: int = 0

    def __len__(self):
        return self.roots.size

    def distinct(self):
        """Pairs ``(root, multiplicity)`` with each cluster reported once."""
        out = []
        i = 0
        while i < self.roots.size:
            mult = self.multiplicities[i]
            out.append((complex(self.roots[i]), mult))
            i += mult
        return out


def poly_from_roots(roots: Sequence[complex]) -> ComplexPolynomial:
    """Monic polynomial with the given roots (the constant 1 for no roots)."""
    c = np.array([1.0 + 0j])
    for r in np.asarray(roots, dtype=complex).ravel():
        c = np.convolve(c, np.array([1.0, -r]))
    return ComplexPolynomial(c)


def _horner2(coeffs: np.ndarray, z: np.ndarray):
    p = np.full(np.shape(z), coeffs[0], dtype=complex)
    dp = np.zeros(np.shape(z), dtype=complex)
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def poly_eval(p: ComplexPolynomial, z):
    """Value and first derivative of ``p`` at ``z`` by one Horner sweep."""
    value, deriv = _horner2(p.coeffs, np.asarray(z, dtype=complex))
    if np.ndim(z) == 0:
        return complex(value), complex(deriv)
    return value, deriv


def backward_error(p: ComplexPolynomial, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    num = np.abs(np.polyval(p.coeffs, z))
    den = np.polyval(np.abs(p.coeffs), np.abs(z))
    return num / np.maximum(den, np.finfo(float).tiny)


def _initial_guesses(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.size - 1
    radius = 1.0 + np.max(np.abs(coeffs[1:] / coeffs[0]))
    # Fixed seed per degree keeps the output deterministic.
    rng = np.random.default_rng(1000 + n)
    angles = 2.0 * np.pi * np.arange(n) / n + 0.4 + 0.25 * rng.uniform(-1.0, 1.0, n) / n
    return radius * np.exp(1j * angles)


def _aberth(coeffs: np.ndarray, max_iter: int):
    n = coeffs.size - 1
    z = _initial_guesses(coeffs)
    abs_coeffs = np.abs(coeffs)
    active = np.ones(n, dtype=bool)
    it = 0
    for it in range(1, max_iter + 1):
        p, dp = _horner2(coeffs, z)
        bwd = np.abs(p) / np.maximum(np.polyval(abs_coeffs, np.abs(z)), np.finfo(float).tiny)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            repulsion = np.sum(1.0 / diff, axis=1)
            step = ratio / (1.0 - ratio * repulsion)
        bad = ~np.isfinite(step)
        if np.any(bad):
            # Stationary point of p or collided iterates: nudge off it.
            step[bad] = 1e-3 * (1.0 + np.abs(z[bad])) * np.exp(1j * (it + np.arange(bad.sum())))
        step[~active] = 0.0
        z = z - step
        done = (np.abs(step) <= 4.0 * _EPS * np.abs(z)) | (bwd <= 2.0 * _EPS)
        # A root whose backward error is already at roundoff gets one more
        # correction (above) and is then frozen.
        active &= ~done
        if not active.any():
            break
    return z, it


def _cluster(z: np.ndarray, radius: float):
    """Average roots closer than ``radius``; returns (roots, multiplicities)."""
    n = z.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) <= radius:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = np.empty(n, dtype=complex)
    mult = np.empty(n, dtype=int)
    for members in groups.values():
        out[members] = np.mean(z[members])
        mult[members] = len(members)
    return out, mult


def _polish_clusters(p: ComplexPolynomial, z, mult, radius):
    # A root of multiplicity m is a simple root of the (m-1)-th derivative.
    z = z.copy()
    derivs = {}
    for i in np.flatnonzero(mult > 1):
        m = int(mult[i])
        if m not in derivs:
            q = p
            for _ in range(m - 1):
                q = q.derivative()
            derivs[m] = (q, q.derivative())
        q, dq = derivs[m]
        x = z[i]
        for _ in range(8):
            dqx = dq(x)
            if dqx == 0:
                break
            nxt = x - q(x) / dqx
            if abs(nxt - z[i]) > radius or abs(nxt - x) <= 2 * _EPS * abs(nxt):
                x = nxt if abs(nxt - z[i]) <= radius else x
                break
            x = nxt
        z[i] = x
    return z


def poly_roots(p: ComplexPolynomial, tol: float = 1e-10, max_iter: int = 200,
               cluster_tol: float = 1e-6) -> RootSet:
    """All roots of ``p`` with multiplicity.

    Raises NonConvergence when the iteration cap is hit and the worst
    relative backward error still exceeds ``tol``.
    """
    if p.degree < 1:
        raise ValueError("poly_roots needs degree >= 1")
    coeffs = p.coeffs / p.coeffs[0]
    n = p.degree
    nzero = 0
    while coeffs[-1 - nzero] == 0 and nzero < n:
        nzero += 1
    work = coeffs[: coeffs.size - nzero]
    if work.size == 2:
        z, it = np.array([-work[1]]), 0
    elif work.size > 2:
        z, it = _aberth(work, max_iter)
    else:
        z, it = np.empty(0, dtype=complex), 0
    z = np.concatenate([z, np.zeros(nzero, dtype=complex)])

    residual = float(np.max(backward_error(p, z))) if z.size else 0.0
    if not residual <= tol:
        raise NonConvergence(
            f"root finder stopped after {it} iterations with backward error {residual:.3e}"
        )
    scale = max(1.0, float(np.max(np.abs(z))))
    z, mult = _cluster(z, cluster_tol * scale)
    z = _polish_clusters(p, z, mult, cluster_tol * scale)
    order = np.lexsort((z.imag, z.real))
    z, mult = z[order], mult[order]
    z.setflags(write=False)
    residual = float(np.max(backward_error(p, z)))
    return RootSet(roots=z, residual=residual, multiplicities=tuple(int(m) for m in mult),
                   iterations=it)


def numerator_from_partial_fractions(nodes: Sequence[float], weights: Sequence[float]) -> ComplexPolynomial:
    """Polynomial ``psi`` with ``psi / prod(x - nodes) == sum w_k / (x - nodes_k)``."""
    nodes = np.asarray(nodes, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    if nodes.size != weights.size or nodes.size == 0:
        raise InvalidMeasure("nodes and weights must be non-empty and of equal length")
    if np.any(np.diff(nodes) <= 0):
        raise InvalidMeasure("nodes must be strictly increasing")
    if np.any(~(weights > 0)):
        raise InvalidMeasure("weights must be positive")
    return partial_fraction_numerator(nodes, weights)


def leave_one_out_products(nodes) -> np.ndarray:
    """Row k holds the coefficients of ``prod_{j != k} (x - nodes_j)``.

    Built from prefix and suffix products, so each row is a plain product
    of linear factors (no division by a root).
    """
    nodes = np.asarray(nodes, dtype=complex).ravel()
    n = nodes.size
    prefix = [np.array([1.0 + 0j])]
    for r in nodes[:-1]:
        prefix.append(np.convolve(prefix[-1], np.array([1.0, -r])))
    suffix = [np.array([1.0 + 0j])]
    for r in nodes[:0:-1]:
        suffix.append(np.convolve(suffix[-1], np.array([1.0, -r])))
    out = np.empty((n, n), dtype=complex)
    for k in range(n):
        out[k] = np.convolve(prefix[k], suffix[n - 1 - k])
    return out


def partial_fraction_numerator(nodes, weights) -> ComplexPolynomial:
    """``sum_k w_k prod_{j != k} (x - nodes_j)`` without validating the inputs."""
    weights = np.asarray(weights, dtype=complex).ravel()
    return ComplexPolynomial(weights @ leave_one_out_products(nodes))
