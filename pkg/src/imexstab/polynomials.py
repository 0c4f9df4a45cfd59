"""Small polynomial helpers.

Coefficient arrays are stored in ascending degree order throughout the
package: ``coeffs[j]`` multiplies ``z**j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy.linalg import matrix_balance


def trim(coeffs, tol: float = 0.0) -> np.ndarray:
    """Drop trailing (highest-degree) coefficients with magnitude <= tol."""
    c = np.atleast_1d(np.asarray(coeffs))
    n = len(c)
    while n > 1 and abs(c[n - 1]) <= tol:
        n -= 1
    return c[:n]


def polyval(coeffs, z):
    """Horner evaluation of an ascending coefficient array at ``z``."""
    z = np.asarray(z)
    out = np.zeros_like(z, dtype=np.result_type(np.asarray(coeffs), z, float))
    for c in reversed(np.asarray(coeffs)):
        out = out * z + c
    return out


def companion(coeffs) -> np.ndarray:
    """Frobenius companion matrix of a polynomial with nonzero leading term."""
    c = trim(coeffs)
    n = len(c) - 1
    if n < 1:
        return np.zeros((0, 0), dtype=c.dtype)
    C = np.zeros((n, n), dtype=np.result_type(c, float))
    C[1:, :-1] = np.eye(n - 1)
    C[:, -1] = -c[:-1] / c[-1]
    return C


def roots(coeffs, tol: float = 0.0) -> np.ndarray:
    """All roots of the polynomial, from the balanced companion matrix.

    Leading coefficients with magnitude <= ``tol`` are treated as zero, so the
    returned array can be shorter than the nominal degree.
    """
    c = trim(coeffs, tol)
    if len(c) <= 1:
        return np.zeros(0, dtype=complex)
    C = companion(c)
    Cb, _ = matrix_balance(C, permute=False)
    return np.linalg.eigvals(Cb).astype(complex)


def polish(coeffs, rts, iters: int = 4) -> np.ndarray:
    """Newton refinement of approximate roots; a step is kept only if |p| drops."""
    c = np.asarray(coeffs, dtype=complex)
    dc = c[1:] * np.arange(1, len(c))
    z = np.array(rts, dtype=complex)
    for _ in range(iters):
        pz, dz = polyval(c, z), polyval(dc, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = z - pz / dz
        better = np.isfinite(cand) & (np.abs(polyval(c, cand)) < np.abs(pz))
        z = np.where(better, cand, z)
    return z


def from_roots(rts) -> np.ndarray:
    """Monic polynomial with the given roots (ascending order)."""
    c = np.array([1.0 + 0j])
    for rt in rts:
        c = np.concatenate([[0], c]) - rt * np.concatenate([c, [0]])
    return c


def shift_to_one(coeffs) -> list:
    """Rewrite p(z) = sum c_j z^j as sum d_i (z - 1)^i.

    Works for float, complex or ``Fraction`` entries (repeated synthetic
    division, i.e. Taylor shift by Horner steps).
    """
    d = list(coeffs)
    n = len(d)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            d[j] = d[j] + d[j + 1]
    return d


def shift_from_one(coeffs) -> list:
    """Inverse of :func:`shift_to_one`: expand sum d_i (z - 1)^i in powers of z."""
    d = list(coeffs)
    n = len(d)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            d[j] = d[j] - d[j + 1]
    return d


def log_series(order: int) -> list[Fraction]:
    """Coefficients of ln z = sum_{m>=1} (-1)^(m+1) w^m / m in w = z - 1."""
    return [Fraction(0)] + [Fraction((-1) ** (m + 1), m) for m in range(1, order + 1)]


def binomial_shifted(delta, r: int) -> list:
    """Coefficients of (w + delta)^r in powers of w."""
    return [comb(r, i) * delta ** (r - i) for i in range(r + 1)]


def truncated_product(p, q, degree: int) -> list:
    out = [p[0] * 0 for _ in range(degree + 1)]
    for i, pi in enumerate(p):
        if i > degree:
            break
        for j, qj in enumerate(q):
            if i + j > degree:
                break
            out[i + j] = out[i + j] + pi * qj
    return out


@dataclass(frozen=True)
class ComplexPolynomial:
    coeffs: np.ndarray

    def __post_init__(self):
        c = trim(np.asarray(self.coeffs, dtype=complex))
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return polyval(self.coeffs, z)

    def roots(self) -> np.ndarray:
        return roots(self.coeffs)
