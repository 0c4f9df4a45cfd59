"""Construction and validation of ImEx linear multistep coefficient sets.

A scheme is stored as three ascending coefficient vectors ``a``, ``b``, ``c``
of the polynomials a(z), b(z), c(z), all of length r + 1, for the recursion

    (1/k) sum a_j u_{n+j} = sum (c_j A u_{n+j} + b_j B u_{n+j} + b_j f_{n+j}).

c is normalized monic and b_r = 0 (explicit in B).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from . import polynomials as P

MAX_ORDER = 5

ZERO_STABILITY_TOL = 1e-9
ROOT_CLUSTER_TOL = 1e-7


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class ImExScheme:
    r: int
    s: int
    delta: float | None
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    # (a, b, c) in powers of w = z - 1, when known more accurately than a float shift
    shifted: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = np.array(getattr(self, name), dtype=float)
            if v.shape != (self.s + 1,):
                raise SchemeError(f"{name} must have length s + 1 = {self.s + 1}")
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        if self.b[-1] != 0.0:
            raise SchemeError("b_s must be exactly zero (explicit in B)")
        if self.a[-1] == 0.0 or self.c[-1] == 0.0:
            raise SchemeError("a_s and c_s must be nonzero (implicit in A)")

    @property
    def is_delta_family(self) -> bool:
        return self.delta is not None

    def shifted_coefficients(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(a, b, c) expanded in powers of z - 1.

        Roots of interest cluster near z = 1 for small delta; working in
        w = z - 1 keeps them well separated relative to their size.
        """
        if self.shifted is not None:
            return self.shifted
        if self.is_delta_family and self.s == self.r:
            return _family_shifted(self.r, self.delta)
        return tuple(np.array(P.shift_to_one([float(x) for x in v])) for v in (self.a, self.b, self.c))

    def a_poly(self, z):
        return P.polyval(self.a, z)

    def b_poly(self, z):
        return P.polyval(self.b, z)

    def c_poly(self, z):
        return P.polyval(self.c, z)

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "s": self.s,
            "delta": self.delta,
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
        }


@dataclass(frozen=True)
class ErrorConstants:
    C_I: float
    C_E: float
    R_I: float
    R_E: float


def _check_order_delta(r, delta):
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= MAX_ORDER:
        raise SchemeError(f"order r must be an integer in 1..{MAX_ORDER}, got {r!r}")
    if not (0.0 < delta <= 1.0):
        raise SchemeError(f"delta must lie in (0, 1], got {delta!r}")


def _taylor_a(c_shifted, r):
    # degree-r Taylor polynomial of ln(z) * c(z) about z = 1, in powers of (z - 1)
    return P.truncated_product(P.log_series(r), c_shifted, r)


def _family_exact(r, delta):
    d = Fraction(float(delta))
    c_w = P.binomial_shifted(d, r)  # (w + delta)^r, w = z - 1
    a_w = _taylor_a(c_w, r)
    b_w = list(c_w)
    b_w[r] -= 1  # subtract w^r
    return a_w, b_w, c_w


@lru_cache(maxsize=256)
def _family_shifted(r, delta):
    out = tuple(np.array([float(x) for x in v]) for v in _family_exact(r, delta))
    for v in out:
        v.setflags(write=False)
    return out


def build_scheme(r: int, delta: float) -> ImExScheme:
    """The delta-family scheme of order r with c(z) = (z - 1 + delta)^r.

    All intermediate arithmetic is exact (rationals built from the binary
    value of ``delta``); only the final coefficients are rounded.
    """
    _check_order_delta(r, delta)
    a_w, b_w, c_w = _family_exact(r, delta)
    a = P.shift_from_one(a_w)
    b = P.shift_from_one(b_w)
    c = P.shift_from_one(c_w)
    assert b[r] == 0
    return ImExScheme(
        r=r,
        s=r,
        delta=float(delta),
        a=[float(x) for x in a],
        b=[float(x) for x in b],
        c=[float(x) for x in c],
    )


def _tabulated(r, d):
    e = d - 1
    if r == 1:
        a = [-d, d]
        c = [e, 1]
        b = [d, 0]
    elif r == 2:
        a = [2 * d - 1.5 * d**2, -4 * d + 2 * d**2, 2 * d - 0.5 * d**2]
        c = [e**2, 2 * e, 1]
        b = [e**2 - 1, 2 * d, 0]
    elif r == 3:
        a = [
            -3 * d + 4.5 * d**2 - 11 / 6 * d**3,
            9 * d - 10.5 * d**2 + 3 * d**3,
            -9 * d + 7.5 * d**2 - 1.5 * d**3,
            3 * d - 1.5 * d**2 + d**3 / 3,
        ]
        c = [e**3, 3 * e**2, 3 * e, 1]
        b = [e**3 + 1, -6 * d + 3 * d**2, 3 * d, 0]
    elif r == 4:
        a = [
            4 * d - 9 * d**2 + 22 / 3 * d**3 - 25 / 12 * d**4,
            -16 * d + 30 * d**2 - 58 / 3 * d**3 + 4 * d**4,
            24 * d - 36 * d**2 + 18 * d**3 - 3 * d**4,
            -16 * d + 18 * d**2 - 22 / 3 * d**3 + 4 / 3 * d**4,
            4 * d - 3 * d**2 + 4 / 3 * d**3 - 0.25 * d**4,
        ]
        c = [e**4, 4 * e**3, 6 * e**2, 4 * e, 1]
        b = [e**4 - 1, 12 * d - 12 * d**2 + 4 * d**3, -12 * d + 6 * d**2, 4 * d, 0]
    else:
        a = [
            -5 * d + 15 * d**2 - 55 / 3 * d**3 + 125 / 12 * d**4 - 137 / 60 * d**5,
            25 * d - 65 * d**2 + 200 / 3 * d**3 - 365 / 12 * d**4 + 5 * d**5,
            -50 * d + 110 * d**2 - 280 / 3 * d**3 + 35 * d**4 - 5 * d**5,
            50 * d - 90 * d**2 + 190 / 3 * d**3 - 65 / 3 * d**4 + 10 / 3 * d**5,
            -25 * d + 35 * d**2 - 65 / 3 * d**3 + 95 / 12 * d**4 - 1.25 * d**5,
            5 * d - 5 * d**2 + 10 / 3 * d**3 - 1.25 * d**4 + 0.2 * d**5,
        ]
        c = [e**5, 5 * e**4, 10 * e**3, 10 * e**2, 5 * e, 1]
        b = [
            e**5 + 1,
            -20 * d + 30 * d**2 - 20 * d**3 + 5 * d**4,
            30 * d - 30 * d**2 + 10 * d**3,
            -20 * d + 10 * d**2,
            5 * d,
            0,
        ]
    return a, b, c


def tabulated_scheme(r: int, delta: float) -> ImExScheme:
    """Same family as :func:`build_scheme`, from hard-coded polynomials in delta."""
    _check_order_delta(r, delta)
    a, b, c = _tabulated(r, float(delta))
    return ImExScheme(r=r, s=r, delta=float(delta), a=a, b=b, c=c)


def _conjugate_closed(roots, tol=1e-12):
    remaining = list(roots)
    while remaining:
        z = remaining.pop()
        if abs(z.imag) <= tol * max(1.0, abs(z)):
            continue
        j = int(np.argmin([abs(w - z.conjugate()) for w in remaining])) if remaining else -1
        if j < 0 or abs(remaining[j] - z.conjugate()) > tol * max(1.0, abs(z)):
            return False
        remaining.pop(j)
    return True


def scheme_from_c_roots(roots) -> ImExScheme:
    """Order-r scheme (r = len(roots)) whose monic c(z) has the given roots.

    a(z) is the degree-r Taylor polynomial of ln(z) c(z) about z = 1 and
    b(z) = c(z) - (z - 1)^r. A root set consisting of one real value 1 - delta
    repeated r times reproduces :func:`build_scheme` exactly.
    """
    rts = np.atleast_1d(np.asarray(roots, dtype=complex))
    r = len(rts)
    if not 1 <= r <= MAX_ORDER:
        raise SchemeError(f"need between 1 and {MAX_ORDER} roots, got {r}")
    if np.any(np.abs(rts) > 1.0):
        raise SchemeError("all roots of c(z) must satisfy |root| <= 1")
    if not _conjugate_closed(rts):
        raise SchemeError("root set must be closed under complex conjugation")

    if np.all(rts == rts[0]) and rts[0].imag == 0.0 and 0.0 <= rts[0].real < 1.0:
        return build_scheme(r, 1.0 - rts[0].real)

    c = P.from_roots(rts).real
    c_w = [float(x) for x in P.from_roots(rts - 1).real]  # expanded about z = 1 directly
    a_w = P.truncated_product([float(x) for x in P.log_series(r)], c_w, r)
    b_w = list(c_w)
    b_w[r] = 0.0  # c is monic, so (z - 1)^r cancels the w^r term exactly
    a = np.array(P.shift_from_one(a_w))
    b = np.array(P.shift_from_one(b_w))
    b[r] = 0.0
    shifted = tuple(np.array(v, dtype=float) for v in (a_w, b_w, c_w))
    return ImExScheme(r=r, s=r, delta=None, a=a, b=b, c=c, shifted=shifted)


def order_condition_residual(scheme: ImExScheme) -> float:
    """Largest violation among the 2r + 1 linear order conditions."""
    j = np.arange(scheme.s + 1, dtype=float)
    a, b, c = scheme.a, scheme.b, scheme.c
    res = [abs(a.sum())]
    for q in range(1, scheme.r + 1):
        lhs = np.sum(j**q * a) / factorial(q)
        w = j ** (q - 1) / factorial(q - 1)
        res.append(abs(lhs - np.sum(w * c)))
        res.append(abs(lhs - np.sum(w * b)))
    return float(max(res))


def _clusters(roots, tol):
    groups: list[list[complex]] = []
    for z in roots:
        for g in groups:
            if abs(z - g[0]) < tol:
                g.append(z)
                break
        else:
            groups.append([z])
    return groups


def zero_stability(scheme: ImExScheme):
    """Root condition on a(z). Returns ``(verdict, roots_of_a)``.

    Consistent schemes have a(1) = 0 but a'(1) = c(1) = delta^r, so the root
    at z = 1 is badly conditioned for small delta. When a(1) vanishes to
    rounding, the factor (z - 1) is divided out exactly and the remaining
    roots are computed from the quotient.
    """
    a = np.asarray(scheme.a, dtype=float)
    if abs(a.sum()) <= 1e-12 * np.abs(a).sum():
        q = np.cumsum(a[::-1])[::-1][1:]  # a(z) = (z - 1) q(z)
        rts = np.concatenate([[1.0 + 0j], P.polish(q, P.roots(q))])
    else:
        rts = P.polish(a, P.roots(a))
    ok = True
    for g in _clusters(rts, ROOT_CLUSTER_TOL):
        m = max(abs(z) for z in g)
        if len(g) == 1:
            ok &= m <= 1.0 + ZERO_STABILITY_TOL
        else:
            ok &= m < 1.0 - ZERO_STABILITY_TOL
    return bool(ok), rts


def error_constants(scheme: ImExScheme) -> ErrorConstants:
    r = scheme.r
    if scheme.s != r:
        raise SchemeError("error constants are defined here for s = r only")
    j = np.arange(r + 1, dtype=float)
    base = np.sum(scheme.a * j ** (r + 1))
    R_I = (base - (r + 1) * np.sum(scheme.c * j**r)) / factorial(r + 1)
    R_E = (base - (r + 1) * np.sum(scheme.b * j**r)) / factorial(r + 1)
    if scheme.is_delta_family:
        c1 = b1 = float(scheme.delta) ** r  # exact; the coefficient sum cancels badly
    else:
        c1 = float(np.sum(scheme.c))
        b1 = float(np.sum(scheme.b))
    if c1 == 0.0 or b1 == 0.0:
        raise SchemeError("c(1) or b(1) vanishes; error constants undefined")
    return ErrorConstants(C_I=float(R_I / c1), C_E=float(R_E / b1), R_I=float(R_I), R_E=float(R_E))


def tabulated_implicit_constant(delta) -> float:
    """Closed form quoted for C_I of second-order schemes with roots 1 - delta.

    ``delta`` may be complex (roots 1 - delta and its conjugate).
    """
    d = complex(delta)
    m2 = abs(d) ** 2
    return (-74 / 6 - 35 / 6 * m2 + 563 / 36 * d.real) / m2


def second_order_implicit_constant(delta) -> float:
    """C_I of the r = 2 scheme with c-roots 1 - delta and 1 - conj(delta).

    Substituting the Taylor construction into the R_I sum gives
    R_I = Re(delta) - |delta|^2 / 3 - 1 and c(1) = |delta|^2.
    """
    d = complex(delta)
    m2 = abs(d) ** 2
    return (d.real - m2 / 3 - 1) / m2


def bdf_coefficients(r: int) -> np.ndarray:
    """Classical BDF-r coefficients (ascending, normalized so the z^r term of c is 1).

    a(z) = sum_{m=1}^r (1/m) z^{r-m} (z - 1)^m.
    """
    a = np.zeros(r + 1)
    for m in range(1, r + 1):
        for i in range(m + 1):
            a[r - m + i] += comb(m, i) * (-1) ** (m - i) / m
    return a


def adams_bashforth_b(r: int) -> np.ndarray:
    """Extrapolation weights of the explicit SBDF part: z^r - (z - 1)^r."""
    b = np.array([-comb(r, i) * (-1) ** (r - i) for i in range(r + 1)], dtype=float)
    b[r] = 0.0
    return b
