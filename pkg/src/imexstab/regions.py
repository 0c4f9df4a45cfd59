"""Unconditional stability regions of ImEx multistep schemes.

For a scheme (a, b, c) and a splitting variable mu, the model polynomial is

    a(z) - y c(z) + y mu b(z),   y < 0,

and in the limit y -> -inf it becomes c(z) - mu b(z). The region D_y collects
the mu for which all roots lie strictly inside the unit circle; the
unconditional region D is the intersection over all y, including -inf.

Membership is decided from polynomial roots. The delta-family additionally
has closed-form boundary data (extreme points, boundary curve, asymptotic
circle), which the tests use to cross-check the root-based oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .schemes import ImExScheme, SchemeError, build_scheme

MEMBERSHIP_TOL = 1e-10
B_SKIP_TOL = 1e-13
DEFAULT_Y_GRID = -np.logspace(-8, 8, 64)
NEG_INF = -np.inf


@dataclass(frozen=True)
class ComplexCurve:
    points: np.ndarray
    closed: bool = True
    params: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class RegionSummary:
    r: int
    delta: float
    m_l: float
    m_r: float
    circle_center: float
    circle_radius: float
    z0: complex

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "delta": self.delta,
            "m_l": self.m_l,
            "m_r": self.m_r,
            "circle_center": self.circle_center,
            "circle_radius": self.circle_radius,
            "z0": [self.z0.real, self.z0.imag],
        }


# -- root moduli -------------------------------------------------------------


def max_root_modulus(coeffs, about_one: bool = False) -> np.ndarray:
    """Largest root modulus for a stack of polynomials.

    ``coeffs`` has shape (..., d + 1), ascending. All polynomials in the stack
    must share the nominal degree d; where the leading coefficient vanishes
    (relative to the rest) the polynomial has a root at infinity and the
    result is ``inf``. LAPACK's geev balances the companion matrices.

    With ``about_one`` the coefficients are in powers of w = z - 1 and the
    moduli |1 + w| are returned.
    """
    C = np.asarray(coeffs, dtype=complex)
    shape = C.shape[:-1]
    C = C.reshape(-1, C.shape[-1])
    d = C.shape[1] - 1
    lead = C[:, -1]
    scale = np.max(np.abs(C), axis=1)
    dropped = np.abs(lead) <= 1e-14 * np.where(scale > 0, scale, 1.0)
    out = np.full(len(C), np.inf)
    ok = ~dropped
    if d == 0:
        out[ok] = 0.0  # no roots at all
        return out.reshape(shape)
    comp = np.zeros((int(ok.sum()), d, d), dtype=complex)
    if d > 1:
        comp[:, np.arange(1, d), np.arange(d - 1)] = 1.0
    comp[:, :, -1] = -C[ok, :-1] / lead[ok, None]
    ev = np.linalg.eigvals(comp)
    out[ok] = np.abs(1 + ev if about_one else ev).max(axis=1)
    return out.reshape(shape)


def infinite_radius(mu, scheme: ImExScheme):
    """Largest root modulus of c(z) - mu b(z)."""
    mu = np.asarray(mu, dtype=complex)
    _, b_w, c_w = scheme.shifted_coefficients()
    return max_root_modulus(c_w - mu[..., None] * b_w, about_one=True)


def finite_radius(mu, y, scheme: ImExScheme):
    """Largest root modulus of a(z) - y c(z) + y mu b(z) (broadcast over mu, y)."""
    mu, y = np.broadcast_arrays(np.asarray(mu, dtype=complex), np.asarray(y, dtype=float))
    a_w, b_w, c_w = scheme.shifted_coefficients()
    coeffs = a_w - y[..., None] * c_w + (y * mu)[..., None] * b_w
    return max_root_modulus(coeffs, about_one=True)


def classify(radius, tol: float = MEMBERSHIP_TOL):
    """'inside', 'boundary' or 'outside' for a root radius (strict test)."""
    radius = np.asarray(radius)
    out = np.where(radius < 1 - tol, "inside", np.where(radius > 1 + tol, "outside", "boundary"))
    return out.item() if out.ndim == 0 else out


def _as_result(x):
    x = np.asarray(x)
    return bool(x) if x.ndim == 0 else x


def member_infinite(mu, scheme: ImExScheme):
    """Is mu in D_{-inf}, i.e. does c(z) - mu b(z) have all roots in |z| < 1?"""
    return _as_result(infinite_radius(mu, scheme) < 1 - MEMBERSHIP_TOL)


def member_finite(mu, y, scheme: ImExScheme):
    if np.any(np.asarray(y) >= 0) or not np.all(np.isfinite(y)):
        raise ValueError("y must be finite and strictly negative")
    return _as_result(finite_radius(mu, y, scheme) < 1 - MEMBERSHIP_TOL)


def region_is_exact(scheme: ImExScheme) -> bool:
    """True when D = D_{-inf} is established for the scheme (delta-family, r <= 5).

    For other schemes :func:`member_unconditional` only samples y.
    """
    return scheme.is_delta_family and scheme.r <= 5


def member_unconditional(mu, scheme: ImExScheme, y_samples=None):
    """Membership in the unconditional region D.

    For the delta-family this is membership in D_{-inf}. Otherwise the result
    is the conjunction over D_{-inf} and D_y on a log-spaced y grid; such a
    result is sampled rather than certified (see :func:`region_is_exact`).
    """
    inside = np.asarray(infinite_radius(mu, scheme) < 1 - MEMBERSHIP_TOL)
    if region_is_exact(scheme) and y_samples is None:
        return _as_result(inside)
    ys = DEFAULT_Y_GRID if y_samples is None else np.asarray(y_samples, dtype=float)
    mu = np.asarray(mu, dtype=complex)
    rad = finite_radius(mu[..., None], ys, scheme)
    inside = inside & np.all(rad < 1 - MEMBERSHIP_TOL, axis=-1)
    return _as_result(inside)


# -- curves ------------------------------------------------------------------


def boundary_locus(y, scheme: ImExScheme, n: int = 512) -> ComplexCurve:
    """Image of the unit circle under mu = (c(z) - a(z)/y) / b(z).

    ``y = -inf`` gives c(z) / b(z). Samples with |b(z)| < 1e-13 are skipped.
    """
    if n < 64:
        raise ValueError("boundary_locus needs n >= 64 samples")
    theta = 2 * np.pi * np.arange(n) / n
    z = np.exp(1j * theta)
    num = scheme.c_poly(z)
    if np.isfinite(y):
        if y >= 0:
            raise ValueError("y must be negative or -inf")
        num = num - scheme.a_poly(z) / y
    den = scheme.b_poly(z)
    keep = np.abs(den) >= B_SKIP_TOL
    pts = num[keep] / den[keep]
    return ComplexCurve(
        points=pts,
        closed=True,
        params=theta[keep],
        meta={"source": "locus", "y": float(y), "skipped_theta": theta[~keep].tolist()},
    )


def z0(r: int, delta: float) -> complex:
    """Unit-circle parameter at which the boundary of D_{-inf} starts (right-most point)."""
    if r == 1:
        return 1.0 + 0j
    e = np.exp(1j * np.pi / r)
    cs = np.cos(np.pi / r)
    return complex((2 - delta - 2 * (1 - delta) * cs * e) / (2 - delta - 2 * cs * e))


def delta_family_map(z, r: int, delta: float):
    """(z - 1 + delta)^r / ((z - 1 + delta)^r - (z - 1)^r)."""
    p = (z - 1 + delta) ** r
    return p / (p - (z - 1) ** r)


def exact_boundary(r: int, delta: float, n: int = 512, cluster: int = 16) -> ComplexCurve:
    """Closed-form boundary of D for the delta-family.

    Samples arg z uniformly on [arg z0, 2 pi - arg z0] (endpoints included)
    plus ``cluster`` extra geometrically spaced samples next to each end,
    where the curve moves fastest for small delta.
    """
    if not 1 <= r <= 5:
        raise SchemeError("exact boundary is available for orders 1..5")
    t0 = float(np.angle(z0(r, delta))) if r > 1 else 0.0
    t1 = 2 * np.pi - t0
    theta = np.linspace(t0, t1, n)
    theta = np.append(theta, np.pi)  # the left-most point m_l
    if cluster:
        span = t1 - t0
        offs = span * np.geomspace(1e-6, 0.5 / (n - 1), cluster)
        theta = np.concatenate([theta, t0 + offs, t1 - offs])
    theta = np.unique(theta)
    pts = delta_family_map(np.exp(1j * theta), r, delta)
    return ComplexCurve(
        points=pts,
        closed=True,
        params=theta,
        meta={"source": "exact", "r": r, "delta": delta, "theta_range": [t0, t1]},
    )


def exact_boundary_tangent(theta, r: int, delta: float):
    """d mu / d theta along :func:`exact_boundary` (analytic derivative)."""
    z = np.exp(1j * np.asarray(theta))
    p = (z - 1 + delta) ** r
    q = (z - 1) ** r
    dp = r * (z - 1 + delta) ** (r - 1)
    dq = r * (z - 1) ** (r - 1)
    # mu = p / (p - q)  ->  mu' = (dp (p - q) - p (dp - dq)) / (p - q)^2
    dmu = (p * dq - q * dp) / (p - q) ** 2
    return dmu * 1j * z


def extreme_points(r: int, delta: float) -> tuple[float, float]:
    """Left-most and right-most real points (m_l, m_r) of D for the delta-family."""
    if not 1 <= r <= 5:
        raise SchemeError("extreme points are available for orders 1..5")
    if delta == 2:
        raise SchemeError("delta = 2 makes the extreme-point formulas singular")
    if r == 1:
        return -(2 - delta) / delta, 1.0
    g = (2 - delta) ** r
    m_l = -g / (2**r - g)
    m_r = g / (g + 2**r * np.cos(np.pi / r) ** r)
    return float(m_l), float(m_r)


def asymptotic_circle(r: int, delta: float) -> tuple[float, float]:
    """Center and radius of the circle that D approaches for small delta."""
    if not 1 <= r <= 5:
        raise SchemeError("asymptotic circle is defined for orders 1..5")
    radius = 1.0 / (r * delta)
    return (r + 1) / (2 * r) - radius, radius


def region_summary(r: int, delta: float) -> RegionSummary:
    m_l, m_r = extreme_points(r, delta)
    center, radius = asymptotic_circle(r, delta)
    return RegionSummary(
        r=r, delta=delta, m_l=m_l, m_r=m_r, circle_center=center, circle_radius=radius, z0=z0(r, delta)
    )


# -- G(delta) ----------------------------------------------------------------


def phi(w, r: int):
    """(w / (w - 1))^(1/r) on the principal branch, arg in (-pi, pi]."""
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.asarray(w, dtype=complex) / (np.asarray(w, dtype=complex) - 1)
    ang = np.angle(q)
    ang = np.where(ang <= -np.pi, np.pi, ang)
    return np.abs(q) ** (1.0 / r) * np.exp(1j * ang / r)


def g_function(delta: float, r: int, grid: tuple[int, int] = (400, 400)) -> float:
    """Grid minimum of (Re phi(w) - (1 - delta/2)) (1 - y) / delta^2 over w in Gamma_y.

    y ranges over (-inf, 0) through ytilde = 1 / (1 - y) in (0, 1), sampled at
    n_y uniform interior points; Gamma_y is sampled at n_theta points of the
    unit circle. Positive values mean Gamma_y never enters D_{-inf}.

    The theta grid is offset by half a step so that z = 1 is never sampled:
    every Gamma_y passes through mu = 1 there, where phi is infinite.
    """
    if not 2 <= r <= 5:
        raise SchemeError("G(delta) is used for orders 2..5")
    n_y, n_t = grid
    scheme = build_scheme(r, delta)
    yt = np.arange(1, n_y + 1) / (n_y + 1)
    y = 1 - 1 / yt
    z = np.exp(2j * np.pi * (np.arange(n_t) + 0.5) / n_t)
    av, bv, cv = scheme.a_poly(z), scheme.b_poly(z), scheme.c_poly(z)
    keep = np.abs(bv) >= B_SKIP_TOL
    av, bv, cv = av[keep], bv[keep], cv[keep]
    w = (cv[None, :] - av[None, :] / y[:, None]) / bv[None, :]
    vals = (phi(w, r).real - (1 - delta / 2)) / yt[:, None] / delta**2
    vals = vals[np.isfinite(vals)]
    return float(vals.min())
