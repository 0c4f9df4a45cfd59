"""Matrix splittings L = A + B, generalized numerical ranges and certification."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import regions as R
from .schemes import build_scheme

DEFAULT_ANGLES = 256

CERTIFIED = "certified_sufficient"
VIOLATES = "violates_necessary"
INCONCLUSIVE = "inconclusive"


class SplittingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Splitting:
    """Validated pair (A, B) with A real symmetric negative definite."""

    A: np.ndarray
    B: np.ndarray

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def L(self) -> np.ndarray:
        return self.A + self.B

    @cached_property
    def _neg_a_eig(self):
        w, Q = np.linalg.eigh(-self.A)
        return w, Q

    def neg_a_power(self, p: float) -> np.ndarray:
        """(-A)^p from the symmetric eigendecomposition of -A."""
        w, Q = self._neg_a_eig
        return (Q * w**p) @ Q.T


def validate_splitting(A, B) -> Splitting:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SplittingError(f"A must be square, got shape {A.shape}")
    if B.shape != A.shape:
        raise SplittingError(f"A and B must have the same shape, got {A.shape} and {B.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise SplittingError("A and B must be finite")
    norm = np.linalg.norm(A, 2)
    if norm == 0:
        raise SplittingError("A is zero, hence not negative definite")
    asym = np.max(np.abs(A - A.T))
    if asym > 1e-12 * norm:
        raise SplittingError(f"A is not symmetric (max |A - A^T| = {asym:.3e})")
    A = 0.5 * (A + A.T)
    lam_max = np.linalg.eigvalsh(A)[-1]
    if lam_max >= -1e-12 * norm:
        raise SplittingError(f"A is not negative definite (largest eigenvalue {lam_max:.6e})")
    A.setflags(write=False)
    B.setflags(write=False)
    return Splitting(A=A, B=B)


@dataclass(frozen=True)
class RangeBoundary:
    p: float | None
    points: R.ComplexCurve
    support_angles: np.ndarray
    support_values: np.ndarray

    def probe_points(self) -> np.ndarray:
        """Support points plus the midpoints of the polygon edges joining them."""
        pts = self.points.points
        mids = 0.5 * (pts + np.roll(pts, -1))
        return np.concatenate([pts, mids])

    def rightmost(self) -> float:
        return float(self.points.points.real.max())


def numerical_range_boundary(X, n_angles: int = DEFAULT_ANGLES, p: float | None = None) -> RangeBoundary:
    """Support points of W(X) by Johnson's algorithm.

    For each angle t, the top eigenvector v of the Hermitian part of
    exp(i t) X gives the boundary point <v, X v>, extreme in direction exp(-i t).
    """
    if n_angles < 8:
        raise ValueError("n_angles must be at least 8")
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    angles = 2 * np.pi * np.arange(n_angles) / n_angles
    Xh = X.conj().T
    chunk = max(1, 2_000_000 // max(1, X.size))
    lam, vecs = [], []
    for i in range(0, n_angles, chunk):
        e = np.exp(1j * angles[i : i + chunk])[:, None, None]
        w, V = np.linalg.eigh(0.5 * (e * X[None] + e.conj() * Xh[None]))
        lam.append(w[:, -1])
        vecs.append(V[:, :, -1])
    v = np.concatenate(vecs)
    pts = np.einsum("ki,ij,kj->k", v.conj(), X, v)
    keep = np.ones(len(pts), dtype=bool)
    scale = max(1.0, float(np.abs(pts).max()))
    keep[1:] = np.abs(np.diff(pts)) > 1e-14 * scale
    curve = R.ComplexCurve(
        points=pts[keep],
        closed=True,
        params=angles[keep],
        meta={"source": "numerical_range", "n_angles": n_angles},
    )
    return RangeBoundary(p=p, points=curve, support_angles=angles, support_values=np.concatenate(lam))


def wp_matrix(split: Splitting, p: float = 1.0) -> np.ndarray:
    w, _ = split._neg_a_eig
    if w.min() < 1e-12 * w.max():
        raise SplittingError("-A is too close to singular for fractional powers")
    return split.neg_a_power(p / 2 - 1) @ split.B @ split.neg_a_power(-p / 2)


def wp_set(split: Splitting, p: float = 1.0, n_angles: int = DEFAULT_ANGLES) -> RangeBoundary:
    """Boundary of W_p = W((-A)^(p/2 - 1) B (-A)^(-p/2))."""
    return numerical_range_boundary(wp_matrix(split, p), n_angles, p=p)


def generalized_spectrum(split: Splitting) -> np.ndarray:
    """Eigenvalues mu of mu (-A) u = B u, via (-A)^(-1/2) B (-A)^(-1/2)."""
    S = split.neg_a_power(-0.5)
    ev = np.linalg.eigvals(S @ split.B @ S)
    return ev[np.lexsort((ev.imag, ev.real))]


@dataclass(frozen=True)
class StabilityVerdict:
    status: str
    witness: complex | None
    p_used: float
    delta: float
    r: int
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        w = None if self.witness is None else [self.witness.real, self.witness.imag]
        return {
            "status": self.status,
            "witness": w,
            "p_used": self.p_used,
            "delta": self.delta,
            "r": self.r,
            "details": self.details,
        }


def gamma_inf_distance(mu, scheme, n: int = 4096) -> np.ndarray:
    """Distance from each mu to Gamma_{-inf} = {c(z)/b(z) : |z| = 1}.

    Uses a dense sampling of the locus refined by projecting the roots of
    c(z) - mu b(z) onto the unit circle (exact when mu lies on the locus).
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=complex))
    locus = R.boundary_locus(R.NEG_INF, scheme, n).points
    out = np.abs(mu[:, None] - locus[None, :]).min(axis=1)
    for i, m in enumerate(mu):
        rts = np.roots((scheme.c - m * scheme.b)[::-1])
        rts = rts[np.abs(rts) > 0]
        zz = rts / np.abs(rts)
        bz = scheme.b_poly(zz)
        ok = np.abs(bz) > R.B_SKIP_TOL
        if ok.any():
            cand = scheme.c_poly(zz[ok]) / bz[ok]
            out[i] = min(out[i], float(np.abs(cand - m).min()))
    return out


def _verdict_from(scheme, wrange, spectrum, p, delta, r) -> StabilityVerdict:
    m_l, _ = R.extreme_points(r, delta)
    scale = max(abs(m_l), 1.0)
    details = {"n_angles": int(len(wrange.support_angles)), "n_eigenvalues": int(len(spectrum))}

    ev_rad = R.infinite_radius(spectrum, scheme)
    outside = ev_rad >= 1 - R.MEMBERSHIP_TOL
    if outside.any():
        dist = gamma_inf_distance(spectrum[outside], scheme)
        off = dist > 1e-6 * scale
        if off.any():
            cand = spectrum[outside][off]
            worst = int(np.argmax(ev_rad[outside][off]))
            details["root_radius"] = float(ev_rad[outside][off][worst])
            return StabilityVerdict(VIOLATES, complex(cand[worst]), p, delta, r, details)

    probes = wrange.probe_points()
    rad = R.infinite_radius(probes, scheme)
    details["max_root_radius"] = float(rad.max())
    if np.all(rad < 1 - R.MEMBERSHIP_TOL):
        return StabilityVerdict(CERTIFIED, None, p, delta, r, details)
    worst = int(np.argmax(rad))
    return StabilityVerdict(INCONCLUSIVE, complex(probes[worst]), p, delta, r, details)


def certify(split: Splitting, r: int, delta: float, p: float = 1.0, n_angles: int = DEFAULT_ANGLES) -> StabilityVerdict:
    """Check W_p against D (sufficient) and the generalized spectrum against D u Gamma_{-inf} (necessary)."""
    scheme = build_scheme(r, delta)
    return _verdict_from(scheme, wp_set(split, p, n_angles), generalized_spectrum(split), p, delta, r)


def largest_stable_delta(split: Splitting, r: int, p: float = 1.0, delta_grid=None, n_angles: int = DEFAULT_ANGLES):
    """Largest delta on a descending grid whose verdict is certified_sufficient, else None."""
    if delta_grid is None:
        delta_grid = np.round(np.arange(1.0, 0.0, -0.01), 12)
    grid = np.asarray(delta_grid, dtype=float)
    if np.any(np.diff(grid) >= 0):
        raise ValueError("delta_grid must be strictly descending")
    wrange = wp_set(split, p, n_angles)
    spectrum = generalized_spectrum(split)
    for d in grid:
        v = _verdict_from(build_scheme(r, float(d)), wrange, spectrum, p, float(d), r)
        if v.status == CERTIFIED:
            return float(d)
    return None
