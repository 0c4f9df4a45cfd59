"""The ImEx multistep recursion, its companion matrix and error measurement."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .schemes import ImExScheme
from .splitting import Splitting

log = logging.getLogger(__name__)

OVERFLOW_FACTOR = 1e12
SPECTRAL_TOL = 1e-9
NEAR_UNIT_TOL = 1e-7
POWER_ITERS = 10_000


class SteppingError(RuntimeError):
    pass


@dataclass
class SteppingPlan:
    scheme: ImExScheme
    split: Splitting
    k: float
    n_steps: int
    initial: Sequence[np.ndarray]
    forcing: Callable[[float], np.ndarray] | None = None
    t0: float = 0.0  # time of initial[0]

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("time step k must be positive")
        if len(self.initial) != self.scheme.s:
            raise ValueError(f"need exactly s = {self.scheme.s} initial vectors")
        self.initial = [np.atleast_1d(np.asarray(u, dtype=float)) for u in self.initial]
        for u in self.initial:
            if u.shape != (self.split.N,):
                raise ValueError(f"initial vectors must have shape ({self.split.N},)")


@dataclass
class Trajectory:
    times: np.ndarray
    norms: np.ndarray
    states: list[np.ndarray] = field(default_factory=list)
    diverged: bool = False

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


class _ImplicitSolver:
    """Factorization of a_s I - k c_s A, reused for every step."""

    def __init__(self, scheme: ImExScheme, A: np.ndarray, k: float):
        M = scheme.a[-1] * np.eye(A.shape[0]) - k * scheme.c[-1] * A
        try:
            self._chol = sla.cho_factor(M)
            self._lu = None
        except np.linalg.LinAlgError:
            self._chol = None
            self._lu = sla.lu_factor(M, check_finite=True)
            if np.any(np.abs(np.diag(self._lu[0])) <= 1e-14 * np.abs(M).max()):
                raise SteppingError("implicit operator a_s I - k c_s A is singular")

    def solve(self, rhs):
        if self._chol is not None:
            return sla.cho_solve(self._chol, rhs)
        return sla.lu_solve(self._lu, rhs)


def run(plan: SteppingPlan, keep: str = "all") -> Trajectory:
    """Advance the recursion n_steps times.

    ``keep='all'`` stores every state (initial ones included); ``'last'`` keeps
    only the final state. The run stops early, flagged ``diverged``, when the
    state norm exceeds 1e12 times the largest initial norm (at least 1 for
    forced runs) or goes non-finite.
    """
    sch, A, B, k = plan.scheme, plan.split.A, plan.split.B, plan.k
    s = sch.s
    a, b, c = sch.a, sch.b, sch.c
    solver = _ImplicitSolver(sch, A, k)

    hist = list(plan.initial)
    Au = [A @ u for u in hist]
    Bu = [B @ u for u in hist]
    fs = None
    if plan.forcing is not None:
        fs = [np.asarray(plan.forcing(plan.t0 + j * k), dtype=float) for j in range(s)]

    norms = [float(np.max(np.abs(u))) for u in hist]
    states = list(hist) if keep == "all" else []
    ref = max(norms)
    if fs is not None or ref == 0.0:
        ref = max(ref, 1.0)  # forced or zero-start runs: guard on an absolute scale
    limit = OVERFLOW_FACTOR * ref
    diverged = False
    for n in range(plan.n_steps):
        rhs = np.zeros(plan.split.N)
        for j in range(s):
            rhs += -a[j] * hist[j] + k * (c[j] * Au[j] + b[j] * Bu[j])
            if fs is not None:
                rhs += k * b[j] * fs[j]
        u = solver.solve(rhs)
        nrm = float(np.max(np.abs(u)))
        norms.append(nrm)
        if keep == "all":
            states.append(u)
        hist = hist[1:] + [u]
        Au = Au[1:] + [A @ u]
        Bu = Bu[1:] + [B @ u]
        if fs is not None:
            fs = fs[1:] + [np.asarray(plan.forcing(plan.t0 + (n + s) * k), dtype=float)]
        if not np.isfinite(nrm) or nrm > limit:
            log.warning("state norm %.3e exceeded the overflow guard at step %d", nrm, n + s)
            diverged = True
            break
    if keep != "all":
        states = [hist[-1]]
    times = plan.t0 + k * np.arange(len(norms))
    return Trajectory(times=times, norms=np.array(norms), states=states, diverged=diverged)


@dataclass(frozen=True)
class CompanionMatrix:
    W: np.ndarray
    k: float
    scheme: ImExScheme
    split: Splitting

    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.W)).max())


def companion_matrix(scheme: ImExScheme, split: Splitting, k: float) -> CompanionMatrix:
    """One-step transfer matrix acting on (u_{n+s-1}, ..., u_n)."""
    s, N = scheme.s, split.N
    A, B, I = split.A, split.B, np.eye(N)
    solver = _ImplicitSolver(scheme, A, k)
    W = np.zeros((s * N, s * N))
    for j in range(s):
        Cj = k * scheme.c[j] * A + k * scheme.b[j] * B - scheme.a[j] * I
        col = s - 1 - j
        W[:N, col * N : (col + 1) * N] = solver.solve(Cj)
    if s > 1:
        W[N:, : (s - 1) * N] = np.eye((s - 1) * N)
    return CompanionMatrix(W=W, k=k, scheme=scheme, split=split)


@dataclass(frozen=True)
class KVerdict:
    k: float
    stable: bool
    spectral_radius: float
    growth_checked: bool


def _grows(W, rng) -> bool:
    v = rng.standard_normal(W.shape[0])
    v /= np.linalg.norm(v)
    half = None
    for i in range(POWER_ITERS):
        v = W @ v
        if i == POWER_ITERS // 2 - 1:
            half = np.linalg.norm(v)
    return bool(np.linalg.norm(v) > 1.5 * half)


def empirical_stability(scheme: ImExScheme, split: Splitting, k_grid, seed: int = 0) -> list[KVerdict]:
    """Spectral-radius test of the companion matrix at each k.

    Eigenvalues within [1 - 1e-7, 1 + 1e-9] are additionally checked for
    polynomial (defective) growth by power iteration.
    """
    if scheme.s * split.N > 2000:
        raise ValueError("empirical_stability is limited to s * N <= 2000")
    rng = np.random.default_rng(seed)
    out = []
    for k in np.atleast_1d(k_grid):
        W = companion_matrix(scheme, split, float(k)).W
        mods = np.abs(np.linalg.eigvals(W))
        rho = float(mods.max())
        stable = rho <= 1 + SPECTRAL_TOL
        checked = False
        if stable and np.any(mods >= 1 - NEAR_UNIT_TOL):
            checked = True
            stable = not _grows(W, rng)
        out.append(KVerdict(k=float(k), stable=bool(stable), spectral_radius=rho, growth_checked=checked))
    return out


def exact_start_plan(
    scheme: ImExScheme,
    split: Splitting,
    k: float,
    t_final: float,
    exact: Callable[[float], np.ndarray],
    forcing: Callable[[float], np.ndarray] | None = None,
    history: str = "past",
) -> SteppingPlan:
    """Plan whose s starting vectors are exact solution samples.

    ``history='past'`` uses u*(jk) for j = -s+1..0 (the last starting vector
    sits at t = 0); ``'future'`` uses j = 0..s-1. Either way the last step
    lands on ``t_final``.
    """
    s = scheme.s
    n_total = int(round(t_final / k))
    if abs(n_total * k - t_final) > 1e-9 * max(1.0, abs(t_final)):
        raise ValueError("t_final must be an integer multiple of k")
    if history == "past":
        t0 = -(s - 1) * k
        n_steps = n_total
    elif history == "future":
        t0 = 0.0
        n_steps = n_total - (s - 1)
    else:
        raise ValueError("history must be 'past' or 'future'")
    initial = [exact(t0 + j * k) for j in range(s)]
    return SteppingPlan(scheme=scheme, split=split, k=k, n_steps=n_steps, initial=initial, forcing=forcing, t0=t0)


def global_error(plan: SteppingPlan, exact: Callable[[float], np.ndarray]) -> float:
    """Sup-norm error at the final step against the exact solution."""
    traj = run(plan, keep="last")
    if traj.diverged:
        raise SteppingError("run diverged; global error undefined")
    t_end = float(traj.times[-1])
    return float(np.max(np.abs(traj.final - np.asarray(exact(t_end)))))
