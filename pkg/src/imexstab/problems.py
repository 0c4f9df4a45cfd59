"""Test problems: scalar splittings and Chebyshev variable-coefficient diffusion."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .schemes import build_scheme
from .splitting import Splitting, SplittingError, validate_splitting
from .stepping import exact_start_plan, global_error


def max_workers() -> int:
    """Thread cap from IMEXSTAB_THREADS (default: CPU count)."""
    env = os.environ.get("IMEXSTAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ChebyshevGrid:
    N: int
    nodes: np.ndarray
    D: np.ndarray

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]


def chebyshev_grid(N: int) -> ChebyshevGrid:
    """N interior Chebyshev points plus the endpoints x = 1, -1 (descending).

    D is the collocation differentiation matrix on all N + 2 nodes, with the
    diagonal set by negative row sums.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    M = N + 1
    j = np.arange(M + 1)
    x = np.cos(np.pi * j / M)
    w = np.where((j == 0) | (j == M), 2.0, 1.0) * (-1.0) ** j
    dX = x[:, None] - x[None, :]
    D = np.outer(w, 1 / w) / (dX + np.eye(M + 1))
    D -= np.diag(D.sum(axis=1))
    return ChebyshevGrid(N=N, nodes=x, D=D)


def vardiff_coefficient(x):
    return 4 + 3 * np.cos(2 * np.pi * x)


def vardiff_solution(x, t):
    s = np.sin(2 * np.pi * x)
    return np.sin(20 * t) * s * np.exp(s)


def vardiff_solution_dt(x, t):
    s = np.sin(2 * np.pi * x)
    return 20 * np.cos(20 * t) * s * np.exp(s)


@dataclass
class DiffusionProblem:
    grid: ChebyshevGrid
    d_values: np.ndarray
    alpha: float
    split: Splitting
    L: np.ndarray
    exact: Callable[[float], np.ndarray] | None = None
    forcing: Callable[[float], np.ndarray] | None = None
    meta: dict = field(default_factory=dict)


def diffusion_splitting(N: int, d: Callable = vardiff_coefficient, alpha: float = 2.5) -> DiffusionProblem:
    """Spectral (d u_x)_x with Dirichlet ends, split as A = alpha sym(D^2), B = L - A."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    grid = chebyshev_grid(N)
    dv = np.asarray(d(grid.nodes), dtype=float) * np.ones_like(grid.nodes)
    if np.any(dv <= 0):
        raise ValueError("diffusion coefficient must be positive at every node")
    D = grid.D
    L = (D * dv) @ D
    D2 = D @ D
    L_int = L[1:-1, 1:-1]
    D2_int = D2[1:-1, 1:-1]
    A = 0.5 * alpha * (D2_int + D2_int.T)
    B = L_int - A
    try:
        split = validate_splitting(A, B)
    except SplittingError as exc:
        raise SplittingError(f"diffusion splitting with alpha={alpha}, N={N}: {exc}") from exc
    return DiffusionProblem(grid=grid, d_values=dv, alpha=alpha, split=split, L=L_int, meta={"N": N, "alpha": alpha})


def manufactured_forcing(problem: DiffusionProblem, u_star=vardiff_solution, du_star_dt=vardiff_solution_dt):
    """Attach u* and the discrete forcing f_h = du*/dt - L u* on the interior nodes.

    With this forcing the grid samples of u* solve the semi-discrete system
    exactly, so time-stepping errors are purely temporal.
    """
    x = problem.grid.interior
    L = problem.L

    def exact(t):
        return u_star(x, t)

    def forcing(t):
        return du_star_dt(x, t) - L @ u_star(x, t)

    problem.exact = exact
    problem.forcing = forcing
    return forcing


@dataclass
class ConvergenceReport:
    r: int
    delta: float
    rows: list[tuple[float, float, float]]
    meta: dict = field(default_factory=dict)

    @property
    def errors(self) -> np.ndarray:
        return np.array([row[1] for row in self.rows])

    @property
    def rates(self) -> np.ndarray:
        return np.array([row[2] for row in self.rows])


def observed_rates(ks, errors) -> list[float]:
    rates = [math.nan]
    for i in range(1, len(errors)):
        rates.append(math.log(errors[i - 1] / errors[i]) / math.log(ks[i - 1] / ks[i]))
    return rates


def convergence_study(
    r: int, delta: float, problem, k_list, t_final: float = 1.0, reference_k: float | None = None
) -> ConvergenceReport:
    """Errors at t_final for each k, started from exact data at t = -(r-1)k..0.

    If ``reference_k`` is given, one extra run at that step supplies the rate
    of the first row; it is not reported as a row itself.
    """
    if problem.exact is None:
        raise ValueError("problem has no exact solution attached")
    scheme = build_scheme(r, delta)
    ks = [float(k) for k in k_list]
    if reference_k is not None:
        ks = [float(reference_k)] + ks

    def one(k):
        plan = exact_start_plan(scheme, problem.split, k, t_final, problem.exact, problem.forcing)
        return global_error(plan, problem.exact)

    with ThreadPoolExecutor(max_workers=min(max_workers(), len(ks))) as pool:
        errors = list(pool.map(one, ks))
    rows = list(zip(ks, errors, observed_rates(ks, errors)))
    if reference_k is not None:
        rows = rows[1:]
    meta = dict(getattr(problem, "meta", {}))
    meta["t_final"] = t_final
    meta["reference_k"] = reference_k
    return ConvergenceReport(r=r, delta=delta, rows=rows, meta=meta)


def gte_study(
    r: int,
    deltas,
    problem,
    k: float | None = None,
    k_over_delta: float | None = None,
    t_final: float = 1.0,
) -> ConvergenceReport:
    """Final-time error as delta varies, at a fixed k or with k proportional to delta.

    Rows are (delta, error, rate) with rate = d log(error) / d log(delta).
    """
    if (k is None) == (k_over_delta is None):
        raise ValueError("give exactly one of k and k_over_delta")
    ds = [float(d) for d in deltas]

    def one(d):
        step = k if k is not None else k_over_delta * d
        plan = exact_start_plan(build_scheme(r, d), problem.split, step, t_final, problem.exact, problem.forcing)
        return global_error(plan, problem.exact)

    with ThreadPoolExecutor(max_workers=min(max_workers(), len(ds))) as pool:
        errors = list(pool.map(one, ds))
    meta = dict(getattr(problem, "meta", {}))
    meta.update(t_final=t_final, k=k, k_over_delta=k_over_delta)
    return ConvergenceReport(r=r, delta=math.nan, rows=list(zip(ds, errors, observed_rates(ds, errors))), meta=meta)


@dataclass
class ScalarProblem:
    split: Splitting
    lambda_A: float
    lambda_B: float
    u0: float = 1.0
    forcing: Callable[[float], np.ndarray] | None = None
    meta: dict = field(default_factory=dict)

    def exact(self, t):
        return np.array([self.u0 * math.exp((self.lambda_A + self.lambda_B) * t)])


def scalar_problem(lambda_A: float, lambda_B: float, u0: float = 1.0) -> ScalarProblem:
    """u_t = lambda_A u + lambda_B u with A = [lambda_A] implicit and B = [lambda_B] explicit."""
    if not lambda_A < 0:
        raise ValueError("lambda_A must be negative")
    split = validate_splitting([[lambda_A]], [[lambda_B]])
    return ScalarProblem(split=split, lambda_A=lambda_A, lambda_B=lambda_B, u0=u0,
                         meta={"lambda_A": lambda_A, "lambda_B": lambda_B})


CATALOG = ("paper-vardiff", "paper-scalar", "paper-gte")


def catalog_problem(name: str, N: int = 100, alpha: float = 2.5):
    if name == "paper-scalar":
        return scalar_problem(-1.0, -9.0)
    if name == "paper-gte":
        return scalar_problem(-1.0, 0.0)
    if name == "paper-vardiff":
        prob = diffusion_splitting(N, vardiff_coefficient, alpha)
        manufactured_forcing(prob)
        return prob
    raise KeyError(f"unknown problem {name!r}; choose from {', '.join(CATALOG)}")
