import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imexstab.problems import scalar_problem
from imexstab.schemes import build_scheme
from imexstab.splitting import validate_splitting
from imexstab.stepping import (
    SteppingError,
    SteppingPlan,
    companion_matrix,
    empirical_stability,
    exact_start_plan,
    global_error,
    run,
)


def random_system(rng, n):
    G = rng.standard_normal((n, n))
    return validate_splitting(-(G @ G.T + np.eye(n)), rng.standard_normal((n, n)))


def test_run_matches_companion_powers():
    rng = np.random.default_rng(0)
    for r in range(1, 6):
        sp = random_system(rng, 4)
        sch = build_scheme(r, float(rng.uniform(0.1, 1)))
        k = 0.05
        init = [rng.standard_normal(4) for _ in range(r)]
        traj = run(SteppingPlan(sch, sp, k, 12, init))
        W = companion_matrix(sch, sp, k).W
        v = np.concatenate(init[::-1])
        for n in range(12):
            v = W @ v
            u = traj.states[r + n]
            assert np.allclose(v[:4], u, rtol=1e-10, atol=1e-10 * np.abs(u).max())


def test_scalar_euler_amplification():
    sp = scalar_problem(-1.0, -9.0).split
    sch = build_scheme(1, 1.0)
    for k in (0.1, 0.2, 0.3, 2.0):
        W = companion_matrix(sch, sp, k).W
        assert W[0, 0] == pytest.approx((1 - 9 * k) / (1 + k))
    grow = run(SteppingPlan(sch, sp, 0.3, 200, [np.ones(1)])).norms
    decay = run(SteppingPlan(sch, sp, 0.2, 200, [np.ones(1)])).norms
    assert grow[-1] > 1e3 and decay[-1] < 1e-3


def test_companion_radius_matches_model_roots():
    rng = np.random.default_rng(1)
    for _ in range(100):
        r = int(rng.integers(1, 6))
        sch = build_scheme(r, float(rng.uniform(0.05, 1)))
        lam_a, lam_b = -float(rng.uniform(0.1, 10)), float(rng.normal(0, 5))
        k = float(10 ** rng.uniform(-2, 3))
        poly = sch.a / k - lam_a * sch.c - lam_b * sch.b
        ref = np.abs(np.roots(poly[::-1])).max()
        rho = companion_matrix(sch, validate_splitting([[lam_a]], [[lam_b]]), k).spectral_radius()
        assert rho == pytest.approx(ref, rel=1e-9)


def test_empirical_stability_scalar_example():
    sp = scalar_problem(-1.0, -9.0).split
    ks = np.logspace(-3, 8, 23)
    v = empirical_stability(build_scheme(5, 0.04), sp, ks)
    assert all(x.stable for x in v)
    v = empirical_stability(build_scheme(5, 1.0), sp, np.logspace(2, 8, 7))
    assert not any(x.stable for x in v)


@pytest.mark.parametrize("r", range(1, 6))
def test_implicit_only_is_stable(r):
    rng = np.random.default_rng(r)
    G = rng.standard_normal((4, 4))
    sp = validate_splitting(-(G @ G.T + np.eye(4)), np.zeros((4, 4)))
    v = empirical_stability(build_scheme(r, 0.3), sp, np.logspace(-2, 6, 9))
    assert all(x.stable for x in v)


def test_empirical_stability_size_cap():
    sp = validate_splitting(-np.eye(500), np.zeros((500, 500)))
    with pytest.raises(ValueError):
        empirical_stability(build_scheme(5, 0.5), sp, [1.0])


def test_sbdf1_blows_up_at_huge_k():
    sp = scalar_problem(-1.0, -9.0).split
    traj = run(SteppingPlan(build_scheme(1, 1.0), sp, 1e6, 100, [np.ones(1)]))
    assert traj.diverged or traj.norms[-1] > 1e10


def test_small_delta_stays_bounded_at_huge_k():
    sp = scalar_problem(-1.0, -9.0).split
    init = [np.ones(1) * (1 + 0.1 * j) for j in range(5)]
    traj = run(SteppingPlan(build_scheme(5, 0.04), sp, 1e6, 10_000, init), keep="last")
    assert not traj.diverged
    assert traj.norms.max() <= 10 * max(abs(u[0]) for u in init)


@pytest.mark.parametrize(
    "r,delta,expected",
    [(1, 1.0, 1.839e-4), (2, 2.0**-6, 1.454e-3), (3, 2.0**-6, 9.160e-5)],
)
def test_gte_fixed_k(r, delta, expected):
    prob = scalar_problem(-1.0, 0.0)
    plan = exact_start_plan(build_scheme(r, delta), prob.split, 1e-3, 1.0, prob.exact)
    assert global_error(plan, prob.exact) == pytest.approx(expected, rel=2e-3)


def test_gte_delta_rate():
    prob = scalar_problem(-1.0, 0.0)
    e = [
        global_error(exact_start_plan(build_scheme(2, d), prob.split, 1e-3, 1.0, prob.exact), prob.exact)
        for d in (2.0**-5, 2.0**-6)
    ]
    assert math.log(e[1] / e[0]) / math.log(0.5) == pytest.approx(-2.0, abs=0.05)


def test_gte_k_proportional():
    prob = scalar_problem(-1.0, 0.0)
    plan = exact_start_plan(build_scheme(1, 1.0), prob.split, 0.2, 1.0, prob.exact)
    assert global_error(plan, prob.exact) == pytest.approx(3.400e-2, rel=2e-3)


def test_exact_start_conventions():
    prob = scalar_problem(-1.0, 0.0)
    sch = build_scheme(3, 0.5)
    past = exact_start_plan(sch, prob.split, 0.1, 1.0, prob.exact)
    fut = exact_start_plan(sch, prob.split, 0.1, 1.0, prob.exact, history="future")
    assert past.t0 == pytest.approx(-0.2) and past.n_steps == 10
    assert fut.t0 == 0.0 and fut.n_steps == 8
    for plan in (past, fut):
        assert run(plan).times[-1] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        exact_start_plan(sch, prob.split, 0.3, 1.0, prob.exact)
    with pytest.raises(ValueError):
        exact_start_plan(sch, prob.split, 0.1, 1.0, prob.exact, history="middle")


def test_plan_validation():
    sp = scalar_problem(-1.0, 0.0).split
    sch = build_scheme(2, 1.0)
    with pytest.raises(ValueError):
        SteppingPlan(sch, sp, 0.1, 5, [np.ones(1)])
    with pytest.raises(ValueError):
        SteppingPlan(sch, sp, -0.1, 5, [np.ones(1)] * 2)
    with pytest.raises(ValueError):
        SteppingPlan(sch, sp, 0.1, 5, [np.ones(2)] * 2)


def test_diverged_run_has_no_error():
    prob = scalar_problem(-1.0, -9.0)
    plan = exact_start_plan(build_scheme(1, 1.0), prob.split, 1.0, 100.0, prob.exact)
    with pytest.raises(SteppingError):
        global_error(plan, prob.exact)


def test_forced_zero_start_does_not_trip_guard():
    sp = validate_splitting([[-1.0]], [[0.0]])
    plan = SteppingPlan(build_scheme(2, 1.0), sp, 0.01, 100, [np.zeros(1)] * 2, forcing=lambda t: np.array([1.0]))
    traj = run(plan)
    assert not traj.diverged and traj.norms[-1] > 0


def test_forcing_is_explicit():
    """u' = -u + 1 from u = 1 stays at 1 exactly for any consistent scheme."""
    sp = validate_splitting([[-1.0]], [[0.0]])
    for r in range(1, 6):
        plan = SteppingPlan(build_scheme(r, 0.5), sp, 0.1, 50, [np.ones(1)] * r, forcing=lambda t: np.array([1.0]))
        assert np.allclose(run(plan).final, 1.0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    r=st.integers(1, 5),
    seed=st.integers(0, 2**32 - 1),
    alpha=st.floats(-3, 3),
    beta=st.floats(-3, 3),
)
def test_run_is_linear(r, seed, alpha, beta):
    rng = np.random.default_rng(seed)
    sp = random_system(rng, 3)
    sch = build_scheme(r, 0.5)
    u = [rng.standard_normal(3) for _ in range(r)]
    v = [rng.standard_normal(3) for _ in range(r)]
    w = [alpha * x + beta * y for x, y in zip(u, v)]
    fu, fv, fw = (run(SteppingPlan(sch, sp, 0.1, 15, init), keep="last").final for init in (u, v, w))
    assert np.allclose(fw, alpha * fu + beta * fv, atol=1e-9 * (1 + np.abs(fw).max()))
