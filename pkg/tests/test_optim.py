"""Kernel solver tests: LP vs basic-solution enumeration, QP vs active-set
brute force, Riccati residuals, and the matrix exponential."""

import itertools

import numpy as np
import pytest

from stlsynth.errors import NoConvergence
from stlsynth.optim import (
    LinearProgram,
    LqrWeights,
    QuadraticProgram,
    dare,
    expm,
    finite_horizon_riccati,
    solve_lp,
    solve_qp,
    zoh,
)


def lp_brute_force(cost, a_eq, b_eq, lower, upper):
    """Enumerate basic solutions of the bounded LP (<= 3 structural vars).

    Vertices of {a_eq x = b_eq, lower <= x <= upper} fix n - rank(a_eq)
    variables at a bound and solve for the rest.
    """
    cost = np.asarray(cost, float)
    a_eq = np.asarray(a_eq, float)
    b_eq = np.asarray(b_eq, float)
    n = cost.size
    m = a_eq.shape[0]
    rank = np.linalg.matrix_rank(a_eq) if m else 0
    n_fix = n - rank
    best = None
    for fixed in itertools.combinations(range(n), n_fix):
        free = [i for i in range(n) if i not in fixed]
        for vals in itertools.product(*[(lower[i], upper[i]) for i in fixed]):
            if any(not np.isfinite(v) for v in vals):
                continue
            x = np.zeros(n)
            for i, v in zip(fixed, vals):
                x[i] = v
            if free:
                sub = a_eq[:, free]
                rhs = b_eq - a_eq[:, fixed] @ np.array(vals) if fixed else b_eq
                sol, res, rk, _ = np.linalg.lstsq(sub, rhs, rcond=None)
                if np.abs(sub @ sol - rhs).max(initial=0.0) > 1e-8:
                    continue
                for i, v in zip(free, sol):
                    x[i] = v
            if np.any(x < lower - 1e-8) or np.any(x > upper + 1e-8):
                continue
            val = cost @ x
            if best is None or val < best - 1e-12:
                best = val
    return best


class TestLp:
    def test_epigraph_split(self):
        # min s subject to -s <= xi_i <= s, xi_1 + xi_2 = 3.
        cost = np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0])
        a = np.zeros((5, 7))
        b = np.zeros(5)
        a[0, :2] = 1.0
        b[0] = 3.0
        for i in range(2):
            a[1 + 2 * i, i] = 1.0
            a[1 + 2 * i, 2] = 1.0
            a[1 + 2 * i, 3 + 2 * i] = -1.0
            a[2 + 2 * i, i] = -1.0
            a[2 + 2 * i, 2] = 1.0
            a[2 + 2 * i, 4 + 2 * i] = -1.0
        lower = np.array([-np.inf, -np.inf, 0.0, 0.0, 0.0, 0.0, 0.0])
        upper = np.full(7, np.inf)
        res = solve_lp(LinearProgram(cost, a, b, lower, upper))
        assert res.status == "optimal"
        assert res.value == pytest.approx(1.5, abs=1e-9)

    def test_infeasible_equality(self):
        lp = LinearProgram(
            cost=[1.0],
            a_eq=[[0.0]],
            b_eq=[1.0],
            lower=[-np.inf],
            upper=[np.inf],
        )
        assert solve_lp(lp).status == "infeasible"

    def test_unbounded(self):
        lp = LinearProgram([-1.0], np.zeros((0, 1)), [], [-np.inf], [np.inf])
        assert solve_lp(lp).status == "unbounded"

    def test_random_against_enumeration(self):
        rng = np.random.default_rng(7)
        for _ in range(120):
            n = rng.integers(2, 4)
            m = rng.integers(0, n)
            cost = rng.normal(size=n)
            a_eq = rng.normal(size=(m, n))
            lower = rng.uniform(-2.0, 0.0, size=n)
            upper = lower + rng.uniform(0.5, 3.0, size=n)
            x_feas = rng.uniform(lower, upper)
            b_eq = a_eq @ x_feas
            res = solve_lp(LinearProgram(cost, a_eq, b_eq, lower, upper))
            expected = lp_brute_force(cost, a_eq, b_eq, lower, upper)
            assert res.status == "optimal"
            assert res.value == pytest.approx(expected, abs=1e-7)
            assert np.abs(a_eq @ res.x - b_eq).max(initial=0.0) <= 1e-8


def qp_brute_force(h, q, lower, upper):
    """Active-set enumeration for box QPs (no equality rows, <= 4 vars)."""
    n = q.size
    best_val, best_x = np.inf, None
    for active in itertools.product((0, 1, 2), repeat=n):
        x = np.zeros(n)
        free = [i for i in range(n) if active[i] == 0]
        for i in range(n):
            if active[i] == 1:
                x[i] = lower[i]
            elif active[i] == 2:
                x[i] = upper[i]
        if free:
            rhs = -(q[free] + h[np.ix_(free, [i for i in range(n) if active[i]])] @
                    x[[i for i in range(n) if active[i]]]) if n - len(free) else -q[free]
            try:
                x_free = np.linalg.solve(h[np.ix_(free, free)], rhs)
            except np.linalg.LinAlgError:
                continue
            x[free] = x_free
        if np.any(x < lower - 1e-9) or np.any(x > upper + 1e-9):
            continue
        val = 0.5 * x @ h @ x + q @ x
        if val < best_val - 1e-12:
            best_val, best_x = val, x
    return best_val, best_x


class TestQp:
    def test_projection_inside(self):
        x0 = np.array([0.2, -0.3])
        p = QuadraticProgram(np.eye(2), -x0, np.zeros((0, 2)), [], [-1, -1], [1, 1])
        res = solve_qp(p)
        assert res.status == "optimal"
        np.testing.assert_allclose(res.x, x0, atol=1e-6)

    def test_projection_clamped(self):
        x0 = np.array([2.0, -3.0, 0.5])
        p = QuadraticProgram(np.eye(3), -x0, np.zeros((0, 3)), [], [-1, -1, -1], [1, 1, 1])
        res = solve_qp(p)
        np.testing.assert_allclose(res.x, [1.0, -1.0, 0.5], atol=1e-6)

    def test_random_against_active_set(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            n = rng.integers(2, 5)
            m = rng.normal(size=(n, n))
            h = m @ m.T + 0.5 * np.eye(n)
            q = rng.normal(size=n)
            lower = rng.uniform(-1.5, -0.1, size=n)
            upper = rng.uniform(0.1, 1.5, size=n)
            p = QuadraticProgram(h, q, np.zeros((0, n)), [], lower, upper)
            res = solve_qp(p, tol=1e-8)
            expected, _ = qp_brute_force(h, q, lower, upper)
            got = 0.5 * res.x @ h @ res.x + q @ res.x
            assert got == pytest.approx(expected, abs=1e-5)
            assert np.all(res.x >= lower - 1e-12)
            assert np.all(res.x <= upper + 1e-12)

    def test_equality_constrained(self):
        # min ||x||^2 s.t. x1 + x2 = 1 -> (0.5, 0.5).
        p = QuadraticProgram(np.eye(2), np.zeros(2), [[1.0, 1.0]], [1.0], [-5, -5], [5, 5])
        res = solve_qp(p)
        np.testing.assert_allclose(res.x, [0.5, 0.5], atol=1e-6)


class TestRiccati:
    def test_scalar_golden_ratio(self):
        # a = b = q = r = 1: p solves p = 1 + p - p^2/(1+p) -> p^2 = p + 1.
        p, k = dare(np.array([[1.0]]), np.array([[1.0]]), LqrWeights([1.0], [1.0]))
        golden = (1.0 + np.sqrt(5.0)) / 2.0
        assert p[0, 0] == pytest.approx(golden, abs=1e-10)

    def test_zero_input_stable(self):
        a = np.array([[0.5, 0.1], [0.0, 0.3]])
        p, k = dare(a, np.zeros((2, 1)), LqrWeights([0.0, 0.0], [1.0]))
        assert np.abs(p).max() <= 1e-12
        assert np.abs(k).max() <= 1e-12

    def test_random_residuals(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, 3))
            a = rng.normal(size=(n, n))
            a /= max(1.0, np.abs(np.linalg.eigvals(a)).max() / 1.2)
            b = rng.normal(size=(n, m))
            w = LqrWeights(rng.uniform(0.1, 2.0, size=n), rng.uniform(0.1, 2.0, size=m))
            try:
                p, k = dare(a, b, w, tol=1e-9)
            except NoConvergence:
                continue
            res = a.T @ p @ a - p - a.T @ p @ b @ k + w.q
            assert np.abs(res).max() <= 1e-9
            assert np.abs(np.linalg.eigvals(a - b @ k)).max() < 1.0

    def test_finite_horizon_converges_to_dare(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=(3, 3))
        a /= max(1.0, np.abs(np.linalg.eigvals(a)).max() / 0.95)
        b = rng.normal(size=(3, 2))
        w = LqrWeights([1.0, 0.5, 2.0], [1.0, 0.3])
        _, k_inf = dare(a, b, w)
        gains = finite_horizon_riccati(a, b, w, 500)
        assert np.abs(gains[0] - k_inf).max() <= 1e-6

    def test_single_step_least_squares(self):
        a = np.array([[1.0, 0.2], [0.0, 1.0]])
        b = np.array([[0.0], [1.0]])
        w = LqrWeights([1.0, 1.0], [2.0])
        gains = finite_horizon_riccati(a, b, w, 1)
        expected = np.linalg.solve(w.r + b.T @ w.q @ b, b.T @ w.q @ a)
        np.testing.assert_allclose(gains[0], expected, atol=1e-12)

    def test_zero_state_weight_gives_zero_gains(self):
        a = np.array([[0.9, 0.1], [0.0, 0.8]])
        b = np.array([[0.0], [1.0]])
        gains = finite_horizon_riccati(a, b, LqrWeights([0.0, 0.0], [1.0]), 10)
        for k in gains:
            assert np.abs(k).max() <= 1e-12

    def test_cost_to_go_psd(self):
        rng = np.random.default_rng(9)
        a = rng.normal(size=(3, 3)) * 0.5
        b = rng.normal(size=(3, 1))
        w = LqrWeights([1.0, 0.2, 0.0], [0.5])
        _, costs = finite_horizon_riccati(a, b, w, 30, return_cost=True)
        for p in costs:
            assert np.abs(p - p.T).max() <= 1e-10
            assert np.linalg.eigvalsh(p).min() >= -1e-8


class TestExpm:
    def test_against_series(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a = rng.normal(size=(4, 4))
            series = np.eye(4)
            term = np.eye(4)
            for k in range(1, 40):
                term = term @ a / k
                series = series + term
            np.testing.assert_allclose(expm(a), series, atol=1e-9, rtol=1e-9)

    def test_zoh_trivial(self):
        ad, bd = zoh(np.zeros((2, 2)), np.eye(2), 0.1)
        np.testing.assert_allclose(ad, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(bd, 0.1 * np.eye(2), atol=1e-14)

    def test_zoh_double_integrator(self):
        # Nilpotent A gives the closed-form coupling dt in the (0,1) entry.
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        b = np.array([[0.0], [1.0]])
        ad, bd = zoh(a, b, 0.25)
        np.testing.assert_allclose(ad, [[1.0, 0.25], [0.0, 1.0]], atol=1e-14)
        np.testing.assert_allclose(bd, [[0.03125], [0.25]], atol=1e-12)
