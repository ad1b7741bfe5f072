"""Self-contained numeric kernels: dense LP, box-constrained QP, Riccati, matrix exponential.

Everything here is deterministic: the simplex uses Bland's rule, the QP a
fixed-step splitting iteration, so identical inputs give identical outputs.
Problem sizes are desk-scale (at most a few hundred variables), so dense
algebra is used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MaxIterations, NoConvergence, NumericalFailure

_PIVOT_TOL = 1e-10
_FEAS_TOL = 1e-9


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------

@dataclass
class LinearProgram:
    """min cost @ x  s.t.  a_eq @ x = b_eq,  lower <= x <= upper.

    Bounds may be +-inf componentwise. General inequalities are expected to
    be encoded by the caller through slack variables.
    """

    cost: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float).ravel()
        n = self.cost.size
        self.a_eq = np.asarray(self.a_eq, dtype=float).reshape(-1, n)
        self.b_eq = np.asarray(self.b_eq, dtype=float).ravel()
        if self.b_eq.size != self.a_eq.shape[0]:
            raise ValueError("equality right-hand side does not match row count")
        self.lower = np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.asarray(self.upper, dtype=float).ravel()
        if self.lower.size != n or self.upper.size != n:
            raise ValueError("bound vectors must match the variable count")


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    value: float | None = None


def _simplex_core(table, basis, n_real, max_iter):
    """Minimize the cost row of a standard-form tableau in place.

    ``table`` has shape (m+1, n+1): m constraint rows ``[A | b]`` and a final
    cost row ``[c | -value]``. Bland's rule (lowest eligible index) is used
    for both the entering and leaving choices, which precludes cycling.
    Returns "optimal" or "unbounded".
    """
    m = table.shape[0] - 1
    for _ in range(max_iter):
        cost_row = table[-1, :-1]
        entering = -1
        for j in range(n_real):
            if cost_row[j] < -_PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return "optimal"
        leaving = -1
        best_ratio = math.inf
        for i in range(m):
            a = table[i, entering]
            if a > _PIVOT_TOL:
                ratio = table[i, -1] / a
                if ratio < best_ratio - _PIVOT_TOL or (
                    abs(ratio - best_ratio) <= _PIVOT_TOL
                    and (leaving < 0 or basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            return "unbounded"
        pivot = table[leaving, entering]
        table[leaving] /= pivot
        for i in range(m + 1):
            if i != leaving and abs(table[i, entering]) > 0.0:
                table[i] -= table[i, entering] * table[leaving]
        basis[leaving] = entering
    raise NumericalFailure("simplex iteration cap exceeded")


def _solve_standard_form(a, b, c, max_iter):
    """Two-phase simplex for min c@y s.t. a@y = b, y >= 0."""
    m, n = a.shape
    a = a.copy()
    b = b.copy()
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    # Phase 1: artificial variables, one per row.
    table = np.zeros((m + 1, n + m + 1))
    table[:m, :n] = a
    table[:m, n:n + m] = np.eye(m)
    table[:m, -1] = b
    table[-1, :n] = -a.sum(axis=0)
    table[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    status = _simplex_core(table, basis, n + m, max_iter)
    if status != "optimal" or -table[-1, -1] > 1e-7 * max(1.0, abs(b).max(initial=1.0)):
        return "infeasible", None
    # Pivot remaining artificials out of the basis (they sit at level zero).
    keep = []
    for i in range(m):
        if basis[i] >= n:
            pivot_col = -1
            for j in range(n):
                if abs(table[i, j]) > 1e-8:
                    pivot_col = j
                    break
            if pivot_col < 0:
                continue  # redundant row
            table[i] /= table[i, pivot_col]
            for k in range(m + 1):
                if k != i and abs(table[k, pivot_col]) > 0.0:
                    table[k] -= table[k, pivot_col] * table[i]
            basis[i] = pivot_col
        keep.append(i)

    # Phase 2 on the surviving rows with the real cost.
    rows = keep + [m]
    table2 = np.zeros((len(keep) + 1, n + 1))
    table2[:-1, :n] = table[keep][:, :n]
    table2[:-1, -1] = table[keep][:, -1]
    basis2 = [basis[i] for i in keep]
    table2[-1, :n] = c
    for i, bi in enumerate(basis2):
        table2[-1] -= c[bi] * table2[i]
    status = _simplex_core(table2, basis2, n, max_iter)
    if status == "unbounded":
        return "unbounded", None
    y = np.zeros(n)
    for i, bi in enumerate(basis2):
        y[bi] = table2[i, -1]
    return "optimal", y


def solve_lp(problem: LinearProgram, max_iter: int = 20000) -> LpResult:
    """Solve a bounded-variable LP with a deterministic dense simplex.

    The bounded-variable form is reduced to standard form by shifting and
    splitting variables; two-sided bounds add one slack row each.
    """
    c = problem.cost
    n = c.size
    lo, hi = problem.lower, problem.upper
    if np.any(lo > hi + _FEAS_TOL):
        return LpResult("infeasible")

    # Column layout of the standard-form variable y and the affine map
    # x = shift + spread @ y recovering the original variables.
    cols = []          # per original var: list of (col_index, sign)
    shift = np.zeros(n)
    extra_rows = []    # (col_index, rhs) for two-sided bounds
    n_std = 0
    for i in range(n):
        lo_f, hi_f = math.isfinite(lo[i]), math.isfinite(hi[i])
        if lo_f:
            shift[i] = lo[i]
            cols.append([(n_std, 1.0)])
            if hi_f:
                extra_rows.append((n_std, hi[i] - lo[i]))
            n_std += 1
        elif hi_f:
            shift[i] = hi[i]
            cols.append([(n_std, -1.0)])
            n_std += 1
        else:
            cols.append([(n_std, 1.0), (n_std + 1, -1.0)])
            n_std += 2
    n_slack = len(extra_rows)
    m_eq = problem.a_eq.shape[0]
    a_std = np.zeros((m_eq + n_slack, n_std + n_slack))
    b_std = np.zeros(m_eq + n_slack)
    c_std = np.zeros(n_std + n_slack)
    for i in range(n):
        for j, s in cols[i]:
            a_std[:m_eq, j] = s * problem.a_eq[:, i]
            c_std[j] = s * c[i]
    b_std[:m_eq] = problem.b_eq - problem.a_eq @ shift
    for k, (j, rhs) in enumerate(extra_rows):
        a_std[m_eq + k, j] = 1.0
        a_std[m_eq + k, n_std + k] = 1.0
        b_std[m_eq + k] = rhs

    status, y = _solve_standard_form(a_std, b_std, c_std, max_iter)
    if status != "optimal":
        return LpResult(status)
    x = shift.copy()
    for i in range(n):
        for j, s in cols[i]:
            x[i] += s * y[j]
    return LpResult("optimal", x, float(c @ x))


# ---------------------------------------------------------------------------
# Quadratic programming
# ---------------------------------------------------------------------------

@dataclass
class QuadraticProgram:
    """min 0.5 x@H@x + linear@x  s.t.  a_eq@x = b_eq,  lower <= x <= upper.

    H must be symmetric PSD; slack variables encoding general inequalities
    may carry zero Hessian blocks.
    """

    hessian: np.ndarray
    linear: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.hessian = np.asarray(self.hessian, dtype=float)
        self.linear = np.asarray(self.linear, dtype=float).ravel()
        n = self.linear.size
        self.a_eq = np.asarray(self.a_eq, dtype=float).reshape(-1, n)
        self.b_eq = np.asarray(self.b_eq, dtype=float).ravel()
        self.lower = np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.asarray(self.upper, dtype=float).ravel()
        if self.hessian.shape != (n, n):
            raise ValueError("hessian shape does not match the variable count")
        if np.abs(self.hessian - self.hessian.T).max(initial=0.0) > 1e-10:
            raise ValueError("hessian must be symmetric")


@dataclass
class QpResult:
    status: str
    x: np.ndarray | None = None
    value: float | None = None
    kkt_residual: float | None = None
    iterations: int = 0


def _qp_kkt_residual(p: QuadraticProgram, x, nu):
    grad = p.hessian @ x + p.linear + p.a_eq.T @ nu
    at_lo = x <= p.lower + 1e-12
    at_hi = x >= p.upper - 1e-12
    viol = np.abs(grad)
    viol[at_lo] = np.maximum(0.0, -grad[at_lo])
    viol[at_hi] = np.maximum(0.0, grad[at_hi])
    both = at_lo & at_hi
    viol[both] = 0.0
    r_eq = p.a_eq @ x - p.b_eq
    r = viol.max(initial=0.0)
    if r_eq.size:
        r = max(r, np.abs(r_eq).max())
    return r


def solve_qp(problem: QuadraticProgram, max_iter: int = 50000, tol: float = 1e-6) -> QpResult:
    """Solve a convex box/equality QP by ADMM splitting.

    The x-subproblem solves a fixed KKT system (factored once); the z-update
    is a box projection, so returned iterates respect the bounds exactly.
    Terminates on the spec-level KKT residual.
    """
    n = problem.linear.size
    m = problem.a_eq.shape[0]
    lo = problem.lower
    hi = problem.upper
    if np.any(lo > hi + 1e-12):
        return QpResult("infeasible")

    scale = max(1.0, np.abs(problem.hessian).max(initial=0.0))
    rho = 0.1 * scale
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = problem.hessian + rho * np.eye(n)
    kkt[:n, n:] = problem.a_eq.T
    kkt[n:, :n] = problem.a_eq
    try:
        kkt_inv = np.linalg.inv(kkt)
    except np.linalg.LinAlgError:
        # Degenerate equality rows: fall back to the pseudoinverse.
        kkt_inv = np.linalg.pinv(kkt)

    z = np.clip(np.zeros(n), lo, hi)
    u = np.zeros(n)
    nu = np.zeros(m)
    rhs = np.zeros(n + m)
    rhs[n:] = problem.b_eq
    check_every = 25
    for it in range(1, max_iter + 1):
        rhs[:n] = rho * (z - u) - problem.linear
        sol = kkt_inv @ rhs
        x = sol[:n]
        nu = sol[n:]
        z_prev = z
        z = np.clip(x + u, lo, hi)
        u = u + x - z
        if it % check_every == 0 or it == max_iter:
            primal = np.abs(x - z).max(initial=0.0)
            dual = rho * np.abs(z - z_prev).max(initial=0.0)
            if primal <= 0.1 * tol and dual <= 0.1 * tol:
                res = _qp_kkt_residual(problem, z, nu)
                if res <= tol:
                    val = float(0.5 * z @ problem.hessian @ z + problem.linear @ z)
                    return QpResult("optimal", z, val, res, it)
    res = _qp_kkt_residual(problem, z, nu)
    if res <= 10 * tol:
        val = float(0.5 * z @ problem.hessian @ z + problem.linear @ z)
        return QpResult("optimal", z, val, res, max_iter)
    raise MaxIterations(
        f"QP did not reach KKT residual {tol:g} in {max_iter} iterations (residual {res:.3e})"
    )


# ---------------------------------------------------------------------------
# Riccati / LQR
# ---------------------------------------------------------------------------

@dataclass
class LqrWeights:
    """Diagonal state and input weights; q >= 0, r > 0."""

    q: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.r = np.asarray(self.r, dtype=float)
        if self.q.ndim == 1:
            self.q = np.diag(self.q)
        if self.r.ndim == 1:
            self.r = np.diag(self.r)
        if np.any(np.diag(self.q) < 0):
            raise ValueError("state weights must be nonnegative")
        if np.any(np.diag(self.r) <= 0):
            raise ValueError("input weights must be positive")


def dare(a_d, b_d, weights: LqrWeights, tol: float = 1e-9, max_doublings: int = 120):
    """Stabilizing solution of the discrete algebraic Riccati equation.

    Uses the structured doubling iteration (quadratically convergent), then
    verifies the fixed-point residual. Returns (P, K) with
    K = (R + B'PB)^-1 B'PA and rho(A - BK) < 1.
    """
    a = np.asarray(a_d, dtype=float)
    b = np.asarray(b_d, dtype=float).reshape(a.shape[0], -1)
    q, r = weights.q, weights.r
    n = a.shape[0]
    g = b @ np.linalg.solve(r, b.T)
    h = q.copy()
    ak = a.copy()
    eye = np.eye(n)
    for _ in range(max_doublings):
        try:
            w = np.linalg.solve(eye + g @ h, np.hstack([ak, g @ ak.T]))
        except np.linalg.LinAlgError as err:
            raise NoConvergence("doubling iteration hit a singular pencil") from err
        w1 = w[:, :n]
        w2 = w[:, n:]
        h_next = h + ak.T @ h @ w1
        g_next = g + ak @ w2
        a_next = ak @ w1
        delta = np.abs(h_next - h).max(initial=0.0)
        ak, g, h = a_next, g_next, h_next
        if delta <= 1e-14 * max(1.0, np.abs(h).max(initial=1.0)):
            break
    p = 0.5 * (h + h.T)
    k = np.linalg.solve(r + b.T @ p @ b, b.T @ p @ a)
    residual = np.abs(a.T @ p @ a - p - a.T @ p @ b @ k + q).max(initial=0.0)
    if residual > tol:
        raise NoConvergence(f"DARE residual {residual:.3e} exceeds {tol:g}")
    closed = a - b @ k
    if np.abs(np.linalg.eigvals(closed)).max(initial=0.0) >= 1.0:
        raise NoConvergence("doubling returned a non-stabilizing solution")
    return p, k


def finite_horizon_riccati(a_d, b_d, weights: LqrWeights, steps: int, return_cost=False):
    """Backward Riccati recursion from terminal cost P = Q.

    Returns the stagewise gains [K_0, ..., K_{steps-1}]; with
    ``return_cost`` also the cost-to-go matrices [P_0, ..., P_steps].
    """
    a = np.asarray(a_d, dtype=float)
    b = np.asarray(b_d, dtype=float).reshape(a.shape[0], -1)
    q, r = weights.q, weights.r
    p = q.copy()
    gains = [None] * steps
    costs = [None] * (steps + 1)
    costs[steps] = p
    for t in range(steps - 1, -1, -1):
        btp = b.T @ p
        k = np.linalg.solve(r + btp @ b, btp @ a)
        p = q + a.T @ p @ (a - b @ k)
        p = 0.5 * (p + p.T)
        gains[t] = k
        costs[t] = p
    if return_cost:
        return gains, costs
    return gains


# ---------------------------------------------------------------------------
# Matrix exponential / zero-order hold
# ---------------------------------------------------------------------------

_PADE6 = None


def _pade6_coeffs():
    global _PADE6
    if _PADE6 is None:
        m = 6
        _PADE6 = [
            math.factorial(2 * m - j) * math.factorial(m)
            / (math.factorial(2 * m) * math.factorial(j) * math.factorial(m - j))
            for j in range(m + 1)
        ]
    return _PADE6


def expm(a) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a (6,6) Pade approximant."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    norm = np.abs(a).sum(axis=1).max(initial=0.0)
    s = max(0, int(math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0)
    a_s = a / (2.0 ** s)
    b = _pade6_coeffs()
    eye = np.eye(n)
    pw = eye
    num = b[0] * eye
    den = b[0] * eye
    sign = 1.0
    for j in range(1, 7):
        pw = pw @ a_s
        sign = -sign
        num = num + b[j] * pw
        den = den + b[j] * sign * pw
    e = np.linalg.solve(den, num)
    for _ in range(s):
        e = e @ e
    return e


def zoh(a, b, dt):
    """Exact zero-order-hold discretization of dx/dt = A x + B u.

    Returns (Ad, Bd) with Ad = exp(A dt), Bd = int_0^dt exp(A tau) dtau @ B,
    computed through the augmented-matrix exponential.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(a.shape[0], -1)
    n, m = a.shape[0], b.shape[1]
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = a
    aug[:n, n:] = b
    e = expm(aug * float(dt))
    return e[:n, :n], e[:n, n:]
