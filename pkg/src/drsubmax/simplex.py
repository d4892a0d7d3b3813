"""Bounded-variable primal simplex for ``max cᵀx  s.t.  Ax <= b, 0 <= x <= u``.

Requires ``b >= 0`` so the all-slack basis is feasible. Uses Bland's rule
for both the entering and leaving choice, which rules out cycling.
"""

import numpy as np


class LPError(RuntimeError):
    """The LP is infeasible or unbounded (cannot happen for compact down-closed regions)."""


def bounded_simplex(c, A, b, upper, tol: float = 1e-10, max_iter: int = 50_000):
    """Solve the LP and return ``(x, objective)``.

    ``upper`` may contain ``inf``; slack variables are always unbounded above.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < -tol):
        raise LPError("origin is infeasible (negative right-hand side)")

    full = np.hstack([A, np.eye(m)])
    cost = np.concatenate([c, np.zeros(m)])
    ub = np.concatenate([np.asarray(upper, dtype=float), np.full(m, np.inf)])
    basis = list(range(n, n + m))
    at_upper = np.zeros(n + m, dtype=bool)

    for _ in range(max_iter):
        B = full[:, basis]
        rhs = b - full[:, at_upper] @ ub[at_upper]
        xb = np.linalg.solve(B, rhs)
        y = np.linalg.solve(B.T, cost[basis])
        reduced = cost - full.T @ y

        in_basis = np.zeros(n + m, dtype=bool)
        in_basis[basis] = True
        improving = ~in_basis & (
            (~at_upper & (reduced > tol)) | (at_upper & (reduced < -tol))
        )
        if not improving.any():
            break
        j = int(np.flatnonzero(improving)[0])
        sign = -1.0 if at_upper[j] else 1.0
        rate = -sign * np.linalg.solve(B, full[:, j])  # d(xb)/dt

        best_t, leave, leave_to_upper = ub[j], None, False  # bound flip first
        for r, var in enumerate(basis):
            if rate[r] < -tol:
                t, to_upper = max(xb[r], 0.0) / -rate[r], False
            elif rate[r] > tol and np.isfinite(ub[var]):
                t, to_upper = max(ub[var] - xb[r], 0.0) / rate[r], True
            else:
                continue
            if t < best_t - tol or (
                leave is not None and abs(t - best_t) <= tol and var < basis[leave]
            ):
                best_t, leave, leave_to_upper = t, r, to_upper
        if not np.isfinite(best_t):
            raise LPError("LP is unbounded")
        if leave is None:
            at_upper[j] = not at_upper[j]
            continue
        out = basis[leave]
        at_upper[out] = leave_to_upper
        at_upper[j] = False
        basis[leave] = j
    else:
        raise LPError("simplex iteration limit reached")

    x = np.where(at_upper, ub, 0.0)
    x[basis] = xb
    x = np.clip(x[:n], 0.0, ub[:n])
    return x, float(c @ x)
