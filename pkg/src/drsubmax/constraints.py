"""Down-closed convex feasible regions in the positive orthant.

Every region exposes a linear-maximization oracle (optionally capped from
above, which gives the shrunken LMO), a membership test and, for boxes and
cardinality polytopes, Euclidean projection.
"""

from __future__ import annotations

import numpy as np

from .core import TOL, Box, as_point
from .simplex import bounded_simplex


class UnsupportedOperation(NotImplementedError):
    """The constraint does not provide the requested capability."""


class Constraint:
    family = "constraint"
    supports_projection = False

    #: tight upper box ``ū`` enclosing the region
    upper: np.ndarray

    @property
    def n(self) -> int:
        return self.upper.size

    @property
    def diameter_bound(self) -> float:
        """``‖ū‖``, an upper bound on the region's diameter."""
        return float(np.linalg.norm(self.upper))

    def _cap(self, cap):
        if cap is None:
            return self.upper
        cap = as_point(cap, self.n)
        if np.any(cap < -TOL):
            raise ValueError("LMO cap must be nonnegative")
        return np.minimum(self.upper, np.maximum(cap, 0.0))

    def lmo(self, g, cap=None) -> np.ndarray:
        """``argmax ⟨v, g⟩`` over the region intersected with ``{v <= cap}``."""
        raise NotImplementedError

    def contains(self, x, tol: float = TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,) or not np.all(np.isfinite(x)):
            return False
        return bool(self.feasible_mask(x[None, :], tol)[0])

    def feasible_mask(self, X, tol: float = TOL) -> np.ndarray:
        raise NotImplementedError

    def project(self, y) -> np.ndarray:
        raise UnsupportedOperation(f"{self.family} constraint has no projection")

    def restrict(self, cap) -> "Constraint":
        """The region intersected with ``{x <= cap}`` (still down-closed)."""
        raise NotImplementedError

    def _in_box(self, X, tol):
        return np.all(X >= -tol, axis=1) & np.all(X <= self.upper + tol, axis=1)


class BoxConstraint(Constraint):
    family = "box"
    supports_projection = True

    def __init__(self, upper):
        if isinstance(upper, Box):
            upper = upper.upper
        self.box = Box(upper)
        self.upper = self.box.upper

    def lmo(self, g, cap=None):
        g = as_point(g, self.n)
        return np.where(g > 0, self._cap(cap), 0.0)

    def feasible_mask(self, X, tol=TOL):
        return self._in_box(np.atleast_2d(X), tol)

    def project(self, y):
        return np.clip(as_point(y, self.n), 0.0, self.upper)

    def restrict(self, cap):
        return BoxConstraint(_positive(self._cap(cap)))

    def __repr__(self):
        return f"BoxConstraint(upper={self.upper.tolist()})"


class CardinalityPolytope(Constraint):
    """``{0 <= x <= u, Σ x_i <= b}``; ``b`` is clamped to ``Σ u``."""

    family = "cardinality"
    supports_projection = True

    def __init__(self, u, b: float, n: int = None):
        u = np.asarray(u, dtype=float)
        if u.ndim == 0:
            if n is None:
                raise ValueError("n is required with a scalar cap")
            u = np.full(n, float(u))
        self.upper = as_point(u).copy()
        if np.any(self.upper <= 0):
            raise ValueError("caps must be strictly positive")
        if b < 0:
            raise ValueError("budget must be nonnegative")
        self.budget = float(min(b, self.upper.sum()))

    def lmo(self, g, cap=None):
        g = as_point(g, self.n)
        top = self._cap(cap)
        v = np.zeros(self.n)
        remaining = self.budget
        # descending gradient; stable sort gives lower index the tie
        for i in np.argsort(-g, kind="stable"):
            if g[i] <= 0 or remaining <= 0:
                break
            v[i] = min(top[i], remaining)
            remaining -= v[i]
        return v

    def feasible_mask(self, X, tol=TOL):
        X = np.atleast_2d(X)
        return self._in_box(X, tol) & (X.sum(axis=1) <= self.budget + tol)

    def project(self, y, iterations: int = 200):
        y = as_point(y, self.n)
        x = np.clip(y, 0.0, self.upper)
        if x.sum() <= self.budget:
            return x
        lo, hi = 0.0, float(np.max(y))
        for _ in range(iterations):
            tau = 0.5 * (lo + hi)
            if np.clip(y - tau, 0.0, self.upper).sum() > self.budget:
                lo = tau
            else:
                hi = tau
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
        # the upper end of the bracket is always budget-feasible
        return np.clip(y - hi, 0.0, self.upper)

    def restrict(self, cap):
        return CardinalityPolytope(_positive(self._cap(cap)), self.budget)

    def __repr__(self):
        return f"CardinalityPolytope(u={self.upper.tolist()}, b={self.budget})"


class DownClosedPolytope(Constraint):
    """``{x >= 0, Ax <= b}`` with strictly positive ``A`` and nonnegative ``b``.

    ``cap`` optionally intersects the region with a further box; the
    effective upper box is always the tighter of ``cap`` and
    :func:`derive_upper_bound`.
    """

    family = "polytope"

    def __init__(self, A, b, cap=None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if np.any(A <= 0):
            raise ValueError("A must be strictly positive")
        if np.any(b < 0) or b.size != A.shape[0]:
            raise ValueError("b must be a nonnegative vector with one entry per row")
        self.A, self.b = A, b
        upper = derive_upper_bound(A, b)
        if cap is not None:
            upper = np.minimum(upper, as_point(cap, A.shape[1]))
        self.upper = upper
        self.cap = None if cap is None else as_point(cap, A.shape[1]).copy()

    def lmo(self, g, cap=None):
        g = as_point(g, self.n)
        top = self._cap(cap)
        v = np.zeros(self.n)
        active = np.flatnonzero((g > 0) & (top > 0))
        if active.size:
            v[active], _ = bounded_simplex(g[active], self.A[:, active], self.b,
                                           top[active])
        return v

    def feasible_mask(self, X, tol=TOL):
        X = np.atleast_2d(X)
        return self._in_box(X, tol) & np.all(X @ self.A.T <= self.b + tol, axis=1)

    def restrict(self, cap):
        return DownClosedPolytope(self.A, self.b, self._cap(cap))

    def __repr__(self):
        return f"DownClosedPolytope(m={self.A.shape[0]}, n={self.n})"


def derive_upper_bound(A, b) -> np.ndarray:
    """Tight box enclosing ``{x >= 0, Ax <= b}``: ``cap_j = min_i b_i / A_ij``.

    Zero entries impose no bound on their column.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    ratios = np.full(A.shape, np.inf)
    np.divide(b[:, None], A, out=ratios, where=A > 0)
    return np.min(ratios, axis=0)


def lmo(constraint: Constraint, g, cap=None) -> np.ndarray:
    return constraint.lmo(g, cap)


def membership(constraint: Constraint, x, tol: float = TOL) -> bool:
    return constraint.contains(x, tol)


def project(constraint: Constraint, y) -> np.ndarray:
    return constraint.project(y)


def _positive(cap):
    # Box and cardinality caps must stay strictly positive; a zero cap pins
    # the coordinate, which a tiny cap reproduces within tolerance
    return np.maximum(cap, 1e-300)
